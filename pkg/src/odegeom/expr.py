"""Immutable symbolic expression trees over jet-space coordinates.

Expressions are hash-consed: structurally equal trees are the same Python
object, so structural equality is identity, and evaluation/differentiation
caches key on node identity.  Construction applies light normalization only
(constant folding, 0/1 identities, flattening of sums and products); there is
no factorization or canonical simplification.  Identity claims are settled by
randomized numeric sampling, not by rewriting.

Node kinds:
  num   exact Fraction (or float literal)
  sym   named scalar (coordinate or parameter)
  fam   indexed symbol family f_k whose derivative in the family variable is
        f_{k+1} (w_k in t for arbitrary-function slots, Ups_k in q for
        conformal-scale slots)
  add / mul   n-ary, flattened, constant folded
  div         explicit quotient (kept for symbolic denominators)
  pow         base and exponent are both expressions
  func        exp, log (sqrt normalizes to pow 1/2)
  int         formal antiderivative Int(body, var): opaque to numeric
              evaluation, removed by differentiation in var
"""

from __future__ import annotations

import re
import sys
from fractions import Fraction

import mpmath

from .config import DEFAULT_DPS

sys.setrecursionlimit(max(sys.getrecursionlimit(), 50000))

NUM = "num"
SYM = "sym"
FAM = "fam"
ADD = "add"
MUL = "mul"
DIV = "div"
POW = "pow"
FUNC = "func"
INT = "int"

# family base name -> variable whose derivative shifts the index
FAMILY_VARS = {"w": "t", "Ups": "q"}

_FAMILY_RE = re.compile(r"^([A-Za-z][A-Za-z0-9]*)_([0-9]+)$")

# denominators under this magnitude count as a domain violation
DIV_FLOOR = 1e-120


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class EvalError(ExprError):
    pass


class UnboundSymbolError(EvalError):
    pass


class DomainError(EvalError):
    pass


class AntiderivativeError(EvalError):
    pass


class Expression:
    """A hash-consed node.  Do not instantiate directly; use the constructors."""

    __slots__ = ("kind", "payload", "args")

    def __init__(self, kind, payload, args):
        self.kind = kind
        self.payload = payload
        self.args = args

    # identity semantics: hash-consing makes structural equality == identity
    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __str__(self):
        return to_str(self)

    def __repr__(self):
        return to_str(self)

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return pow_(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    @property
    def is_zero_literal(self):
        return self.kind == NUM and self.payload == 0

    @property
    def is_one_literal(self):
        return self.kind == NUM and self.payload == 1


_intern: dict = {}


def _key_of(kind, payload, args):
    if isinstance(payload, Fraction):
        payload = ("Q", payload.numerator, payload.denominator)
    elif isinstance(payload, float):
        payload = ("f", repr(payload))
    return (kind, payload, tuple(id(a) for a in args))


def _node(kind, payload, args):
    key = _key_of(kind, payload, args)
    node = _intern.get(key)
    if node is None:
        node = Expression(kind, payload, tuple(args))
        _intern[key] = node
    return node


def as_expr(v) -> Expression:
    if isinstance(v, Expression):
        return v
    if isinstance(v, (int, Fraction)):
        return num(v)
    if isinstance(v, float):
        return num(v)
    raise TypeError(f"cannot coerce {v!r} to Expression")


def num(v) -> Expression:
    if isinstance(v, bool):
        raise TypeError("bool is not a number")
    if isinstance(v, int):
        v = Fraction(v)
    if not isinstance(v, (Fraction, float)):
        raise TypeError(f"bad numeric payload {v!r}")
    return _node(NUM, v, ())


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)
HALF = num(Fraction(1, 2))


def sym(name: str) -> Expression:
    m = _FAMILY_RE.match(name)
    if m and m.group(1) in FAMILY_VARS:
        return fam(m.group(1), int(m.group(2)))
    return _node(SYM, name, ())


def fam(base: str, k: int) -> Expression:
    if base not in FAMILY_VARS:
        raise ValueError(f"unregistered symbol family {base!r}")
    return _node(FAM, (base, k, FAMILY_VARS[base]), ())


def name_of(e: Expression) -> str:
    """Printed name of a sym/fam leaf."""
    if e.kind == SYM:
        return e.payload
    if e.kind == FAM:
        return f"{e.payload[0]}_{e.payload[1]}"
    raise ValueError("not a symbol node")


def add(*terms) -> Expression:
    flat = []
    const = Fraction(0)
    for t in terms:
        t = as_expr(t)
        if t.kind == ADD:
            flat.extend(t.args)
        else:
            flat.append(t)
    rest = []
    for t in flat:
        if t.kind == NUM:
            const = const + t.payload
        else:
            rest.append(t)
    out = []
    if const != 0:
        out.append(num(const))
    out.extend(rest)
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return _node(ADD, None, out)


def neg(e) -> Expression:
    return mul(MINUS_ONE, as_expr(e))


def mul(*factors) -> Expression:
    flat = []
    coeff = Fraction(1)
    for f in factors:
        f = as_expr(f)
        if f.kind == MUL:
            flat.extend(f.args)
        else:
            flat.append(f)
    rest = []
    for f in flat:
        if f.kind == NUM:
            coeff = coeff * f.payload
        else:
            rest.append(f)
    if coeff == 0:
        return ZERO
    out = []
    if coeff != 1:
        out.append(num(coeff))
    out.extend(rest)
    if not out:
        return ONE
    if len(out) == 1:
        return out[0]
    return _node(MUL, None, out)


def div(a, b) -> Expression:
    a, b = as_expr(a), as_expr(b)
    if b.is_one_literal:
        return a
    if b.kind == NUM:
        if b.payload == 0:
            raise ZeroDivisionError("literal division by zero")
        if isinstance(b.payload, Fraction):
            return mul(num(Fraction(1) / b.payload), a)
        return mul(num(1.0 / b.payload), a)
    if a.is_zero_literal:
        return ZERO
    return _node(DIV, None, (a, b))


def _exact_root(fr: Fraction, root: int):
    """Integer `root`-th root of a Fraction, or None."""
    if fr < 0:
        return None

    def iroot(n):
        if n == 0:
            return 0
        r = round(n ** (1.0 / root))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** root == n:
                return c
        return None

    rn = iroot(fr.numerator)
    rd = iroot(fr.denominator)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def pow_(base, exponent) -> Expression:
    base, exponent = as_expr(base), as_expr(exponent)
    if exponent.kind == NUM and isinstance(exponent.payload, Fraction):
        e = exponent.payload
        if e == 0:
            return ONE
        if e == 1:
            return base
        if base.kind == NUM and isinstance(base.payload, Fraction):
            b = base.payload
            if e.denominator == 1:
                n = e.numerator
                if b == 0 and n < 0:
                    raise ZeroDivisionError("0 raised to a negative power")
                return num(b ** n)
            root = _exact_root(b, e.denominator)
            if root is not None:
                return num(root ** e.numerator)
        if base.is_zero_literal and e > 0:
            return ZERO
        if base.is_one_literal:
            return ONE
    return _node(POW, None, (base, exponent))


def sqrt(e) -> Expression:
    return pow_(as_expr(e), num(Fraction(1, 2)))


def exp(e) -> Expression:
    e = as_expr(e)
    if e.is_zero_literal:
        return ONE
    return _node(FUNC, "exp", (e,))


def log(e) -> Expression:
    e = as_expr(e)
    if e.is_one_literal:
        return ZERO
    return _node(FUNC, "log", (e,))


def antideriv(body, var: str) -> Expression:
    """Formal antiderivative in `var`; differentiating in `var` returns body."""
    return _node(INT, var, (as_expr(body),))


# ---------------------------------------------------------------------------
# differentiation

_dcache: dict = {}


def differentiate(e: Expression, var: str) -> Expression:
    key = (e, var)
    hit = _dcache.get(key)
    if hit is not None:
        return hit
    k = e.kind
    if k == NUM:
        d = ZERO
    elif k == SYM:
        d = ONE if e.payload == var else ZERO
    elif k == FAM:
        base, idx, fvar = e.payload
        d = fam(base, idx + 1) if fvar == var else ZERO
    elif k == ADD:
        d = add(*[differentiate(a, var) for a in e.args])
    elif k == MUL:
        terms = []
        for i, a in enumerate(e.args):
            da = differentiate(a, var)
            if da.is_zero_literal:
                continue
            terms.append(mul(*e.args[:i], da, *e.args[i + 1:]))
        d = add(*terms)
    elif k == DIV:
        a, b = e.args
        da, db = differentiate(a, var), differentiate(b, var)
        if db.is_zero_literal:
            d = div(da, b)
        else:
            d = div(add(mul(da, b), neg(mul(a, db))), pow_(b, 2))
    elif k == POW:
        b, x = e.args
        db, dx = differentiate(b, var), differentiate(x, var)
        if dx.is_zero_literal:
            d = mul(x, pow_(b, add(x, MINUS_ONE)), db)
        elif db.is_zero_literal:
            d = mul(e, log(b), dx)
        else:
            d = mul(e, add(mul(dx, log(b)), div(mul(x, db), b)))
    elif k == FUNC:
        (a,) = e.args
        da = differentiate(a, var)
        if e.payload == "exp":
            d = mul(e, da)
        elif e.payload == "log":
            d = div(da, a)
        else:  # pragma: no cover
            raise ExprError(f"no derivative rule for {e.payload}")
    elif k == INT:
        (body,) = e.args
        if e.payload == var:
            d = body
        else:
            d = antideriv(differentiate(body, var), e.payload)
    else:  # pragma: no cover
        raise ExprError(f"unknown node kind {k}")
    _dcache[key] = d
    return d


def diff_n(e: Expression, var: str, n: int) -> Expression:
    for _ in range(n):
        e = differentiate(e, var)
    return e


# ---------------------------------------------------------------------------
# substitution and symbol scans


def substitute(e: Expression, bindings: dict) -> Expression:
    """Simultaneous substitution.  Keys are printed symbol names."""
    repl = {k: as_expr(v) for k, v in bindings.items()}
    cache: dict = {}

    def go(n):
        hit = cache.get(n)
        if hit is not None:
            return hit
        k = n.kind
        if k in (SYM, FAM):
            out = repl.get(name_of(n), n)
        elif k == NUM:
            out = n
        elif k == ADD:
            out = add(*[go(a) for a in n.args])
        elif k == MUL:
            out = mul(*[go(a) for a in n.args])
        elif k == DIV:
            out = div(go(n.args[0]), go(n.args[1]))
        elif k == POW:
            out = pow_(go(n.args[0]), go(n.args[1]))
        elif k == FUNC:
            out = _node(FUNC, n.payload, (go(n.args[0]),))
        elif k == INT:
            out = antideriv(go(n.args[0]), n.payload)
        else:  # pragma: no cover
            raise ExprError(f"unknown node kind {k}")
        cache[n] = out
        return out

    return go(e)


def free_symbols(e: Expression) -> frozenset:
    """Printed names of all sym/fam leaves."""
    seen: dict = {}

    def go(n):
        hit = seen.get(n)
        if hit is not None:
            return hit
        if n.kind in (SYM, FAM):
            out = frozenset((name_of(n),))
        elif n.kind == NUM:
            out = frozenset()
        else:
            out = frozenset().union(*[go(a) for a in n.args])
        seen[n] = out
        return out

    return go(e)


def contains_antiderivative(e: Expression) -> bool:
    stack = [e]
    visited = set()
    while stack:
        n = stack.pop()
        if n in visited:
            continue
        visited.add(n)
        if n.kind == INT:
            return True
        stack.extend(n.args)
    return False


# ---------------------------------------------------------------------------
# numeric evaluation


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator)
    return mpmath.mpf(v)


def evaluate(e: Expression, bindings: dict, cache: dict | None = None):
    """Evaluate under the *current* mpmath precision; shared `cache` may be
    reused across expressions evaluated at the same point."""
    if cache is None:
        cache = {}
    stack = [e]
    while stack:
        n = stack[-1]
        if n in cache:
            stack.pop()
            continue
        k = n.kind
        if k == NUM:
            cache[n] = _to_mpf(n.payload)
            stack.pop()
            continue
        if k in (SYM, FAM):
            nm = name_of(n)
            if nm not in bindings:
                raise UnboundSymbolError(f"unbound symbol {nm!r}")
            cache[n] = _to_mpf(bindings[nm])
            stack.pop()
            continue
        if k == INT:
            raise AntiderivativeError(
                "formal antiderivative cannot be evaluated numerically")
        pending = [a for a in n.args if a not in cache]
        if pending:
            stack.extend(pending)
            continue
        vals = [cache[a] for a in n.args]
        if k == ADD:
            acc = vals[0]
            for v in vals[1:]:
                acc = acc + v
            cache[n] = acc
        elif k == MUL:
            acc = vals[0]
            for v in vals[1:]:
                acc = acc * v
            cache[n] = acc
        elif k == DIV:
            a, b = vals
            if abs(b) < DIV_FLOOR:
                raise DomainError("division by ~0")
            cache[n] = a / b
        elif k == POW:
            b, x = vals
            en = n.args[1]
            if en.kind == NUM and isinstance(en.payload, Fraction) \
                    and en.payload.denominator == 1:
                p = en.payload.numerator
                if b == 0 and p < 0:
                    raise DomainError("division by ~0")
                cache[n] = b ** p
            else:
                if b < 0:
                    raise DomainError(
                        "negative base under a non-integer power")
                if b == 0 and x <= 0:
                    raise DomainError("0 raised to a non-positive power")
                cache[n] = mpmath.power(b, x)
        elif k == FUNC:
            (a,) = vals
            if n.payload == "exp":
                cache[n] = mpmath.exp(a)
            else:
                if a <= 0:
                    raise DomainError("log of a non-positive value")
                cache[n] = mpmath.log(a)
        else:  # pragma: no cover
            raise ExprError(f"unknown node kind {k}")
        stack.pop()
    return cache[e]


def eval_numeric(e: Expression, point: dict, dps: int = DEFAULT_DPS):
    """Evaluate at a fully bound point with `dps` decimal digits."""
    with mpmath.workdps(dps):
        return evaluate(e, point)


def evaluate_exact(e: Expression, bindings: dict, cache: dict | None = None) -> Fraction:
    """Exact rational evaluation; raises EvalError on non-rational operations.

    Used for polynomial identities, where sampling at rational points decides
    the identity without floating error.
    """
    if cache is None:
        cache = {}

    def go(n):
        hit = cache.get(n)
        if hit is not None:
            return hit
        k = n.kind
        if k == NUM:
            if not isinstance(n.payload, Fraction):
                raise EvalError("float literal in exact evaluation")
            out = n.payload
        elif k in (SYM, FAM):
            nm = name_of(n)
            if nm not in bindings:
                raise UnboundSymbolError(f"unbound symbol {nm!r}")
            out = Fraction(bindings[nm])
        elif k == ADD:
            out = sum((go(a) for a in n.args), Fraction(0))
        elif k == MUL:
            out = Fraction(1)
            for a in n.args:
                out *= go(a)
        elif k == DIV:
            b = go(n.args[1])
            if b == 0:
                raise DomainError("division by zero")
            out = go(n.args[0]) / b
        elif k == POW:
            en = n.args[1]
            if not (en.kind == NUM and isinstance(en.payload, Fraction)
                    and en.payload.denominator == 1):
                raise EvalError("non-integer power in exact evaluation")
            p = en.payload.numerator
            b = go(n.args[0])
            if b == 0 and p < 0:
                raise DomainError("division by zero")
            out = b ** p
        elif k == INT:
            raise AntiderivativeError(
                "formal antiderivative cannot be evaluated")
        else:
            raise EvalError(f"{k} node in exact evaluation")
        cache[n] = out
        return out

    return go(e)


# ---------------------------------------------------------------------------
# printing

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_POW = 3
_PREC_ATOM = 4


def _is_negative_head(e: Expression) -> bool:
    if e.kind == NUM:
        return e.payload < 0
    if e.kind == MUL and e.args[0].kind == NUM:
        return e.args[0].payload < 0
    return False


def _negated(e: Expression) -> Expression:
    return neg(e)


def _frac_str(fr: Fraction):
    if fr.denominator == 1:
        return str(fr.numerator), _PREC_ATOM if fr >= 0 else _PREC_ADD
    return f"{fr.numerator}/{fr.denominator}", _PREC_MUL if fr >= 0 else _PREC_ADD


def _render(e: Expression):
    """Return (text, precedence of the outermost operator)."""
    k = e.kind
    if k == NUM:
        if isinstance(e.payload, Fraction):
            return _frac_str(e.payload)
        return repr(e.payload), _PREC_ATOM if e.payload >= 0 else _PREC_ADD
    if k in (SYM, FAM):
        return name_of(e), _PREC_ATOM
    if k == ADD:
        parts = []
        for i, t in enumerate(e.args):
            if i > 0 and _is_negative_head(t):
                txt, p = _render(_negated(t))
                parts.append(" - " + (f"({txt})" if p < _PREC_MUL else txt))
            else:
                txt, p = _render(t)
                if i == 0:
                    parts.append(f"({txt})" if p < _PREC_ADD else txt)
                else:
                    parts.append(" + " + (f"({txt})" if p <= _PREC_ADD else txt))
        return "".join(parts), _PREC_ADD
    if k == MUL:
        args = e.args
        prefix = ""
        if args[0].kind == NUM and args[0].payload == -1 and len(args) > 1:
            prefix = "-"
            args = args[1:]
        parts = []
        for a in args:
            txt, p = _render(a)
            need = p < _PREC_MUL or a.kind == DIV
            parts.append(f"({txt})" if need else txt)
        return prefix + "*".join(parts), _PREC_ADD if prefix else _PREC_MUL
    if k == DIV:
        a, b = e.args
        ta, pa = _render(a)
        if pa < _PREC_MUL:
            ta = f"({ta})"
        tb, pb = _render(b)
        if pb <= _PREC_MUL:
            tb = f"({tb})"
        return f"{ta}/{tb}", _PREC_MUL
    if k == POW:
        b, x = e.args
        if x.kind == NUM and x.payload == Fraction(1, 2):
            tb, _ = _render(b)
            return f"sqrt({tb})", _PREC_ATOM
        tb, pb = _render(b)
        if pb < _PREC_ATOM:
            tb = f"({tb})"
        tx, px = _render(x)
        exp_atom = (x.kind == NUM and isinstance(x.payload, Fraction)
                    and x.payload.denominator == 1 and x.payload >= 0) \
            or x.kind in (SYM, FAM)
        if not exp_atom:
            tx = f"({tx})"
        return f"{tb}^{tx}", _PREC_POW
    if k == FUNC:
        ta, _ = _render(e.args[0])
        return f"{e.payload}({ta})", _PREC_ATOM
    if k == INT:
        tb, _ = _render(e.args[0])
        return f"Int({tb}, {e.payload})", _PREC_ATOM
    raise ExprError(f"unknown node kind {k}")  # pragma: no cover


def to_str(e: Expression) -> str:
    return _render(e)[0]


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+(\.\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_FUNCTIONS = {"sqrt": 1, "exp": 1, "log": 1, "Int": 2}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed):
        self.tokens = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val!r}", pos)

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {val!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if val == "+":
                self.next()
                e = add(e, self.term())
            elif val == "-":
                self.next()
                e = add(e, neg(self.term()))
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if val == "*":
                self.next()
                e = mul(e, self.unary())
            elif val == "/":
                self.next()
                e = div(e, self.unary())
            else:
                return e

    def unary(self):
        kind, val, _ = self.peek()
        if val == "-":
            self.next()
            return neg(self.unary())
        if val == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if val == "^":
            self.next()
            return pow_(base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.next()
        if kind == "number":
            if "." in val:
                return num(Fraction(val))
            return num(int(val))
        if kind == "ident":
            nkind, nval, _ = self.peek()
            if nval == "(":
                if val not in _FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", pos)
                self.next()
                if val == "Int":
                    body = self.expr()
                    self.expect(",")
                    vkind, vval, vpos = self.next()
                    if vkind != "ident":
                        raise ParseError("Int needs a variable name", vpos)
                    self.expect(")")
                    return antideriv(body, vval)
                arg = self.expr()
                self.expect(")")
                return {"sqrt": sqrt, "exp": exp, "log": log}[val](arg)
            m = _FAMILY_RE.match(val)
            is_family = bool(m and m.group(1) in FAMILY_VARS)
            if self.allowed is not None and not is_family \
                    and val not in self.allowed:
                raise ParseError(f"unknown identifier {val!r}", pos)
            return sym(val)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {val!r}", pos)


def parse(text: str, allowed=None) -> Expression:
    """Parse a formula string.

    `allowed`, when given, is the set of acceptable symbol names; indexed
    family symbols (w_0, w_1, ...) are always accepted.
    """
    return _Parser(text, allowed).parse()
