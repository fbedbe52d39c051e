import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from odegeom import expr as ex
from odegeom.config import RunConfig
from odegeom.zerotest import DomainBox, auto_box, box, is_zero, unit_box


x, y, p, q = ex.sym("x"), ex.sym("y"), ex.sym("p"), ex.sym("q")


def central_diff(e, var, point, h=1e-10, dps=40):
    """Independent derivative oracle: central finite difference at high
    working precision."""
    with mpmath.workdps(dps):
        up = dict(point)
        dn = dict(point)
        up[var] = point[var] + h
        dn[var] = point[var] - h
        return (ex.evaluate(e, up) - ex.evaluate(e, dn)) / (2 * h)


# --- construction and normalization -------------------------------------

def test_hash_consing_gives_identity_equality():
    a = ex.parse("q^2 + x*y")
    b = ex.parse("q^2 + x*y")
    assert a is b


def test_parse_power_tree():
    e = ex.parse("q^2")
    assert e.kind == ex.POW
    assert e.args[0] is q
    assert e.args[1].payload == 2


def test_parse_rational_and_decimal():
    assert ex.parse("3/2").payload == Fraction(3, 2)
    assert ex.parse("0.25").payload == Fraction(1, 4)


def test_constant_folding():
    assert ex.parse("2 + 3*4").payload == 14
    assert ex.parse("2^10").payload == 1024
    assert ex.parse("4^(1/2)").payload == 2
    assert ex.parse("0*q + 1*p") is p


def test_family_symbols_parse_and_shift():
    w2 = ex.parse("w_2^2")
    d = ex.differentiate(w2, "t")
    assert d is ex.parse("2*w_2*w_3")


def test_antiderivative_node_rules():
    body = ex.parse("w_2^2")
    node = ex.antideriv(body, "t")
    assert ex.differentiate(node, "t") is body
    # differentiation in an unrelated variable passes under the integral sign
    other = ex.differentiate(node, "x")
    assert other.kind == ex.INT and other.args[0].is_zero_literal
    with pytest.raises(ex.AntiderivativeError):
        ex.eval_numeric(node, {"t": 1.0, "w_2": 1.0})


def test_unknown_function_and_identifier_errors():
    with pytest.raises(ex.ParseError):
        ex.parse("foo(x)")
    with pytest.raises(ex.ParseError):
        ex.parse("x + zz", allowed={"x"})
    with pytest.raises(ex.ParseError):
        ex.parse("x + * y")
    # family symbols stay available under a restricted symbol set
    ex.parse("w_3 + x", allowed={"x"})


# --- printing round trip --------------------------------------------------

CATALOG_STRINGS = [
    "q^2",
    "q^(3/2)",
    "(2*q*y - p^2)^(3/2)/y^2",
    "(p*q*(-12 + 3*p*q - 8*sqrt(1 - p*q)) + 8*(1 + sqrt(1 - p*q)))/p^3",
    "alpha*(q^2 + (1 - p^2)^2)^(3/2)/(1 - p^2)^(3/2) - 3*p*q^2/(1 - p^2) - p*(1 - p^2)",
    "sqrt(2*x)",
    "1/3*q^3",
    "exp(q)",
    "q^(5/2)",
    "w_2^2",
    "Int(t^(1/2)*w_2^2, t)",
    "2*t^(3/2)*w_2^2 - 2*t^(1/2)*w_1*w_2 + Int(t^(1/2)*w_2^2, t)",
    "-x + y - 2/27*q^3",
    "log(1 + x^2)",
]


@pytest.mark.parametrize("text", CATALOG_STRINGS)
def test_round_trip(text):
    e = ex.parse(text)
    assert ex.parse(ex.to_str(e)) is e


@st.composite
def small_exprs(draw, depth=0):
    if depth > 3 or draw(st.booleans()):
        leaf = draw(st.sampled_from([x, y, p, q, ex.num(2), ex.num(Fraction(1, 3)),
                                     ex.num(-1), ex.num(5)]))
        return leaf
    op = draw(st.sampled_from(["add", "mul", "pow", "div", "exp"]))
    a = draw(small_exprs(depth=depth + 1))
    if op == "add":
        b = draw(small_exprs(depth=depth + 1))
        return ex.add(a, b)
    if op == "mul":
        b = draw(small_exprs(depth=depth + 1))
        return ex.mul(a, b)
    if op == "div":
        b = draw(small_exprs(depth=depth + 1))
        try:
            return ex.div(a, b)
        except ZeroDivisionError:
            return a
    if op == "pow":
        k = draw(st.integers(min_value=0, max_value=3))
        return ex.pow_(a, ex.num(k))
    return ex.exp(ex.mul(ex.num(Fraction(1, 7)), a))


@given(small_exprs())
@settings(max_examples=200, deadline=None)
def test_round_trip_random(e):
    assert ex.parse(ex.to_str(e)) is e


# --- differentiation ------------------------------------------------------

def test_power_rule_fractional():
    d = ex.differentiate(ex.parse("q^(3/2)"), "q")
    assert d is ex.parse("3/2*q^(1/2)")


def test_derivative_vs_finite_difference_catalog():
    fdkp = ex.parse(CATALOG_STRINGS[3])
    d = ex.differentiate(fdkp, "q")
    pt = {"p": 1.0, "q": 0.5}
    got = ex.eval_numeric(d, pt, dps=40)
    want = central_diff(fdkp, "q", pt)
    assert abs(got - want) <= 1e-6 * (1 + abs(want))


ELEMENTARY = [
    ex.parse("sqrt(1 + x^2)"),
    ex.exp(ex.mul(x, y)),
    ex.log(ex.parse("2 + x^2 + y^2")),
    ex.pow_(ex.parse("1 + x^2"), ex.parse("1/3")),
    ex.parse("x^y"),
    ex.div(x, ex.parse("1 + y^2")),
]


@pytest.mark.parametrize("e", ELEMENTARY)
def test_elementary_derivatives_match_finite_differences(e):
    import random
    rng = random.Random(7)
    for _ in range(20):
        pt = {"x": rng.uniform(0.2, 1.5), "y": rng.uniform(0.2, 1.5)}
        for var in ("x", "y"):
            got = ex.eval_numeric(ex.differentiate(e, var), pt, dps=40)
            want = central_diff(e, var, pt)
            assert abs(got - want) <= 1e-6 * (1 + abs(want))


@given(small_exprs(), small_exprs())
@settings(max_examples=60, deadline=None)
def test_leibniz_rule_as_identity(a, b):
    lhs = ex.differentiate(ex.mul(a, b), "x")
    rhs = ex.add(ex.mul(ex.differentiate(a, "x"), b),
                 ex.mul(a, ex.differentiate(b, "x")))
    residual = ex.add(lhs, ex.neg(rhs))
    bx = auto_box(ex.add(residual, x, y, p, q), default=(0.25, 1.25))
    cfg = RunConfig(samples=6, tol=1e-20, dps=40)
    try:
        assert is_zero(residual, bx, cfg).is_zero
    except Exception as err:
        from odegeom.zerotest import BoxError
        if not isinstance(err, BoxError):
            raise


@given(small_exprs(), small_exprs())
@settings(max_examples=60, deadline=None)
def test_derivative_linearity(a, b):
    lhs = ex.differentiate(ex.add(a, ex.mul(ex.num(3), b)), "y")
    rhs = ex.add(ex.differentiate(a, "y"),
                 ex.mul(ex.num(3), ex.differentiate(b, "y")))
    residual = ex.add(lhs, ex.neg(rhs))
    bx = auto_box(ex.add(residual, x, y, p, q), default=(0.25, 1.25))
    cfg = RunConfig(samples=6, tol=1e-20, dps=40)
    try:
        assert is_zero(residual, bx, cfg).is_zero
    except Exception as err:
        from odegeom.zerotest import BoxError
        if not isinstance(err, BoxError):
            raise


# --- substitution ---------------------------------------------------------

def test_substitute_simple():
    e = ex.mul(q, p)
    assert ex.substitute(e, {"q": ex.num(0)}).is_zero_literal


def test_substitute_polynomial_instance():
    t = ex.sym("t")
    e = ex.parse("w_0 + t*w_1 + w_2^2 + w_3")
    out = ex.substitute(e, {"w_0": ex.parse("t^2"), "w_1": ex.parse("2*t"),
                            "w_2": ex.num(2), "w_3": ex.num(0)})
    assert out is ex.parse("4 + t^2 + 2*t*t")
    assert ex.evaluate_exact(out, {"t": 3}) == 31


# --- numeric evaluation ---------------------------------------------------

def test_eval_basic():
    assert ex.eval_numeric(ex.parse("q^(3/2)"), {"q": 4}) == 8


def test_eval_dkp_f_hand_value():
    f = ex.parse(CATALOG_STRINGS[3])
    v = ex.eval_numeric(f, {"p": 1, "q": 0})
    assert abs(v - 16) < 1e-25


def test_eval_domain_errors():
    with pytest.raises(ex.DomainError):
        ex.eval_numeric(ex.sqrt(q), {"q": -1})
    with pytest.raises(ex.DomainError):
        ex.eval_numeric(ex.div(x, y), {"x": 1, "y": 0})
    with pytest.raises(ex.UnboundSymbolError):
        ex.eval_numeric(ex.add(x, y), {"x": 1})


def test_exact_evaluation():
    e = ex.parse("(x + y)^3/(1 + x)")
    v = ex.evaluate_exact(e, {"x": Fraction(1, 2), "y": Fraction(1, 3)})
    assert v == Fraction(1, 2 + 1) * 2 * (Fraction(5, 6)) ** 3


# --- zero testing ---------------------------------------------------------

def test_is_zero_literal():
    v = is_zero(ex.num(0), unit_box(["q"]))
    assert v.is_zero


def test_is_zero_identity_with_radicals():
    e = ex.parse("(sqrt(q))^2 - q")
    v = is_zero(e, box(q=(0.1, 10.0)))
    assert v.is_zero


def test_is_zero_nonzero_witness_reproduces():
    e = ex.parse("-2/27*q^3")
    v = is_zero(e, box(q=(0.5, 2.0)))
    assert not v.is_zero
    again = ex.eval_numeric(e, v.witness_point)
    assert abs(float(again) - v.witness_value) <= 1e-12 * (1 + abs(v.witness_value))


def test_is_zero_seed_deterministic_and_tol_monotone():
    e = ex.parse("q^3*1e-0") if False else ex.parse("q^3")
    e = ex.mul(ex.num(Fraction(1, 10 ** 12)), e)
    bx = box(q=(0.5, 1.0))
    v1 = is_zero(e, bx, seed=3)
    v2 = is_zero(e, bx, seed=3)
    assert v1.max_ratio == v2.max_ratio
    loose = is_zero(e, bx, tol=1e-6)
    tight = is_zero(e, bx, tol=1e-30)
    assert loose.is_zero and not tight.is_zero


def test_box_unusable_error():
    from odegeom.zerotest import BoxError
    e = ex.sqrt(q)
    with pytest.raises(BoxError):
        is_zero(e, box(q=(-10.0, -1.0)))


def test_guard_rejection():
    e = ex.parse("sqrt(1 - p*q) - sqrt(1 - p*q)")
    bx = auto_box(e, ranges={"p": (0.0, 1.5), "q": (0.0, 1.5)})
    # guard keeps 1 - p*q positive even though the raw box allows p*q > 1
    v = is_zero(e, bx)
    assert v.is_zero
