"""Exact algebraic verification of the flat coframe systems and the three
matrix connections: structure constants, Jacobi, Killing inertia, commutator
closure, invariant bilinear forms, and the stabilized 3-form in dimension 7.

All arithmetic is exact over Q(sqrt 3) (the 7x7 connection carries sqrt-3
entries).  Floating point appears only as a cross-check on inertia
computations, which are themselves done by exact congruence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction


class Q3:
    """a + b*sqrt(3) with exact rational a, b."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        return f"({self.a} + {self.b}*sqrt3)"

    def __eq__(self, other):
        other = q3(other)
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __add__(self, other):
        other = q3(other)
        return Q3(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return Q3(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-q3(other))

    def __rsub__(self, other):
        return q3(other) + (-self)

    def __mul__(self, other):
        other = q3(other)
        return Q3(self.a * other.a + 3 * self.b * other.b,
                  self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def inverse(self):
        den = self.a * self.a - 3 * self.b * self.b
        if den == 0:
            if self.a == 0 and self.b == 0:
                raise ZeroDivisionError("inverse of zero")
            raise ZeroDivisionError("norm vanishes (impossible for sqrt 3)")
        return Q3(self.a / den, -self.b / den)

    def __truediv__(self, other):
        return self * q3(other).inverse()

    def __rtruediv__(self, other):
        return q3(other) * self.inverse()

    @property
    def is_zero(self):
        return self.a == 0 and self.b == 0

    def sign(self):
        """Exact sign of a + b*sqrt(3)."""
        if self.a == 0 and self.b == 0:
            return 0
        if self.a >= 0 and self.b >= 0:
            return 1
        if self.a <= 0 and self.b <= 0:
            return -1
        # opposite signs: compare a^2 with 3 b^2 on the dominant part
        if self.a > 0:  # b < 0
            return 1 if self.a * self.a > 3 * self.b * self.b else -1
        return -1 if self.a * self.a > 3 * self.b * self.b else 1

    def __float__(self):
        return float(self.a) + float(self.b) * 3 ** 0.5


def q3(v) -> Q3:
    if isinstance(v, Q3):
        return v
    return Q3(v)


SQRT3 = Q3(0, 1)
INV_SQRT3 = Q3(0, Fraction(1, 3))  # 1/sqrt(3) = sqrt(3)/3


# ---------------------------------------------------------------------------
# exact dense linear algebra over Q3


def mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[sum((A[i][l] * B[l][j] for l in range(k)), Q3())
             for j in range(m)] for i in range(n)]


def mat_sub(A, B):
    return [[A[i][j] - B[i][j] for j in range(len(A[0]))]
            for i in range(len(A))]


def commutator(A, B):
    return mat_sub(mat_mul(A, B), mat_mul(B, A))


def mat_is_zero(A):
    return all(c.is_zero for row in A for c in row)


def rref(M):
    """Reduced row echelon form; returns (matrix, pivot column list)."""
    M = [row[:] for row in M]
    rows, cols = len(M), len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if not M[i][c].is_zero:
                pivot = i
                break
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = M[r][c].inverse()
        M[r] = [v * inv for v in M[r]]
        for i in range(rows):
            if i != r and not M[i][c].is_zero:
                f = M[i][c]
                M[i] = [M[i][j] - f * M[r][j] for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def nullspace(M):
    """Basis of the right nullspace (list of Q3 vectors)."""
    if not M:
        return []
    R, pivots = rref(M)
    cols = len(M[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Q3() for _ in range(cols)]
        v[fc] = Q3(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][fc]
        basis.append(v)
    return basis


def solve_in_span(basis_vectors, target):
    """Coefficients expressing target in the span, or None."""
    cols = len(basis_vectors)
    rows = len(target)
    M = [[basis_vectors[j][i] for j in range(cols)] + [target[i]]
         for i in range(rows)]
    R, pivots = rref(M)
    if cols in pivots:
        return None
    coeffs = [Q3() for _ in range(cols)]
    for r, pc in enumerate(pivots):
        coeffs[pc] = R[r][cols]
    return coeffs


def symmetric_inertia(M):
    """Exact inertia (pos, neg, zero) of a symmetric Q3 matrix by congruence
    reduction (Sylvester's law)."""
    n = len(M)
    M = [row[:] for row in M]
    pos = neg = zero = 0
    idx = list(range(n))
    while idx:
        # prefer a nonzero diagonal pivot
        pivot = next((i for i in idx if not M[i][i].is_zero), None)
        if pivot is None:
            off = next(((i, j) for i in idx for j in idx
                        if i < j and not M[i][j].is_zero), None)
            if off is None:
                zero += len(idx)
                break
            i, j = off
            # hyperbolic pair: x_i -> x_i + x_j turns the block definite
            for k in range(n):
                M[i][k] = M[i][k] + M[j][k]
            for k in range(n):
                M[k][i] = M[k][i] + M[k][j]
            pivot = i
        d = M[pivot][pivot]
        (pos, neg) = (pos + 1, neg) if d.sign() > 0 else (pos, neg + 1)
        idx.remove(pivot)
        for i in idx:
            if M[i][pivot].is_zero:
                continue
            f = M[i][pivot] / d
            for k in range(n):
                M[i][k] = M[i][k] - f * M[pivot][k]
            for k in range(n):
                M[k][i] = M[k][i] - f * M[k][pivot]
    return pos, neg, zero


# ---------------------------------------------------------------------------
# structure constant tables


@dataclass
class StructureConstantTable:
    """c[k][(i, j)] with i < j; antisymmetry in (i, j) is implicit."""
    dim: int
    labels: tuple
    c: dict  # (k, i, j) -> Q3, stored for i < j only

    def bracket_coeff(self, k, i, j) -> Q3:
        if i == j:
            return Q3()
        if i < j:
            return self.c.get((k, i, j), Q3())
        return -self.c.get((k, j, i), Q3())

    def items(self):
        return self.c.items()


# Flat structure equations, written as d(gen_k) = sum coeff * gen_i ^ gen_j.
# Generators are listed first; each row of the table is
# (k, [(coeff, i, j), ...]) with indices into the generator list.

_POINT_LABELS = ("theta1", "theta2", "theta3", "theta4",
                 "Omega1", "Omega2", "Omega3")
_POINT_SYSTEM = {
    0: [(1, 4, 0), (1, 3, 1)],
    1: [(1, 5, 1), (1, 6, 0), (1, 3, 2)],
    2: [(2, 5, 2), (-1, 4, 2), (1, 6, 1)],
    3: [(1, 4, 3), (-1, 5, 3)],
    4: [(-1, 6, 3)],
    5: [],
    6: [(1, 5, 6), (-1, 4, 6)],
}

_G2_LABELS = ("theta1", "theta2", "theta3", "theta4", "theta5",
              "Omega1", "Omega2", "Omega3", "Omega4", "Omega5",
              "Omega6", "Omega7", "Omega8", "Omega9")
_F43 = Fraction(4, 3)
_F13 = Fraction(1, 3)
_F23 = Fraction(2, 3)
_G2_SYSTEM = {
    0: [(2, 0, 5), (1, 0, 8), (1, 1, 6), (1, 2, 3)],
    1: [(1, 0, 7), (1, 1, 5), (2, 1, 8), (1, 2, 4)],
    2: [(1, 0, 9), (1, 1, 10), (1, 2, 5), (1, 2, 8), (1, 3, 4)],
    3: [(1, 0, 11), (_F43, 2, 10), (1, 3, 5), (1, 4, 6)],
    4: [(1, 1, 11), (-_F43, 2, 9), (1, 3, 7), (1, 4, 8)],
    5: [(1, 7, 6), (_F13, 2, 11), (-_F23, 3, 9), (_F13, 4, 10), (1, 0, 12)],
    6: [(1, 6, 5), (-1, 6, 8), (-1, 3, 10), (1, 0, 13)],
    7: [(1, 7, 8), (-1, 7, 5), (-1, 4, 9), (1, 1, 12)],
    8: [(1, 6, 7), (_F13, 2, 11), (_F13, 3, 9), (-_F23, 4, 10), (1, 1, 13)],
    9: [(1, 5, 9), (1, 7, 10), (-1, 4, 11), (1, 2, 12)],
    10: [(1, 6, 9), (1, 8, 10), (1, 3, 11), (1, 2, 13)],
    11: [(_F43, 9, 10), (1, 5, 11), (1, 8, 11), (1, 3, 12), (1, 4, 13)],
    12: [(1, 9, 11), (2, 5, 12), (1, 8, 12), (1, 7, 13)],
    13: [(1, 10, 11), (1, 5, 13), (2, 8, 13), (1, 6, 12)],
}

_SYSTEMS = {
    "syspoint": (_POINT_LABELS, _POINT_SYSTEM),
    "sycart-syspp": (_G2_LABELS, _G2_SYSTEM),
}


def _two_form_of(system, k, dim):
    """dict (i<j) -> Q3 coefficient of gen_i ^ gen_j in d(gen_k)."""
    out = {}
    for coeff, i, j in system[k]:
        if i < j:
            key, val = (i, j), q3(coeff)
        else:
            key, val = (j, i), -q3(coeff)
        out[key] = out.get(key, Q3()) + val
    return {k2: v for k2, v in out.items() if not v.is_zero}


def flat_structure_constants(system_name: str) -> StructureConstantTable:
    """Read the bracket constants off d(gen_k) = sum f^k_ij gen_i ^ gen_j,
    using d(gen_k) = -(1/2) c^k_ij gen_i ^ gen_j, i.e. c^k_ij = -f^k_ij."""
    labels, system = _SYSTEMS[system_name]
    dim = len(labels)
    c = {}
    for k in range(dim):
        for (i, j), f in _two_form_of(system, k, dim).items():
            c[(k, i, j)] = -f
    return StructureConstantTable(dim, labels, c)


def jacobi_check(t: StructureConstantTable):
    """Exact cyclic Jacobi sum; returns (ok, violations)."""
    n = t.dim
    bad = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for m in range(n):
                    total = Q3()
                    for l in range(n):
                        total = total + t.bracket_coeff(m, i, l) * t.bracket_coeff(l, j, k)
                        total = total + t.bracket_coeff(m, j, l) * t.bracket_coeff(l, k, i)
                        total = total + t.bracket_coeff(m, k, l) * t.bracket_coeff(l, i, j)
                    if not total.is_zero:
                        bad.append((i, j, k, m))
    return not bad, bad


def killing_form(t: StructureConstantTable):
    n = t.dim
    K = [[Q3() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            total = Q3()
            for a in range(n):
                for b in range(n):
                    total = total + t.bracket_coeff(a, i, b) * t.bracket_coeff(b, j, a)
            K[i][j] = total
    return K


def killing_analysis(t: StructureConstantTable) -> dict:
    K = killing_form(t)
    pos, neg, zero = symmetric_inertia(K)
    return {"nondegenerate": zero == 0, "signature": (pos, neg, zero)}


def exterior_square_check(system_name: str):
    """Second, independent route to Jacobi: apply the structure equations
    twice, as a derivation on the free exterior algebra of the generators,
    and check that every d(d(gen_k)) collapses to zero."""
    labels, system = _SYSTEMS[system_name]
    n = len(labels)
    d1 = {k: _two_form_of(system, k, n) for k in range(n)}
    bad = []
    for k in range(n):
        acc: dict = {}
        for (i, j), f in d1[k].items():
            # d(f e_i ^ e_j) = f (de_i ^ e_j - e_i ^ de_j)
            for (a, b), g in d1[i].items():
                _add_three_form(acc, (a, b, j), f * g)
            for (a, b), g in d1[j].items():
                _add_three_form(acc, (a, b, i), -(f * g))
        if any(not v.is_zero for v in acc.values()):
            bad.append((k, {kk: vv for kk, vv in acc.items()
                            if not vv.is_zero}))
    return not bad, bad


def _add_three_form(acc, idx, coeff):
    a, b, c = idx
    if a == b or a == c or b == c:
        return
    order = list(idx)
    swaps = 0
    for i in range(3):
        m = order.index(min(order[i:]), i)
        if m != i:
            order[i], order[m] = order[m], order[i]
            swaps += 1
    if swaps % 2:
        coeff = -coeff
    key = tuple(sorted(idx))
    acc[key] = acc.get(key, Q3()) + coeff


# ---------------------------------------------------------------------------
# matrix connections


def _entry(*terms):
    """terms: (coeff, generator index); coeff exact (int/Fraction/Q3)."""
    return tuple((q3(c), g) for c, g in terms)


_S = INV_SQRT3          # 1/sqrt(3)
_U = SQRT3 * Fraction(2, 3)  # 2/sqrt(3)

# 5x5 connection of the point system: generators _POINT_LABELS
_CONPOINT = {
    (0, 0): _entry((1, 5)),
    (1, 0): _entry((1, 0)), (1, 1): _entry((1, 5), (-1, 4)),
    (1, 2): _entry((-1, 3)),
    (2, 0): _entry((1, 1)), (2, 1): _entry((-1, 6)), (2, 3): _entry((-1, 3)),
    (3, 0): _entry((1, 2)), (3, 2): _entry((-1, 6)),
    (3, 3): _entry((1, 4), (-1, 5)),
    (4, 1): _entry((1, 2)), (4, 2): _entry((-1, 1)), (4, 3): _entry((1, 0)),
    (4, 4): _entry((-1, 5)),
}

# flat specialization of the 8x8 normal connection: generators _POINT_LABELS
_H = Fraction(1, 2)
_Q = Fraction(1, 4)
_CALN = {
    (0, 0): _entry((_H, 5)), (0, 1): _entry((_Q, 4), (-_Q, 5)),
    (0, 2): _entry((-_Q, 3)), (0, 3): _entry((_Q, 6)),
    (1, 0): _entry((1, 4), (-1, 5)), (1, 1): _entry((_H, 5)),
    (1, 2): _entry((_H, 3)), (1, 3): _entry((_H, 6)),
    (2, 0): _entry((-1, 6)), (2, 1): _entry((_H, 6)), (2, 2): _entry((_H, 4)),
    (3, 0): _entry((1, 3)), (3, 1): _entry((_H, 3)),
    (3, 3): _entry((-_H, 4), (1, 5)),
    (4, 0): _entry((1, 1)), (4, 2): _entry((-_H, 0)), (4, 3): _entry((_H, 2)),
    (4, 4): _entry((-_H, 5)), (4, 5): _entry((-_H, 6)),
    (4, 6): _entry((-_H, 3)), (4, 7): _entry((_Q, 4), (-_Q, 5)),
    (5, 0): _entry((1, 0)), (5, 1): _entry((_H, 0)), (5, 3): _entry((_H, 1)),
    (5, 4): _entry((-_H, 3)), (5, 5): _entry((-_H, 4)),
    (5, 7): _entry((-_Q, 3)),
    (6, 0): _entry((1, 2)), (6, 1): _entry((-_H, 2)), (6, 2): _entry((-_H, 1)),
    (6, 4): _entry((-_H, 6)), (6, 6): _entry((_H, 4), (-1, 5)),
    (6, 7): _entry((_Q, 6)),
    (7, 1): _entry((1, 1)), (7, 2): _entry((1, 0)), (7, 3): _entry((1, 2)),
    (7, 4): _entry((1, 4), (-1, 5)), (7, 5): _entry((-1, 6)),
    (7, 6): _entry((1, 3)), (7, 7): _entry((-_H, 5)),
}

# 7x7 exceptional connection: generators _G2_LABELS
_T = Fraction(1, 3)
_CCG2 = {
    (0, 0): _entry((-1, 5), (-1, 8)), (0, 1): _entry((-1, 12)),
    (0, 2): _entry((-1, 13)), (0, 3): _entry((-_S, 11)),
    (0, 4): _entry((_T, 9)), (0, 5): _entry((_T, 10)),
    (1, 0): _entry((1, 0)), (1, 1): _entry((1, 5)), (1, 2): _entry((1, 6)),
    (1, 3): _entry((_S, 3)), (1, 4): _entry((-_T, 2)),
    (1, 6): _entry((_T, 10)),
    (2, 0): _entry((1, 1)), (2, 1): _entry((1, 7)), (2, 2): _entry((1, 8)),
    (2, 3): _entry((_S, 4)), (2, 5): _entry((-_T, 2)),
    (2, 6): _entry((-_T, 9)),
    (3, 0): _entry((_U, 2)), (3, 1): _entry((_U, 9)), (3, 2): _entry((_U, 10)),
    (3, 4): _entry((_S, 4)), (3, 5): _entry((-_S, 3)),
    (3, 6): _entry((-_S, 11)),
    (4, 0): _entry((1, 3)), (4, 1): _entry((1, 11)), (4, 3): _entry((_U, 10)),
    (4, 4): _entry((-1, 8)), (4, 5): _entry((1, 6)), (4, 6): _entry((1, 13)),
    (5, 0): _entry((1, 4)), (5, 2): _entry((1, 11)), (5, 3): _entry((-_U, 9)),
    (5, 4): _entry((1, 7)), (5, 5): _entry((-1, 5)), (5, 6): _entry((-1, 12)),
    (6, 1): _entry((1, 4)), (6, 2): _entry((-1, 3)), (6, 3): _entry((_U, 2)),
    (6, 4): _entry((-1, 1)), (6, 5): _entry((1, 0)),
    (6, 6): _entry((1, 5), (1, 8)),
}

_CONNECTIONS = {
    "conpoint": (_CONPOINT, 5, _POINT_LABELS),
    "caln": (_CALN, 8, _POINT_LABELS),
    "ccg2": (_CCG2, 7, _G2_LABELS),
}


@dataclass
class MatrixBasis:
    name: str
    labels: tuple
    matrices: list  # one square Q3 matrix per generator

    @property
    def dim(self):
        return len(self.matrices)

    @property
    def size(self):
        return len(self.matrices[0])


def matrix_rep(connection: str) -> MatrixBasis:
    """Generator matrices: set one coframe form to 1 and the rest to 0."""
    table, size, labels = _CONNECTIONS[connection]
    mats = []
    for g in range(len(labels)):
        M = [[Q3() for _ in range(size)] for _ in range(size)]
        for (i, j), terms in table.items():
            for coeff, gen in terms:
                if gen == g:
                    M[i][j] = M[i][j] + coeff
        mats.append(M)
    basis = MatrixBasis(connection, labels, mats)
    _check_linear_independence(basis)
    return basis


def _flatten(M):
    return [c for row in M for c in row]


def _check_linear_independence(basis: MatrixBasis):
    vecs = [_flatten(M) for M in basis.matrices]
    M = [[vecs[j][i] for j in range(len(vecs))] for i in range(len(vecs[0]))]
    _, pivots = rref(M)
    if len(pivots) != len(vecs):
        raise ValueError(f"{basis.name}: generator matrices are dependent")


def commutator_closure_check(basis: MatrixBasis) -> dict:
    """Each pairwise commutator must lie in the span; returns the induced
    structure constants on success."""
    vecs = [_flatten(M) for M in basis.matrices]
    n = len(vecs)
    induced = {}
    for i in range(n):
        for j in range(i + 1, n):
            target = _flatten(commutator(basis.matrices[i], basis.matrices[j]))
            coeffs = solve_in_span(vecs, target)
            if coeffs is None:
                return {"closed": False, "failure": (i, j), "constants": None}
            for k, c in enumerate(coeffs):
                if not c.is_zero:
                    induced[(k, i, j)] = c
    table = StructureConstantTable(n, basis.labels, induced)
    return {"closed": True, "constants": table}


def tables_equal(a: StructureConstantTable, b: StructureConstantTable) -> bool:
    if a.dim != b.dim:
        return False
    keys = set(a.c) | set(b.c)
    return all(a.bracket_coeff(*k) == b.bracket_coeff(*k) for k in keys)


def invariant_bilinear_form(basis: MatrixBasis) -> dict:
    """Solve X^T B + B X = 0 over symmetric B for every generator X."""
    m = basis.size
    unknowns = [(i, j) for i in range(m) for j in range(i, m)]
    index = {k: i for i, k in enumerate(unknowns)}

    def b_entry(B, i, j):
        return B[index[(i, j)] if i <= j else index[(j, i)]]

    rows = []
    for X in basis.matrices:
        for r in range(m):
            for c in range(m):
                row = [Q3() for _ in unknowns]
                # (X^T B + B X)_{rc} = sum_k X_{kr} B_{kc} + B_{rk} X_{kc}
                for k in range(m):
                    if not X[k][r].is_zero:
                        key = (k, c) if k <= c else (c, k)
                        row[index[key]] = row[index[key]] + X[k][r]
                    if not X[k][c].is_zero:
                        key = (r, k) if r <= k else (k, r)
                        row[index[key]] = row[index[key]] + X[k][c]
                if any(not v.is_zero for v in row):
                    rows.append(row)
    sols = nullspace(rows)
    out = {"dimension": len(sols), "forms": []}
    for v in sols:
        B = [[Q3() for _ in range(m)] for _ in range(m)]
        for (i, j), pos in index.items():
            B[i][j] = v[pos]
            B[j][i] = v[pos]
        out["forms"].append({"matrix": B, "inertia": symmetric_inertia(B)})
    return out


# ---------------------------------------------------------------------------
# invariant 3-form in dimension 7


def _triples(m):
    return list(itertools.combinations(range(m), 3))


def invariant_three_form(basis: MatrixBasis) -> dict:
    """Solve phi(Xu, v, w) + phi(u, Xv, w) + phi(u, v, Xw) = 0 for a 3-form
    phi; returns the solution space and the induced symmetric form
    B(u, v) vol = (u . phi) ^ (v . phi) ^ phi of a generic solution."""
    m = basis.size
    if m != 7:
        raise ValueError("the stabilized 3-form lives in dimension 7")
    triples = _triples(m)
    index = {t: i for i, t in enumerate(triples)}

    def phi_comp(vec, i, j, k):
        idx = (i, j, k)
        perm = tuple(sorted(idx))
        if len(set(idx)) < 3:
            return Q3()
        sign = _perm_sign(idx)
        return vec[index[perm]] * sign

    rows = []
    for X in basis.matrices:
        for (i, j, k) in triples:
            row = [Q3() for _ in triples]
            for l in range(m):
                for (slot, rest) in ((i, (j, k)), (j, (i, k)), (k, (i, j))):
                    coeff = X[l][slot]
                    if coeff.is_zero:
                        continue
                    if slot == i:
                        tgt = (l, j, k)
                    elif slot == j:
                        tgt = (i, l, k)
                    else:
                        tgt = (i, j, l)
                    if len(set(tgt)) < 3:
                        continue
                    perm = tuple(sorted(tgt))
                    row[index[perm]] = row[index[perm]] + coeff * _perm_sign(tgt)
            if any(not v.is_zero for v in row):
                rows.append(row)
    sols = nullspace(rows)
    result = {"dimension": len(sols), "forms": sols, "induced": None}
    if len(sols) == 1:
        B = induced_bilinear_from_three_form(sols[0])
        result["induced"] = {"matrix": B, "inertia": symmetric_inertia(B)}
    return result


def _perm_sign(idx):
    order = list(idx)
    swaps = 0
    for i in range(len(order)):
        mpos = order.index(min(order[i:]), i)
        if mpos != i:
            order[i], order[mpos] = order[mpos], order[i]
            swaps += 1
    return Q3(1) if swaps % 2 == 0 else Q3(-1)


def induced_bilinear_from_three_form(phi_vec):
    """B_{uv} vol = (e_u . phi) ^ (e_v . phi) ^ phi, exact in dimension 7."""
    m = 7
    triples = _triples(m)
    index = {t: i for i, t in enumerate(triples)}

    def phi(i, j, k):
        if len({i, j, k}) < 3:
            return Q3()
        return phi_vec[index[tuple(sorted((i, j, k)))]] * _perm_sign((i, j, k))

    B = [[Q3() for _ in range(m)] for _ in range(m)]
    full = tuple(range(m))
    for u in range(m):
        for v in range(u, m):
            total = Q3()
            # coefficient of e^0 ^ ... ^ e^6 in (e_u . phi)^(e_v . phi)^phi
            for ab in itertools.combinations(full, 2):
                for cd in itertools.combinations(set(full) - set(ab), 2):
                    rest = tuple(sorted(set(full) - set(ab) - set(cd)))
                    seq = ab + cd + rest
                    total = total + (_perm_sign_seq(seq)
                                     * phi(u, ab[0], ab[1])
                                     * phi(v, cd[0], cd[1])
                                     * phi(rest[0], rest[1], rest[2]))
            B[u][v] = total
            B[v][u] = total
    return B


def _perm_sign_seq(seq):
    order = list(seq)
    swaps = 0
    for i in range(len(order)):
        mpos = order.index(min(order[i:]), i)
        if mpos != i:
            order[i], order[mpos] = order[mpos], order[i]
            swaps += 1
    return Q3(1) if swaps % 2 == 0 else Q3(-1)


# ---------------------------------------------------------------------------
# top-level verification entry used by the CLI


def verify_system(name: str) -> dict:
    """Run the full exact check battery for one of the named systems."""
    out: dict = {"system": name}
    if name in ("syspoint", "g2-flat"):
        table_name = "syspoint" if name == "syspoint" else "sycart-syspp"
        t = flat_structure_constants(table_name)
        ok, bad = jacobi_check(t)
        out["jacobi"] = ok
        ok2, bad2 = exterior_square_check(table_name)
        out["d_squared_zero"] = ok2
        out["killing"] = killing_analysis(t)
        out["dimension"] = t.dim
        return out
    if name in ("conpoint", "caln", "ccg2"):
        basis = matrix_rep(name)
        closure = commutator_closure_check(basis)
        out["closed"] = closure["closed"]
        out["generators"] = basis.dim
        out["matrix_size"] = basis.size
        if closure["closed"]:
            induced = closure["constants"]
            ok, _ = jacobi_check(induced)
            out["jacobi"] = ok
            out["killing"] = killing_analysis(induced)
            if name == "ccg2":
                flat = flat_structure_constants("sycart-syspp")
                out["matches_flat_table"] = tables_equal(induced, flat)
        bil = invariant_bilinear_form(basis)
        out["invariant_bilinear_dimension"] = bil["dimension"]
        out["invariant_bilinear_inertias"] = [f["inertia"] for f in bil["forms"]]
        if name == "ccg2":
            three = invariant_three_form(basis)
            out["invariant_three_form_dimension"] = three["dimension"]
            if three["induced"] is not None:
                out["three_form_induced_inertia"] = three["induced"]["inertia"]
        return out
    raise ValueError(f"unknown system {name!r}")
