import random
from fractions import Fraction

import pytest

from odegeom.liealg import (
    Q3, MatrixBasis, StructureConstantTable, commutator,
    commutator_closure_check, exterior_square_check, flat_structure_constants,
    induced_bilinear_from_three_form, invariant_bilinear_form,
    invariant_three_form, jacobi_check, killing_analysis, killing_form,
    matrix_rep, nullspace, q3, rref, symmetric_inertia, tables_equal,
    verify_system)


# --- exact field -----------------------------------------------------------

def test_q3_arithmetic():
    s = Q3(0, 1)
    assert s * s == Q3(3)
    assert (Q3(1, 1) * Q3(1, -1)) == Q3(-2)
    x = Q3(Fraction(2, 3), Fraction(-1, 5))
    assert x * x.inverse() == Q3(1)
    assert float(Q3(1, 1)) == pytest.approx(1 + 3 ** 0.5)


def test_q3_exact_sign():
    assert Q3(2, -1).sign() == 1      # 2 - sqrt3 > 0
    assert Q3(-2, 1).sign() == -1     # sqrt3 - 2 < 0
    assert Q3(-1, 1).sign() == 1      # sqrt3 - 1 > 0
    assert Q3(0, 0).sign() == 0


def test_symmetric_inertia_basic():
    M = [[q3(2), q3(0)], [q3(0), q3(-5)]]
    assert symmetric_inertia(M) == (1, 1, 0)
    # hyperbolic block with zero diagonal
    M = [[q3(0), q3(1)], [q3(1), q3(0)]]
    assert symmetric_inertia(M) == (1, 1, 0)
    M = [[q3(0), q3(0)], [q3(0), q3(0)]]
    assert symmetric_inertia(M) == (0, 0, 2)


# --- structure constant tables ----------------------------------------------

def test_point_system_read_off():
    t = flat_structure_constants("syspoint")
    assert t.dim == 7
    # d(theta1) contains Omega1 ^ theta1, so c^{theta1}_{Omega1 theta1} = -1
    i, j = t.labels.index("Omega1"), t.labels.index("theta1")
    assert t.bracket_coeff(0, i, j) == Q3(-1)


def test_antisymmetry_by_construction():
    t = flat_structure_constants("sycart-syspp")
    for (k, i, j) in list(t.c):
        assert t.bracket_coeff(k, i, j) == -t.bracket_coeff(k, j, i)


def test_jacobi_both_systems():
    for name in ("syspoint", "sycart-syspp"):
        ok, bad = jacobi_check(flat_structure_constants(name))
        assert ok, bad[:3]


def test_jacobi_negative_control():
    t = flat_structure_constants("syspoint")
    c = dict(t.c)
    key = next(iter(c))
    c[key] = c[key] + Q3(1)
    mutated = StructureConstantTable(t.dim, t.labels, c)
    ok, bad = jacobi_check(mutated)
    assert not ok and bad


def test_d_squared_equivalence_with_jacobi():
    # two independent routes: derivation on the free exterior algebra vs the
    # cyclic structure-constant sum
    for name in ("syspoint", "sycart-syspp"):
        ok_d, _ = exterior_square_check(name)
        ok_j, _ = jacobi_check(flat_structure_constants(name))
        assert ok_d == ok_j == True  # noqa: E712


def test_killing_abelian():
    t = StructureConstantTable(3, ("e1", "e2", "e3"), {})
    assert killing_analysis(t) == {"nondegenerate": False,
                                   "signature": (0, 0, 3)}


def test_killing_14dim_split_signature():
    t = flat_structure_constants("sycart-syspp")
    out = killing_analysis(t)
    assert out["nondegenerate"]
    assert out["signature"] == (8, 6, 0)
    # float cross-check of the exact congruence inertia
    import numpy as np
    K = np.array([[float(v) for v in row] for row in killing_form(t)])
    eigs = np.linalg.eigvalsh(K)
    assert (int((eigs > 1e-9).sum()), int((eigs < -1e-9).sum())) == (8, 6)


def test_killing_point_system_degenerate():
    out = killing_analysis(flat_structure_constants("syspoint"))
    assert not out["nondegenerate"]
    assert out["signature"][2] > 0


# --- matrix representations --------------------------------------------------

def test_matrix_reps_shapes():
    assert matrix_rep("conpoint").size == 5
    assert matrix_rep("conpoint").dim == 7
    assert matrix_rep("caln").size == 8
    assert matrix_rep("caln").dim == 7
    b = matrix_rep("ccg2")
    assert b.size == 7 and b.dim == 14


def test_closure_and_flat_table_match():
    for name, table in (("conpoint", "syspoint"), ("ccg2", "sycart-syspp")):
        basis = matrix_rep(name)
        res = commutator_closure_check(basis)
        assert res["closed"]
        assert tables_equal(res["constants"], flat_structure_constants(table)), name


def test_caln_closure_and_killing():
    basis = matrix_rep("caln")
    res = commutator_closure_check(basis)
    assert res["closed"]
    ok, _ = jacobi_check(res["constants"])
    assert ok
    out = killing_analysis(res["constants"])
    assert not out["nondegenerate"]


def test_conpoint_killing_degenerate():
    res = commutator_closure_check(matrix_rep("conpoint"))
    out = killing_analysis(res["constants"])
    assert not out["nondegenerate"]


# --- invariant forms ------------------------------------------------------------

def so3_basis():
    def skew(i, j):
        M = [[Q3() for _ in range(3)] for _ in range(3)]
        M[i][j] = Q3(1)
        M[j][i] = Q3(-1)
        return M
    return MatrixBasis("so3", ("L1", "L2", "L3"),
                       [skew(0, 1), skew(0, 2), skew(1, 2)])


def test_invariant_bilinear_so3_is_identity():
    out = invariant_bilinear_form(so3_basis())
    assert out["dimension"] == 1
    B = out["forms"][0]["matrix"]
    scale = B[0][0]
    for i in range(3):
        for j in range(3):
            assert B[i][j] == (scale if i == j else Q3())
    assert out["forms"][0]["inertia"] in ((3, 0, 0), (0, 3, 0))


def test_invariant_bilinear_ccg2_signature_4_3():
    out = invariant_bilinear_form(matrix_rep("ccg2"))
    assert out["dimension"] == 1
    assert out["forms"][0]["inertia"] in ((4, 3, 0), (3, 4, 0))


def test_invariant_bilinear_caln_signature_4_4():
    out = invariant_bilinear_form(matrix_rep("caln"))
    assert out["dimension"] >= 1
    assert any(f["inertia"] == (4, 4, 0) for f in out["forms"])


def test_invariant_three_form_exists_and_generic():
    basis = matrix_rep("ccg2")
    res = invariant_three_form(basis)
    assert res["dimension"] == 1
    assert res["induced"] is not None
    inertia = res["induced"]["inertia"]
    assert inertia in ((4, 3, 0), (3, 4, 0))


def test_three_form_induced_proportional_to_bilinear():
    basis = matrix_rep("ccg2")
    Bphi = invariant_three_form(basis)["induced"]["matrix"]
    B = invariant_bilinear_form(basis)["forms"][0]["matrix"]
    ratio = None
    for i in range(7):
        for j in range(7):
            if B[i][j].is_zero:
                assert Bphi[i][j].is_zero
                continue
            r = Bphi[i][j] / B[i][j]
            if ratio is None:
                ratio = r
            assert r == ratio
    assert ratio is not None and not ratio.is_zero


def test_random_basis_has_no_invariant_three_form():
    rng = random.Random(0)
    mats = []
    for _ in range(14):
        mats.append([[q3(rng.randint(-3, 3)) for _ in range(7)]
                     for _ in range(7)])
    basis = MatrixBasis("random", tuple(f"g{i}" for i in range(14)), mats)
    res = invariant_three_form(basis)
    assert res["dimension"] == 0


# --- aggregate entry ----------------------------------------------------------

def test_verify_system_reports():
    out = verify_system("g2-flat")
    assert out["jacobi"] and out["d_squared_zero"]
    assert out["killing"]["signature"] == (8, 6, 0)
    out = verify_system("ccg2")
    assert out["closed"] and out["matches_flat_table"]
    assert out["invariant_bilinear_dimension"] == 1
    assert out["invariant_three_form_dimension"] == 1
    with pytest.raises(ValueError):
        verify_system("nope")
