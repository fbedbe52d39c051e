"""Coordinate tensor calculus for nondegenerate metrics in dimensions 3-5.

Everything is built as shared expression DAGs and never expanded; identity
checks evaluate the components numerically at sample points.  Sign
conventions, fixed once for the whole package:

    Gamma^a_ij  Levi-Civita (or Weyl-connection) symbols, symmetric in ij
    R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb
              + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    R_bd    = R^a_bad
    R       = g^bd R_bd
    Schouten S = (Ric - R g / (2(n-1))) / (n-2)
    Weyl_abcd  = R_abcd - (g_ac S_bd - g_ad S_bc + g_bd S_ac - g_bc S_ad)
    Cotton_ijk = grad_k S_ij - grad_j S_ik
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import mpmath
import numpy as np

from . import expr as ex
from .exterior import Chart, DifferentialForm, SymmetricForm
from .zerotest import DomainBox


class MetricError(Exception):
    pass


@dataclass(frozen=True)
class MetricTensor:
    chart: Chart
    rows: tuple
    box: DomainBox
    signature: tuple | None = None

    def __post_init__(self):
        n = self.chart.dim
        if len(self.rows) != n or any(len(r) != n for r in self.rows):
            raise MetricError("matrix shape must match chart dimension")
        for i in range(n):
            for j in range(i):
                if self.rows[i][j] is not self.rows[j][i]:
                    raise MetricError("metric must be structurally symmetric")

    @staticmethod
    def from_symmetric_form(sf: SymmetricForm, box: DomainBox,
                            signature=None) -> "MetricTensor":
        return MetricTensor(sf.chart, sf.rows, box, signature)

    @property
    def dim(self):
        return self.chart.dim

    def entry(self, i, j):
        return self.rows[i][j]

    def to_symmetric_form(self) -> SymmetricForm:
        return SymmetricForm(self.chart, self.rows)


def metric_from_rows(chart: Chart, rows, box: DomainBox, signature=None):
    rows = tuple(tuple(ex.as_expr(c) for c in r) for r in rows)
    sym_rows = tuple(tuple(rows[min(i, j)][max(i, j)]
                           for j in range(chart.dim)) for i in range(chart.dim))
    return MetricTensor(chart, sym_rows, box, signature)


@dataclass(frozen=True)
class TensorField:
    """Dense covariant/contravariant tensor with expression components."""
    chart: Chart
    variance: str  # one letter per index: 'l' lower, 'u' upper
    comps: tuple

    def component(self, *idx):
        c = self.comps
        for i in idx:
            c = c[i]
        return c

    def flatten(self) -> dict:
        out = {}
        n = self.chart.dim
        k = len(self.variance)

        def go(prefix, c, depth):
            if depth == k:
                out[prefix] = c
                return
            for i in range(n):
                go(prefix + (i,), c[i], depth + 1)

        go((), self.comps, 0)
        return out

    def nontrivial(self) -> dict:
        return {idx: c for idx, c in self.flatten().items()
                if not c.is_zero_literal}

    def to_json(self, point=None, dps=30):
        """Formula strings by default; numeric table when a point is given."""
        if point is None:
            comps = {"".join(map(str, idx)): ex.to_str(c)
                     for idx, c in self.nontrivial().items()}
        else:
            with mpmath.workdps(dps):
                cache: dict = {}
                comps = {"".join(map(str, idx)):
                         float(ex.evaluate(c, point, cache))
                         for idx, c in self.nontrivial().items()}
        return {
            "chart": self.chart.name,
            "variance": self.variance,
            "components": comps,
        }


# ---------------------------------------------------------------------------
# symbolic inverse via adjugate / determinant with shared minors


def _det_minors(rows, cols, row0, memo):
    """Determinant of the submatrix on rows row0.. and the given column set."""
    key = (row0, cols)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if len(cols) == 1:
        out = rows[row0][cols[0]]
    else:
        terms = []
        for k, j in enumerate(cols):
            rest = cols[:k] + cols[k + 1:]
            sub = _det_minors(rows, rest, row0 + 1, memo)
            term = ex.mul(rows[row0][j], sub)
            if k % 2:
                term = ex.neg(term)
            terms.append(term)
        out = ex.add(*terms)
    memo[key] = out
    return out


def symbolic_det(rows) -> ex.Expression:
    n = len(rows)
    return _det_minors(rows, tuple(range(n)), 0, {})


def symbolic_inverse(rows):
    """Inverse matrix entries as Div(cofactor, det) expression DAGs."""
    n = len(rows)
    det = symbolic_det(rows)
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub_rows = [[rows[r][c] for c in range(n) if c != i]
                        for r in range(n) if r != j]
            if n == 1:
                cof = ex.ONE
            else:
                cof = _det_minors(sub_rows, tuple(range(n - 1)), 0, {})
            if (i + j) % 2:
                cof = ex.neg(cof)
            inv[i][j] = ex.div(cof, det)
    return tuple(tuple(r) for r in inv), det


# ---------------------------------------------------------------------------
# curvature of a general torsion-free connection


def connection_curvature(chart: Chart, gamma):
    """R^a_bcd for connection symbols gamma[a][i][j] (symmetric in ij)."""
    n = chart.dim
    coords = chart.coords
    dgamma = [[[[ex.differentiate(gamma[a][i][j], coords[c]) for c in range(n)]
                for j in range(n)] for i in range(n)] for a in range(n)]
    out = []
    for a in range(n):
        plane_b = []
        for b in range(n):
            plane_c = []
            for c in range(n):
                row = []
                for dd in range(n):
                    terms = [dgamma[a][dd][b][c],
                             ex.neg(dgamma[a][c][b][dd])]
                    for e in range(n):
                        terms.append(ex.mul(gamma[a][c][e], gamma[e][dd][b]))
                        terms.append(
                            ex.neg(ex.mul(gamma[a][dd][e], gamma[e][c][b])))
                    row.append(ex.add(*terms))
                plane_c.append(tuple(row))
            plane_b.append(tuple(plane_c))
        out.append(tuple(plane_b))
    return tuple(out)


def ricci_from_riemann(riem, n):
    """R_bd = R^a_bad."""
    return tuple(tuple(ex.add(*[riem[a][b][a][dd] for a in range(n)])
                       for dd in range(n)) for b in range(n))


class CurvaturePackage:
    """Levi-Civita curvature data of a metric, built lazily and shared."""

    def __init__(self, g: MetricTensor):
        self.metric = g
        self.chart = g.chart
        self.n = g.dim

    @cached_property
    def inverse(self):
        inv, det = symbolic_inverse(self.metric.rows)
        self._det = det
        return inv

    @cached_property
    def det(self):
        self.inverse
        return self._det

    @cached_property
    def dg(self):
        n, coords = self.n, self.chart.coords
        return [[[ex.differentiate(self.metric.rows[i][j], coords[k])
                  for j in range(n)] for i in range(n)] for k in range(n)]

    @cached_property
    def christoffel(self):
        n = self.n
        ginv = self.inverse
        dg = self.dg
        gam = []
        for a in range(n):
            plane = []
            for i in range(n):
                row = []
                for j in range(n):
                    terms = []
                    for dd in range(n):
                        inner = ex.add(dg[i][dd][j], dg[j][i][dd],
                                       ex.neg(dg[dd][i][j]))
                        terms.append(ex.mul(ginv[a][dd], inner))
                    row.append(ex.mul(ex.HALF, ex.add(*terms)))
                plane.append(tuple(row))
            gam.append(tuple(plane))
        return tuple(gam)

    @cached_property
    def riemann_up(self):
        return connection_curvature(self.chart, self.christoffel)

    @cached_property
    def riemann_low(self):
        n = self.n
        g = self.metric.rows
        up = self.riemann_up
        return tuple(tuple(tuple(tuple(
            ex.add(*[ex.mul(g[a][e], up[e][b][c][dd]) for e in range(n)])
            for dd in range(n)) for c in range(n)) for b in range(n))
            for a in range(n))

    @cached_property
    def ricci(self):
        return ricci_from_riemann(self.riemann_up, self.n)

    @cached_property
    def scalar(self):
        n = self.n
        ginv = self.inverse
        ric = self.ricci
        return ex.add(*[ex.mul(ginv[b][dd], ric[b][dd])
                        for b in range(n) for dd in range(n)])

    @cached_property
    def schouten(self):
        n = self.n
        if n < 3:
            raise MetricError("Schouten tensor needs dimension >= 3")
        ric = self.ricci
        g = self.metric.rows
        r_over = ex.div(self.scalar, ex.num(2 * (n - 1)))
        return tuple(tuple(
            ex.mul(ex.num(Fraction(1, n - 2)),
                   ex.add(ric[i][j], ex.neg(ex.mul(r_over, g[i][j]))))
            for j in range(n)) for i in range(n))

    @cached_property
    def weyl_low(self):
        n = self.n
        if n < 4:
            raise MetricError("Weyl tensor vanishes identically below dim 4; "
                              "use the Cotton tensor in dim 3")
        g = self.metric.rows
        s = self.schouten
        low = self.riemann_low
        out = []
        for a in range(n):
            pb = []
            for b in range(n):
                pc = []
                for c in range(n):
                    row = []
                    for dd in range(n):
                        corr = ex.add(
                            ex.mul(g[a][c], s[b][dd]),
                            ex.neg(ex.mul(g[a][dd], s[b][c])),
                            ex.mul(g[b][dd], s[a][c]),
                            ex.neg(ex.mul(g[b][c], s[a][dd])))
                        row.append(ex.add(low[a][b][c][dd], ex.neg(corr)))
                    pc.append(tuple(row))
                pb.append(tuple(pc))
            out.append(tuple(pb))
        return tuple(out)

    def covariant_derivative_02(self, t):
        """grad_k t_ij for a (0,2) tensor."""
        n, coords = self.n, self.chart.coords
        gam = self.christoffel
        out = []
        for k in range(n):
            plane = []
            for i in range(n):
                row = []
                for j in range(n):
                    terms = [ex.differentiate(t[i][j], coords[k])]
                    for l in range(n):
                        terms.append(ex.neg(ex.mul(gam[l][k][i], t[l][j])))
                        terms.append(ex.neg(ex.mul(gam[l][k][j], t[i][l])))
                    row.append(ex.add(*terms))
                plane.append(tuple(row))
            out.append(tuple(plane))
        return tuple(out)

    @cached_property
    def cotton(self):
        if self.n != 3:
            raise MetricError("Cotton tensor implemented in dimension 3 only")
        n = self.n
        ds = self.covariant_derivative_02(self.schouten)
        return tuple(tuple(tuple(
            ex.add(ds[k][i][j], ex.neg(ds[j][i][k]))
            for k in range(n)) for j in range(n)) for i in range(n))


def curvature_package(g: MetricTensor) -> CurvaturePackage:
    return CurvaturePackage(g)


def weyl(g: MetricTensor) -> TensorField:
    if g.dim not in (4, 5):
        raise MetricError("Weyl tensor computed in dimensions 4 and 5")
    return TensorField(g.chart, "llll", CurvaturePackage(g).weyl_low)


def cotton3(g: MetricTensor) -> TensorField:
    if g.dim != 3:
        raise MetricError("Cotton tensor computed in dimension 3")
    return TensorField(g.chart, "lll", CurvaturePackage(g).cotton)


def weyl_square(g: MetricTensor) -> ex.Expression:
    """Full contraction C^abcd C_abcd, with indices raised one at a time to
    keep the expression DAG polynomial in size."""
    pkg = CurvaturePackage(g)
    n = g.dim
    ginv = pkg.inverse
    low = pkg.weyl_low

    cur = low
    for pos in range(4):
        out = []
        for a in range(n):
            pb = []
            for b in range(n):
                pc = []
                for c in range(n):
                    row = []
                    for dd in range(n):
                        idx = [a, b, c, dd]
                        terms = []
                        for e in range(n):
                            src = idx.copy()
                            src[pos] = e
                            comp = cur[src[0]][src[1]][src[2]][src[3]]
                            terms.append(ex.mul(ginv[idx[pos]][e], comp))
                        row.append(ex.add(*terms))
                    pc.append(tuple(row))
                pb.append(tuple(pc))
            out.append(tuple(pb))
        cur = tuple(out)

    terms = []
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for dd in range(n):
                    terms.append(ex.mul(cur[a][b][c][dd], low[a][b][c][dd]))
    return ex.add(*terms)


def einstein_residual(g: MetricTensor) -> TensorField:
    """Trace-adjusted Ricci: Ric - (R/n) g."""
    pkg = CurvaturePackage(g)
    n = g.dim
    r_over = ex.div(pkg.scalar, ex.num(n))
    comps = tuple(tuple(
        ex.add(pkg.ricci[i][j], ex.neg(ex.mul(r_over, g.rows[i][j])))
        for j in range(n)) for i in range(n))
    return TensorField(g.chart, "ll", comps)


def weyl_connection_residual(g: MetricTensor, nu: DifferentialForm) -> TensorField:
    """Einstein-Weyl residual R_(ij) - (R/3) g_ij of the Weyl connection
    determined by (g, nu) in dimension 3."""
    if g.dim != 3:
        raise MetricError("Einstein-Weyl residual is a dimension-3 computation")
    if nu.degree != 1 or nu.chart != g.chart:
        raise MetricError("nu must be a 1-form on the metric chart")
    n = 3
    pkg = CurvaturePackage(g)
    ginv = pkg.inverse
    nu_low = [nu.coeff((i,)) for i in range(n)]
    nu_up = [ex.add(*[ex.mul(ginv[k][i], nu_low[i]) for i in range(n)])
             for k in range(n)]
    lc = pkg.christoffel
    gamma = []
    for k in range(n):
        plane = []
        for i in range(n):
            row = []
            for j in range(n):
                term = lc[k][i][j]
                extra = []
                if k == i:
                    extra.append(nu_low[j])
                if k == j:
                    extra.append(nu_low[i])
                extra.append(ex.neg(ex.mul(g.rows[i][j], nu_up[k])))
                row.append(ex.add(term, ex.mul(ex.HALF, ex.add(*extra))))
            plane.append(tuple(row))
        gamma.append(tuple(plane))

    riem = connection_curvature(g.chart, gamma)
    ric = ricci_from_riemann(riem, n)
    ric_sym = [[ex.mul(ex.HALF, ex.add(ric[i][j], ric[j][i]))
                for j in range(n)] for i in range(n)]
    scal = ex.add(*[ex.mul(ginv[i][j], ric_sym[i][j])
                    for i in range(n) for j in range(n)])
    r_over = ex.div(scal, ex.num(3))
    comps = tuple(tuple(
        ex.add(ric_sym[i][j], ex.neg(ex.mul(r_over, g.rows[i][j])))
        for j in range(n)) for i in range(n))
    return TensorField(g.chart, "ll", comps)


def conformal_rescale(g: MetricTensor, upsilon) -> MetricTensor:
    """e^{2 upsilon} g, componentwise."""
    factor = ex.exp(ex.mul(2, ex.as_expr(upsilon)))
    n = g.dim
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = ex.mul(factor, g.rows[i][j])
            rows[i][j] = v
            rows[j][i] = v
    return MetricTensor(g.chart, tuple(tuple(r) for r in rows), g.box,
                        g.signature)


def frame_components(T: TensorField, coframe) -> TensorField:
    """Components of an all-lower tensor in the frame dual to `coframe`.

    coframe is a list of 1-forms theta^a = M^a_i dx^i; the dual frame is
    X_a = (M^{-1})^i_a d_i and T_{a...} = sum (M^{-1})^{i}_{a} ... T_{i...}.
    """
    chart = T.chart
    n = chart.dim
    if set(T.variance) != {"l"}:
        raise MetricError("frame conversion implemented for all-lower tensors")
    if len(coframe) != n:
        raise MetricError("coframe size must match chart dimension")
    m = [[coframe[a].coeff((i,)) for i in range(n)] for a in range(n)]
    minv, _det = symbolic_inverse(m)
    # (m @ minv = 1) with m[a][i]: minv[i][a]
    k = len(T.variance)
    flat = T.flatten()
    out_flat = {}

    def convert(frame_idx):
        terms = []
        for coord_idx, comp in flat.items():
            if comp.is_zero_literal:
                continue
            facts = [minv[coord_idx[r]][frame_idx[r]] for r in range(k)]
            terms.append(ex.mul(*facts, comp))
        return ex.add(*terms) if terms else ex.ZERO

    def build(depth, prefix):
        if depth == k:
            return convert(prefix)
        return tuple(build(depth + 1, prefix + (i,)) for i in range(n))

    return TensorField(chart, T.variance, build(0, ()))


# ---------------------------------------------------------------------------
# numeric probes


def evaluate_matrix(rows, point, dps):
    with mpmath.workdps(dps):
        cache: dict = {}
        return np.array([[float(ex.evaluate(c, point, cache)) for c in row]
                         for row in rows], dtype=float)


def signature_at(g: MetricTensor, point, dps: int = 30, zero_tol=1e-9):
    """Inertia (pos, neg, zero) of the metric matrix at a point."""
    mat = evaluate_matrix(g.rows, point, dps)
    eigs = np.linalg.eigvalsh(mat)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    pos = int(np.sum(eigs > zero_tol * scale))
    neg = int(np.sum(eigs < -zero_tol * scale))
    return pos, neg, len(eigs) - pos - neg


def tensor_zero_exprs(T: TensorField, prefix="") -> dict:
    """Named nonzero-candidate components for zero-testing."""
    return {f"{prefix}{''.join(map(str, idx))}": c
            for idx, c in T.flatten().items() if not c.is_zero_literal}
