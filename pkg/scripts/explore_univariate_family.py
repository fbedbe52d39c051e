#!/usr/bin/env python3
"""Explore the one-variable Monge family z' = F(q): print the surviving
scalar invariant, the squared-Weyl verdict, the Einstein-scale verdict, and
the null-frame curvature slot, for a formula given on the command line.

Usage: python scripts/explore_univariate_family.py "q^3/6" [qlo qhi]
"""

import sys

from odegeom import expr as ex
from odegeom.config import RunConfig
from odegeom.curvature import weyl_square
from odegeom.monge import (einstein_scale_residual, example6_a5, example6_box,
                           example6_metric, weyl_frame_pattern_check)
from odegeom.zerotest import is_zero


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    F = ex.parse(sys.argv[1], allowed={"q"})
    qlo, qhi = (float(sys.argv[2]), float(sys.argv[3])) \
        if len(sys.argv) >= 4 else (0.5, 2.0)
    bx = example6_box(qlo, qhi)
    cfg = RunConfig()

    a5 = example6_a5(F)
    print(f"F              = {F}")
    print(f"a5             = {a5}")

    g = example6_metric(F, bx)
    ws = is_zero(weyl_square(g), bx, cfg.with_(tol=1e-8))
    print(f"weyl^2 == 0    : {ws.is_zero} (max ratio {ws.max_ratio:.2e})")

    _, einstein = einstein_scale_residual(F, bx, cfg)
    print(f"einstein scale : {einstein.is_zero}"
          f" (max ratio {einstein.max_ratio:.2e})")

    rep = weyl_frame_pattern_check(F, bx, cfg)
    print(f"frame pattern  : {rep.verdict}")
    mid = {"x": 0.0, "y": 0.0, "p": 0.0, "q": (qlo + qhi) / 2, "z": 0.0}
    print(f"survivor at q={mid['q']:.3g}: "
          f"{float(ex.eval_numeric(rep.values['survivor'], mid)):.6g};"
          f" a5 there: {float(ex.eval_numeric(a5, mid)):.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
