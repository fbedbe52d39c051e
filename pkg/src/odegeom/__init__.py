"""Conformal-geometric structures attached to ordinary differential equations.

Symbolic expression trees with randomized zero-testing, exterior calculus on
fixed jet-space charts, coordinate tensor curvature, the third- and
second-order ODE pipelines, the Monge/G2 layer, and exact Lie-algebra
verification of the flat structure systems.
"""

from .config import RunConfig
from . import (catalog, curvature, expr, exterior, liealg, monge, ode2, ode3,
               zerotest)

__all__ = [
    "RunConfig", "catalog", "curvature", "expr", "exterior", "liealg",
    "monge", "ode2", "ode3", "zerotest",
]
