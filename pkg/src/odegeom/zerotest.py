"""Randomized zero-testing of expressions over sampling boxes.

An expression is declared identically zero on a box when, at every sampled
point, |value| <= tol * (1 + S) where S is the term-magnitude scale: the sum
of the absolute values of the expression's top-level additive terms at that
point.  The scale makes the test relative for large cancellations while
staying absolute near zero.  Sampling is seed-deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .config import RunConfig
from . import expr as ex


class BoxError(Exception):
    pass


@dataclass(frozen=True)
class DomainBox:
    """Per-symbol closed sampling intervals plus guard expressions.

    Guards keep samples away from singular loci that are not expressible as
    a per-symbol interval: a positive guard requires expr > margin, a nonzero
    guard requires |expr| > margin.  Violating points are resampled; the box
    is unusable when more than half of the attempted points fail.
    """

    intervals: dict
    positive_guards: tuple = ()
    nonzero_guards: tuple = ()

    def __post_init__(self):
        for name, (lo, hi) in self.intervals.items():
            if not lo <= hi:
                raise BoxError(f"empty interval for {name!r}")
        for g, margin in self.positive_guards + self.nonzero_guards:
            if not margin > 0:
                raise BoxError("guard margins must be strictly positive")

    def with_symbols(self, **ranges) -> "DomainBox":
        merged = dict(self.intervals)
        merged.update(ranges)
        return DomainBox(merged, self.positive_guards, self.nonzero_guards)

    def with_positive_guard(self, guard: ex.Expression, margin: float = 1e-3):
        return DomainBox(self.intervals,
                         self.positive_guards + ((guard, margin),),
                         self.nonzero_guards)

    def with_nonzero_guard(self, guard: ex.Expression, margin: float = 1e-3):
        return DomainBox(self.intervals, self.positive_guards,
                         self.nonzero_guards + ((guard, margin),))

    def sample(self, rng: random.Random) -> dict:
        return {name: rng.uniform(lo, hi)
                for name, (lo, hi) in sorted(self.intervals.items())}

    def admits(self, point: dict) -> bool:
        for g, margin in self.positive_guards:
            if ex.evaluate(g, point) <= margin:
                return False
        for g, margin in self.nonzero_guards:
            if abs(ex.evaluate(g, point)) <= margin:
                return False
        return True


def box(**ranges) -> DomainBox:
    return DomainBox(dict(ranges))


def unit_box(names, lo=-1.0, hi=1.0) -> DomainBox:
    return DomainBox({n: (lo, hi) for n in names})


def _integer_exponent(n: ex.Expression) -> bool:
    return (n.kind == ex.NUM and isinstance(n.payload, Fraction)
            and n.payload.denominator == 1)


def auto_guards(e: ex.Expression, margin: float = 1e-3):
    """Infer guards from the tree: bases of non-integer powers and log
    arguments must stay positive, denominators must stay away from zero."""
    positive, nonzero = [], []
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if n.kind == ex.DIV:
            den = n.args[1]
            if den.kind != ex.NUM:
                nonzero.append((den, margin))
        elif n.kind == ex.POW:
            base, xp = n.args
            if base.kind != ex.NUM:
                if not _integer_exponent(xp):
                    positive.append((base, margin))
                elif xp.payload < 0:
                    nonzero.append((base, margin))
        elif n.kind == ex.FUNC and n.payload == "log":
            positive.append((n.args[0], margin))
        stack.extend(n.args)
    return tuple(positive), tuple(nonzero)


def auto_box(e: ex.Expression, ranges=None, default=(-1.0, 1.0),
             margin: float = 1e-3) -> DomainBox:
    names = sorted(ex.free_symbols(e))
    intervals = {n: default for n in names}
    if ranges:
        intervals.update(ranges)
    positive, nonzero = auto_guards(e, margin)
    return DomainBox(intervals, positive, nonzero)


@dataclass
class ZeroTestVerdict:
    is_zero: bool
    samples: int
    seed: int
    tol: float
    max_ratio: float
    scale: float
    witness_point: dict | None = None
    witness_value: float | None = None
    label: str = ""

    def to_json(self):
        return {
            "is_zero": self.is_zero,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "max_ratio": self.max_ratio,
            "scale": self.scale,
            "witness_point": self.witness_point,
            "witness_value": self.witness_value,
            "label": self.label,
        }


def _term_scale(e: ex.Expression, cache: dict, point: dict):
    terms = e.args if e.kind == ex.ADD else (e,)
    s = mpmath.mpf(0)
    for t in terms:
        s += abs(ex.evaluate(t, point, cache))
    return s


def is_zero_many(named: dict, box: DomainBox, cfg: RunConfig | None = None) -> dict:
    """Zero-test several expressions over one shared set of sample points.

    Expressions typically share large sub-DAGs (tensor components), so a
    single evaluation cache per point is reused across all of them.  Points
    where a guard fails or any expression raises a domain error are
    resampled; more than half of the attempts failing makes the box unusable.
    """
    cfg = cfg or RunConfig()
    names = list(named)
    exprs = [named[n] for n in names]
    worst = {n: (mpmath.mpf(-1), None, None, None) for n in names}
    rng = random.Random(cfg.seed)
    accepted = 0
    attempts = 0
    failures = 0
    max_attempts = max(4 * cfg.samples, cfg.samples + 20)
    with mpmath.workdps(cfg.dps):
        while accepted < cfg.samples:
            if attempts >= max_attempts or (
                    failures > attempts / 2 and attempts >= cfg.samples):
                raise BoxError(
                    f"sampling box unusable: {failures}/{attempts} attempted "
                    f"points failed")
            attempts += 1
            pt = box.sample(rng)
            cache: dict = {}
            scores = []
            try:
                if not box.admits(pt):
                    failures += 1
                    continue
                for n, e in zip(names, exprs):
                    v = ex.evaluate(e, pt, cache)
                    s = _term_scale(e, cache, pt)
                    scores.append((n, v, s))
            except ex.EvalError:
                failures += 1
                continue
            accepted += 1
            for n, v, s in scores:
                ratio = abs(v) / (1 + s)
                if ratio > worst[n][0]:
                    worst[n] = (ratio, pt, v, s)
    out = {}
    for n in names:
        ratio, pt, v, s = worst[n]
        zero = ratio <= cfg.tol
        out[n] = ZeroTestVerdict(
            is_zero=zero,
            samples=cfg.samples,
            seed=cfg.seed,
            tol=cfg.tol,
            max_ratio=float(ratio),
            scale=float(s),
            witness_point=None if zero else dict(pt),
            witness_value=None if zero else float(v),
            label=n,
        )
    return out


def is_zero(e: ex.Expression, box: DomainBox,
            cfg: RunConfig | None = None, **overrides) -> ZeroTestVerdict:
    cfg = (cfg or RunConfig())
    if overrides:
        cfg = cfg.with_(**overrides)
    if e.is_zero_literal:
        return ZeroTestVerdict(True, cfg.samples, cfg.seed, cfg.tol,
                               0.0, 0.0)
    return is_zero_many({"expr": e}, box, cfg)["expr"]


def combined_verdict(verdicts: dict) -> ZeroTestVerdict:
    """All-zero verdict across components; carries the worst witness."""
    worst = max(verdicts.values(), key=lambda v: v.max_ratio)
    all_zero = all(v.is_zero for v in verdicts.values())
    return ZeroTestVerdict(
        is_zero=all_zero,
        samples=worst.samples,
        seed=worst.seed,
        tol=worst.tol,
        max_ratio=worst.max_ratio,
        scale=worst.scale,
        witness_point=worst.witness_point,
        witness_value=worst.witness_value,
        label=worst.label,
    )
