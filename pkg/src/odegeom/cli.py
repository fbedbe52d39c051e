"""Command-line front end.

Subcommands:
  ode3 {invariants|classify|metric|nu} --F <formula>
  dkp {residual|coframe} --u <formula> [--X <formula>]
  ode2 {metric|invariants|flatness} --Q <formula>
  monge {classify1|classify2|verify-solution|g32|example6} ...
  lie verify <system>
  verify paper

Global flags: --tol --samples --seed --box --json.  Exit status: 0 when every
verdict matches expectation, 1 on a mismatch, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import expr as ex
from .catalog import verify_catalog
from .config import RunConfig, load_config
from .curvature import signature_at
from .exterior import J2_3RD, MONGE1, MONGE2
from .zerotest import BoxError, DomainBox, auto_guards
from . import liealg, monge, ode2, ode3

USAGE_ERROR = 2


class CliError(Exception):
    pass


def parse_box_args(specs, defaults: dict) -> dict:
    """--box 'sym:lo:hi' repeated; returns interval dict over defaults."""
    intervals = dict(defaults)
    for spec in specs or ():
        parts = spec.split(":")
        if len(parts) != 3:
            raise CliError(f"bad box spec {spec!r}; expected sym:lo:hi")
        name, lo, hi = parts
        try:
            intervals[name] = (float(lo), float(hi))
        except ValueError:
            raise CliError(f"bad box bounds in {spec!r}")
    return intervals


def build_box(formula: ex.Expression, chart_names, specs) -> DomainBox:
    defaults = {n: (-1.0, 1.0) for n in chart_names}
    defaults.update({n: (-1.0, 1.0) for n in ex.free_symbols(formula)})
    intervals = parse_box_args(specs, defaults)
    pos, nz = auto_guards(formula)
    return DomainBox(intervals, pos, nz)


def _parse_formula(text, allowed):
    try:
        return ex.parse(text, allowed=allowed)
    except ex.ParseError as err:
        raise CliError(f"malformed formula: {err}")


def emit(report: dict, as_json: bool):
    if as_json:
        print(json.dumps(report, indent=2, default=str))
        return
    def walk(obj, indent=0):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, (dict, list)):
                    print(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    print(f"{pad}{k}: {v}")
        elif isinstance(obj, list):
            for v in obj:
                walk(v, indent)
                if isinstance(v, dict):
                    print()
        else:
            print(f"{pad}{obj}")
    walk(report)


def cmd_ode3(args, cfg: RunConfig) -> tuple:
    F = _parse_formula(args.F, set(J2_3RD.coords))
    bx = build_box(F, J2_3RD.coords, args.box)
    ode = ode3.third_order(F, bx)
    if args.action == "invariants":
        inv = ode3.ode3_invariants(ode)
        report = {name: ex.to_str(getattr(inv, name))
                  for name in ("K", "A", "G", "L", "N",
                               "C1", "C2", "C3", "C4", "C5")}
        return 0, {"formula": ex.to_str(F), "invariants": report}
    if args.action == "classify":
        rep = ode3.classify3(ode, cfg)
        return 0, {"formula": ex.to_str(F), **rep.to_json()}
    if args.action == "metric":
        g = ode3.metric_tilde(ode)
        comps = {k: ex.to_str(v) for k, v in g.components().items()
                 if not v.is_zero_literal}
        transport = ode3.transport_check(ode, cfg)
        return 0, {"formula": ex.to_str(F), "components": comps,
                   "kernel_field": "d_x + p d_y + q d_p + F d_q",
                   "transport": transport.to_json()}
    if args.action == "nu":
        nu = ode3.nu_tilde(ode)
        closed = ode3.nu_closedness_check(ode, cfg)
        return 0, {"formula": ex.to_str(F), "one_form": nu.to_json(),
                   "lie_transport_closed": closed.to_json()}
    raise CliError(f"unknown ode3 action {args.action!r}")


def cmd_dkp(args, cfg: RunConfig) -> tuple:
    u = _parse_formula(args.u, {"x", "y", "t"})
    bx = build_box(u, ("x", "y", "t", "v"), args.box)
    if args.action == "residual":
        res = ode3.dkp_residual(u, bx, cfg)
        return (0 if res.verdict.is_zero else 1), \
            {"u": ex.to_str(u), **res.to_json()}
    if args.action == "coframe":
        forms = ode3.dkp_coframe(u, bx, cfg)
        report = {"u": ex.to_str(u),
                  "coframe": [f.to_json() for f in forms]}
        status = 0
        if args.X:
            X = _parse_formula(args.X, {"x", "y", "t", "v"})
            verdict = ode3.dkp_x_membership(u, X, bx, cfg)
            report["x_membership"] = verdict.to_json()
            status = 0 if verdict.is_zero else 1
        return status, report
    raise CliError(f"unknown dkp action {args.action!r}")


def cmd_ode2(args, cfg: RunConfig) -> tuple:
    Q = _parse_formula(args.Q, {"x", "y", "p"})
    bx = build_box(Q, ("x", "y", "p", "phi"), args.box)
    ode = ode2.SecondOrderODE(Q, bx)
    if args.action == "metric":
        g = ode2.fefferman_metric(ode)
        comps = {f"{g.chart.coords[i]}{g.chart.coords[j]}":
                 ex.to_str(g.rows[i][j])
                 for i in range(4) for j in range(i, 4)
                 if not g.rows[i][j].is_zero_literal}
        import random
        sig = signature_at(g, bx.sample(random.Random(cfg.seed)), cfg.dps)
        return 0, {"formula": ex.to_str(Q), "components": comps,
                   "signature": list(sig)}
    if args.action == "invariants":
        inv = ode2.ode2_invariants(ode)
        return 0, {"formula": ex.to_str(Q),
                   "w1": ex.to_str(inv["w1"]), "w2": ex.to_str(inv["w2"])}
    if args.action == "flatness":
        rep = ode2.fefferman_flatness_check(ode, cfg)
        status = 0 if rep.values["equivalence_holds"] else 1
        return status, {"formula": ex.to_str(Q), **rep.to_json()}
    raise CliError(f"unknown ode2 action {args.action!r}")


def cmd_monge(args, cfg: RunConfig) -> tuple:
    if args.action == "classify1":
        m = monge.monge_first(_parse_formula(args.F, set(MONGE1.coords)))
        rep = monge.classify_monge1(m, cfg)
        return 0, {"formula": ex.to_str(m.F), **rep.to_json()}
    if args.action == "classify2":
        m = monge.monge_second(_parse_formula(args.F, set(MONGE2.coords)))
        rep = monge.classify_monge2(m, cfg)
        return 0, {"formula": ex.to_str(m.F), **rep.to_json()}
    if args.action == "verify-solution":
        with open(args.sol) as fh:
            data = json.load(fh)
        sol = monge.parametrized_solution(data["x"], data["y"], data["z"])
        order = int(data.get("order", 1))
        eq_text = data.get("equation", args.F)
        if eq_text is None:
            raise CliError("no equation given (solution file or --F)")
        bx = None
        if "box" in data:
            names = sorted({"t"} | {f"w_{k}" for k in range(6)})
            intervals = {n: (-1.0, 1.0) for n in names}
            intervals.update({k: tuple(v) for k, v in data["box"].items()})
            bx = DomainBox(intervals)
        eq = monge.monge_first(eq_text) if order == 1 \
            else monge.monge_second(eq_text)
        verdict = monge.verify_parametrized_solution(eq, sol, bx, cfg)
        return (0 if verdict.is_zero else 1), {
            "equation": eq_text, "order": order,
            "verdict": verdict.to_json()}
    if args.action == "g32":
        F = _parse_formula(args.F, set(MONGE2.coords))
        bx = build_box(F, MONGE2.coords, args.box)
        m = monge.monge_second(F, bx)
        g = monge.g32_metric(m, cfg)
        comps = {f"{g.chart.coords[i]}{g.chart.coords[j]}":
                 ex.to_str(g.rows[i][j])
                 for i in range(5) for j in range(i, 5)
                 if not g.rows[i][j].is_zero_literal}
        return 0, {"formula": ex.to_str(F), "components": comps}
    if args.action == "example6":
        F = _parse_formula(args.F, {"q"})
        sub = args.sub
        if sub == "a5":
            return 0, {"formula": ex.to_str(F),
                       "a5": ex.to_str(monge.example6_a5(F))}
        if sub == "einstein":
            _, verdict = monge.einstein_scale_residual(F, cfg=cfg)
            return (0 if verdict.is_zero else 1), {
                "formula": ex.to_str(F), "residual": verdict.to_json()}
        if sub == "weyl-pattern":
            rep = monge.weyl_frame_pattern_check(F, cfg=cfg)
            ok = rep.verdict == "pattern-confirmed"
            return (0 if ok else 1), {"formula": ex.to_str(F),
                                      **rep.to_json()}
        raise CliError(f"unknown example6 action {sub!r}")
    raise CliError(f"unknown monge action {args.action!r}")


def cmd_lie(args, cfg: RunConfig) -> tuple:
    try:
        res = liealg.verify_system(args.system)
    except ValueError as err:
        raise CliError(str(err))
    ok = all(v for k, v in res.items()
             if isinstance(v, bool))
    return (0 if ok else 1), res


def cmd_verify(args, cfg: RunConfig) -> tuple:
    if args.target != "paper":
        raise CliError(f"unknown verification target {args.target!r}")
    only = set(args.only) if args.only else None
    report = verify_catalog(cfg, only=only)
    status = 0 if report["summary"]["failed"] == 0 else 1
    return status, report


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--samples", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--box", action="append", default=argparse.SUPPRESS,
                        help="sampling interval sym:lo:hi (repeatable)")
    common.add_argument("--json", action="store_true",
                        default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(
        prog="odegeom",
        description="conformal-geometric invariants of ODEs",
        parents=[common])
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("ode3", parents=[common],
                       help="third-order equation pipeline")
    p.add_argument("action",
                   choices=["invariants", "classify", "metric", "nu"])
    p.add_argument("--F", required=True)

    p = sub.add_parser("dkp", parents=[common],
                       help="dispersionless-KP bridge")
    p.add_argument("action", choices=["residual", "coframe"])
    p.add_argument("--u", required=True)
    p.add_argument("--X")

    p = sub.add_parser("ode2", parents=[common],
                       help="second-order equation pipeline")
    p.add_argument("action", choices=["metric", "invariants", "flatness"])
    p.add_argument("--Q", required=True)

    p = sub.add_parser("monge", parents=[common],
                       help="Monge equations and the (3,2) metric")
    p.add_argument("action", choices=["classify1", "classify2",
                                      "verify-solution", "g32", "example6"])
    p.add_argument("sub", nargs="?",
                   help="example6 action: a5 | einstein | weyl-pattern")
    p.add_argument("--F")
    p.add_argument("--sol", help="JSON file with x, y, z (and equation)")

    p = sub.add_parser("lie", parents=[common],
                       help="exact Lie-algebra verification")
    p.add_argument("verb", choices=["verify"])
    p.add_argument("system",
                   choices=["syspoint", "g2-flat", "conpoint", "caln", "ccg2"])

    p = sub.add_parser("verify", parents=[common],
                       help="run the verification catalog")
    p.add_argument("target")
    p.add_argument("--only", action="append")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_help()
        return USAGE_ERROR
    for name, default in (("tol", None), ("samples", None), ("seed", None),
                          ("box", None), ("json", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    cfg = load_config()
    overrides = {}
    for name in ("tol", "samples", "seed"):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    try:
        cfg = cfg.with_(**overrides)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR

    handlers = {"ode3": cmd_ode3, "dkp": cmd_dkp, "ode2": cmd_ode2,
                "monge": cmd_monge, "lie": cmd_lie, "verify": cmd_verify}
    import time
    t0 = time.perf_counter()
    try:
        status, report = handlers[args.command](args, cfg)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except ex.ParseError as err:
        print(f"error: malformed formula: {err}", file=sys.stderr)
        return USAGE_ERROR
    except BoxError as err:
        print(f"error: box violation: {err}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, ex.EvalError) as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    if "config" not in report:
        report["config"] = {"tol": cfg.tol, "samples": cfg.samples,
                            "seed": cfg.seed, "dps": cfg.dps}
    report["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
    emit(report, args.json)
    return status


if __name__ == "__main__":
    sys.exit(main())
