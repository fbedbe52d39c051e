#!/usr/bin/env python3
"""Run the full verification catalog and print a one-line-per-claim summary.

Usage: python scripts/verify_catalog.py [--seed N] [--samples N] [--json]
"""

import argparse
import json
import sys
import time

from odegeom.catalog import verify_catalog
from odegeom.config import RunConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    cfg = RunConfig(tol=args.tol, samples=args.samples, seed=args.seed)
    t0 = time.time()
    report = verify_catalog(cfg)
    elapsed = time.time() - t0

    if args.json:
        print(json.dumps(report, indent=2, default=str))
    else:
        for entry in report["entries"]:
            mark = "PASS" if entry["pass"] else "FAIL"
            print(f"[{mark}] {entry['id']:<24} ({entry['tag']}) {entry['claim']}")
            if not entry["pass"]:
                for key, check in entry["checks"].items():
                    if not check["pass"]:
                        print(f"        {key}: expected {check['expected']},"
                              f" got {check['got']}"
                              f" [{check.get('failure_kind', '?')}]")
        s = report["summary"]
        print(f"\n{s['passed']}/{s['total']} claims verified"
              f" in {elapsed:.1f}s (seed {args.seed})")
    return 0 if report["summary"]["failed"] == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
