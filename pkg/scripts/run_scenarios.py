#!/usr/bin/env python3
"""Run every registered congruence scenario and write one JSON report per
scenario into an output directory, plus a combined summary table on stdout.

Usage:
    python scripts/run_scenarios.py [--out DIR] [--jobs N] [--only NAME ...]

Exit status is 0 iff every non-observation check in every report passed.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from asdlab.asdcheck import scenario, scenario_names


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports", help="output directory")
    ap.add_argument("--jobs", type=int, default=1, help="parallel scenarios")
    ap.add_argument("--only", nargs="*", help="subset of scenario names")
    args = ap.parse_args(argv)

    names = args.only or scenario_names()
    unknown = sorted(set(names) - set(scenario_names()))
    if unknown:
        ap.error(f"unknown scenario(s): {', '.join(unknown)}")

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(scenario, names))
    else:
        reports = [scenario(n) for n in names]

    all_ok = True
    width = max(len(n) for n in names)
    for name, rep in zip(names, reports):
        data = rep.to_dict()
        path = outdir / f"{name.replace('/', '_')}.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str))
        s = data["summary"]
        ok = rep.all_pass
        all_ok = all_ok and ok
        print(f"{name:<{width}}  pass={s['pass']:<4} fail={s['fail']:<3} "
              f"skip={s['skip']:<3} {'OK' if ok else 'FAIL'}  -> {path}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
