"""Desk-scale four-scenario comparison of the moments method and baselines.

    python scripts/scenario_comparison.py --datasets 20 --methods moments,cmr
"""

import argparse
import logging
import time
from dataclasses import replace

from momalign.experiments import ComparisonSetup, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--datasets", type=int, default=20)
    ap.add_argument("--kinds", default="one,two,three,four")
    ap.add_argument("--methods", default="moments,cmr,landmark")
    ap.add_argument("--family", default="standardized", choices=("linear", "standardized"))
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    setup = replace(ComparisonSetup(), n_datasets=args.datasets, family=args.family)
    start = time.perf_counter()
    print(f"{'scenario':>8} {'method':>9} {'Sync':>9} {'sigma':>9} {'lambdas':>24} {'sec':>6}")
    for kind in args.kinds.split(","):
        for method in args.methods.split(","):
            s = run_scenario(setup, kind, method)
            lam = "-" if s.lambdas is None else ",".join(f"{v:g}" for v in s.lambdas)
            print(f"{kind:>8} {method:>9} {s.mean_sync:9.4f} {s.mean_sigma:9.5f} {lam:>24} "
                  f"{s.seconds:6.1f}", flush=True)
    print(f"total {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
