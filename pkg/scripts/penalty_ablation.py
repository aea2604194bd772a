"""Penalty ablation on one severely warped dataset: no penalties, all
penalties, and shrinkage without the moment term.

    python scripts/penalty_ablation.py --seed 0 --svg ablation.svg
"""

import argparse
import time

from momalign.experiments import run_ablation
from momalign.svgplot import BLACK, Panel, Series, write_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-outer", type=int, default=20)
    ap.add_argument("--svg", default=None, help="write the synchronized curves of each fit")
    args = ap.parse_args()
    start = time.perf_counter()
    out = run_ablation(args.seed, max_outer_iters=args.max_outer)
    print(f"{'fit':>12} {'lambdas':>20} {'Sync':>8} {'sigma':>9} {'P(W)':>8}")
    fits = {"unpenalized": out.unpenalized, "full": out.full, "no moments": out.no_moments}
    for name, res in fits.items():
        m = res.metrics
        lam = f"{res.lambdas.sync:g},{res.lambdas.mom:g},{res.lambdas.w:g}"
        print(f"{name:>12} {lam:>20} {m['sync']:8.3f} {m['sigma']:9.5f} {m['mean_pw']:8.4f}")
    print(f"sigma(full) / sigma(unpenalized) = {out.sigma_ratio_full:.2f}")
    print(f"sigma(no moments) / sigma(full) = {out.sigma_ratio_no_moments:.2f}")
    print(f"{time.perf_counter() - start:.1f} s")
    if args.svg:
        panels = [Panel(name, [Series(r.grid, z) for z in r.synchronized]
                        + [Series(r.grid, r.synchronized.mean(axis=0), BLACK, 2.0)], "t", "Z")
                  for name, r in fits.items()]
        write_svg(args.svg, panels)


if __name__ == "__main__":
    main()
