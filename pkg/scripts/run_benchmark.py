"""Per-corner timing and uncertainty versus the number of supporting points.

By default times corner 7 of a 1112-ray env_b_like scan (both supporting walls
have more than 230 points) over the ladder 10..230 step 10, and writes
``<prefix>.csv``, ``<prefix>.svg`` and, with ``--arras-fast``, the O(n) Arras
timings in ``<prefix>_arras_fast.csv``.

    python3 scripts/run_benchmark.py --out-prefix results/bench
"""

import argparse
from pathlib import Path

from csf.bench import emit_bench_report, environment_metadata, parse_ladder, ratio_series, run_corner_bench
from csf.fixtures import fixture_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-prefix", type=Path, default=Path("results/bench"))
    ap.add_argument("--ladder", default="10..230..10")
    ap.add_argument("--rays", type=int, default=1112)
    ap.add_argument("--corner", type=int, default=7)
    ap.add_argument("--reps", type=int, default=101)
    ap.add_argument("--arras-fast", action="store_true")
    args = ap.parse_args()
    args.out_prefix.parent.mkdir(parents=True, exist_ok=True)
    scan = fixture_scan("env_b_like", rays=args.rays)
    rows = run_corner_bench(scan, args.corner, parse_ladder(args.ladder), args.reps,
                            include_arras_fast=args.arras_fast)
    meta = environment_metadata(args.reps) + [("fixture", f"env_b_like, {args.rays} rays, corner {args.corner}")]
    for path in emit_bench_report(rows, args.out_prefix, meta):
        print("wrote", path)
    for row, ra, rs in zip(rows, ratio_series(rows, "arras"), ratio_series(rows, "siadat")):
        print(f"n={row.n_points:4d}  wclm {row.t_us['wclm']:8.1f} us  arras/wclm {ra:6.2f}  siadat/wclm {rs:5.2f}")


if __name__ == "__main__":
    main()
