"""Command-line interface: ``csf generate | extract | compare | bench | plot``.

Human-entered angles are in degrees and converted at this boundary; every
file uses meters and radians.  Exit codes: 0 success, 2 usage or
configuration error, 3 invalid input, 4 degenerate geometry, 5 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings

from . import __version__
from .bench import MIN_REPETITIONS, emit_bench_report, environment_metadata, parse_ladder, run_corner_bench
from .compare import compare_methods, format_comparison
from .corners import DEFAULT_GATE_M, METHODS, ExtractConfig, extract_feature_map
from .errors import CSFError, ConfigError, UnreliableCovarianceWarning
from .featureio import check_matches_scan, load_feature_map, save_feature_map
from .fixtures import FIXTURE_NOISE, FIXTURE_SPECS
from .scan import DEFAULT_SIGMA_RHO, DEFAULT_SIGMA_THETA, NoiseModel, load_scan, save_scan
from .segmentation import DEFAULT_MAX_RANGE_M, DEFAULT_MIN_POINTS, DEFAULT_THRESHOLD_M
from .svg import map_svg
from .world import Pose, cast_scan, load_world

EXIT_IO = 5
SEED_ENV = "CSF_SEED"


def _seed_default() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _pose(text: str) -> Pose:
    try:
        x, y, h = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,HEADING_DEG, got {text!r}") from None
    return Pose(x, y, math.radians(h))


def _config(args) -> ExtractConfig:
    if args.threshold_mm <= 0:
        raise ConfigError("--threshold-mm must be > 0")
    if args.min_points < 2:
        raise ConfigError("--min-points must be >= 2")
    if args.gate_m <= 0:
        raise ConfigError("--gate-m must be > 0")
    return ExtractConfig(threshold_m=args.threshold_mm / 1000.0, min_points=args.min_points,
                         gate_m=args.gate_m, max_range_m=args.max_range_m,
                         unit_weights=args.unit_weights)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- commands -----------------------------------------------------------------------

def cmd_generate(args) -> int:
    world = load_world(args.world)
    spec = FIXTURE_SPECS.get(args.world) if not os.path.exists(args.world) else None
    pose = args.pose or (spec.pose if spec else Pose())
    rays = args.rays or (spec.rays if spec else 360)
    if rays < 1:
        raise ConfigError("--rays must be >= 1")
    seed = args.seed if args.seed is not None else _seed_default()
    sensor = NoiseModel(args.sigma_rho_m, math.radians(args.sigma_theta_deg))
    if args.exact:
        applied = (0.0, 0.0)
    elif args.applied_sigma_rho_m is not None or args.applied_sigma_theta_deg is not None:
        applied = (args.applied_sigma_rho_m if args.applied_sigma_rho_m is not None else sensor.sigma_rho,
                   math.radians(args.applied_sigma_theta_deg) if args.applied_sigma_theta_deg is not None
                   else sensor.sigma_theta)
    elif spec is not None:
        applied = spec.noise if spec.noise is not None else FIXTURE_NOISE
    else:
        applied = (sensor.sigma_rho, sensor.sigma_theta)
    scan = cast_scan(world, pose, rays, applied, seed, sensor=sensor)
    save_scan(scan, args.out)
    print(f"{args.out}: {len(scan)} points from {rays} rays")
    return 0


def cmd_extract(args) -> int:
    scan = load_scan(args.scan)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnreliableCovarianceWarning)
        fmap = extract_feature_map(scan, args.method, _config(args))
    fmap.diagnostics.extend(f"warning: {w.message}" for w in caught)
    save_feature_map(fmap, args.out)
    print(f"{args.out}: {len(fmap.lines)} lines, {len(fmap.corners)} corners ({args.method})")
    for d in fmap.diagnostics:
        print(f"  {d}", file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    scan = load_scan(args.scan)
    report = compare_methods(scan, _config(args))
    _write_text(args.out, format_comparison(report))
    means = ", ".join(f"{m} {report.pooled_mean_sigma_mm(m):.3f} mm" for m in report.maps)
    print(f"{args.out}: {len(report.rows)} corners; mean sigma {means}")
    return 0


def cmd_bench(args) -> int:
    if args.reps < MIN_REPETITIONS:
        raise ConfigError(f"--reps must be >= {MIN_REPETITIONS}")
    scan = load_scan(args.scan)
    ladder = parse_ladder(args.ladder)
    seed = args.seed if args.seed is not None else _seed_default()
    rows = run_corner_bench(scan, args.corner, ladder, args.reps, seed, _config(args),
                            include_arras_fast=args.arras_fast)
    files = emit_bench_report(rows, args.out_prefix, environment_metadata(args.reps))
    print("wrote " + ", ".join(files))
    return 0


def cmd_plot(args) -> int:
    scan = load_scan(args.scan)
    fmap = load_feature_map(args.features)
    check_matches_scan(fmap, scan)
    _write_text(args.out, map_svg(fmap, scan))
    print(f"{args.out}: {len(fmap.corners)} corners")
    return 0


# --- parser -------------------------------------------------------------------------

def _add_extract_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold-mm", type=float, default=DEFAULT_THRESHOLD_M * 1000.0,
                   help="line-tracking distance threshold in mm (default %(default)g: the "
                        "published segmentation threshold)")
    p.add_argument("--min-points", type=int, default=DEFAULT_MIN_POINTS,
                   help="minimum points per segment (default %(default)s: toolkit choice)")
    p.add_argument("--gate-m", type=float, default=DEFAULT_GATE_M,
                   help="a corner must lie within this distance of both spans' ends "
                        "(default %(default)s m: toolkit choice)")
    p.add_argument("--max-range-m", type=float, default=DEFAULT_MAX_RANGE_M,
                   help="ranges beyond this are discarded (default %(default)s m: sensor "
                        "maximum range)")
    p.add_argument("--unit-weights", action="store_true",
                   help="fit with unit weights instead of the range-dependent point weights")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csf", description="2D LiDAR line and corner extraction with propagated uncertainty.",
        epilog=f"Seeds default to ${SEED_ENV} when set, else 0.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="ray-cast a synthetic scan of a polygonal world",
                       description="Ray-cast a synthetic scan. For a shipped fixture "
                                   f"({', '.join(FIXTURE_SPECS)}) the pose, ray count and applied "
                                   "noise default to the fixture's values.")
    p.add_argument("--world", required=True, help="world file (x1 y1 x2 y2 per line) or fixture name")
    p.add_argument("--pose", type=_pose, default=None,
                   help="sensor pose X,Y,HEADING in m, m, degrees (default: fixture pose, else 0,0,0)")
    p.add_argument("--rays", type=int, default=None,
                   help="rays per sweep (default: fixture ray budget, else 360)")
    p.add_argument("--seed", type=int, default=None, help=f"noise seed (default ${SEED_ENV} or 0)")
    p.add_argument("--sigma-rho-m", type=float, default=DEFAULT_SIGMA_RHO,
                   help="sensor range noise recorded in the scan (default %(default)s m: "
                        "RPLiDAR S1 range accuracy)")
    p.add_argument("--sigma-theta-deg", type=float, default=math.degrees(DEFAULT_SIGMA_THETA),
                   help="sensor bearing noise recorded in the scan (default %(default).4f deg: "
                        "half the RPLiDAR S1 angular resolution)")
    p.add_argument("--applied-sigma-rho-m", type=float, default=None,
                   help="range noise actually applied (default: fixture noise "
                        f"{FIXTURE_NOISE[0]} m for fixtures, else the sensor noise)")
    p.add_argument("--applied-sigma-theta-deg", type=float, default=None,
                   help="bearing noise actually applied (default: fixture noise "
                        f"{math.degrees(FIXTURE_NOISE[1]):.4f} deg for fixtures, else the sensor noise)")
    p.add_argument("--exact", action="store_true", help="apply no noise at all")
    p.add_argument("--out", required=True, help="output scan file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="segment a scan and extract lines and corners")
    p.add_argument("--scan", required=True)
    p.add_argument("--method", choices=METHODS, default="wclm",
                   help="line model (default %(default)s)")
    _add_extract_options(p)
    p.add_argument("--out", required=True, help="output feature file (JSON)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compare", help="per-corner uncertainty table for all three methods")
    p.add_argument("--scan", required=True)
    _add_extract_options(p)
    p.add_argument("--out", required=True, help="output table (TSV)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="time and uncertainty of one corner versus points per line")
    p.add_argument("--scan", required=True)
    p.add_argument("--corner", type=int, required=True, help="corner index in the wclm feature map")
    p.add_argument("--ladder", default="10..130..10",
                   help="points per line, LO..HI..STEP or a list (default %(default)s: the "
                        "published timing table)")
    p.add_argument("--reps", type=int, default=101,
                   help=f"timed repetitions per point (default %(default)s; minimum {MIN_REPETITIONS})")
    p.add_argument("--seed", type=int, default=None, help=f"seed (default ${SEED_ENV} or 0)")
    p.add_argument("--arras-fast", action="store_true",
                   help="also time the O(n) Arras form, written to <prefix>_arras_fast.csv")
    _add_extract_options(p)
    p.add_argument("--out-prefix", required=True, help="writes <prefix>.csv and <prefix>.svg")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="render a feature map over its scan as SVG")
    p.add_argument("--features", required=True)
    p.add_argument("--scan", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CSFError as exc:
        print(f"csf {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"csf {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
