"""SVG feature maps (points, lines, corners, 3-sigma ellipses) for every fixture and method.

    python3 scripts/make_figures.py --out-dir results/figures
"""

import argparse
from pathlib import Path

from csf.corners import METHODS, extract_feature_map
from csf.fixtures import FIXTURE_SPECS, fixture_scan
from csf.svg import map_svg


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results/figures"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for world in FIXTURE_SPECS:
        scan = fixture_scan(world, seed=args.seed)
        for m in METHODS:
            fmap = extract_feature_map(scan, m)
            path = args.out_dir / f"{world}_{m}.svg"
            path.write_text(map_svg(fmap, scan))
            print(f"{path}: {len(fmap.lines)} lines, {len(fmap.corners)} corners")


if __name__ == "__main__":
    main()
