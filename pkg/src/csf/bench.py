"""Per-corner timing and uncertainty as a function of the number of supporting points.

For every ladder entry ``n`` the two spans that support the chosen corner are
subsampled to ``n`` evenly spaced points each, and the full per-corner
pipeline (fit + covariance of both lines, corner, corner covariance) is timed
for every method.  Timing policy: ``WARMUP`` untimed calls per method, then
``repetitions`` rounds in which every method is timed once (round-robin, so
slow drifts of the machine affect all methods alike); each method reports the
median of its samples.  The clock is ``time.perf_counter_ns``, the garbage
collector is disabled while timing and the process is pinned to one CPU when
the platform supports it.  Inputs are prepared outside the timed region.
"""

from __future__ import annotations

import csv
import gc
import io
import os
import platform
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .corners import METHOD_TABLE, METHODS, CornerFeature, ExtractConfig, extract_feature_map
from .errors import ConfigError
from .fit_baselines import fit_arras_with_cov
from .fitinput import FitInput
from .scan import PolarScan
from .segmentation import SegmentSpan

WARMUP = 5
MIN_REPETITIONS = 31
CSV_COLUMNS = ("n_points", "t_wclm_us", "t_arras_us", "t_siadat_us",
               "sx_wclm_mm", "sy_wclm_mm", "sx_arras_mm", "sy_arras_mm",
               "sx_siadat_mm", "sy_siadat_mm")


@dataclass(frozen=True)
class BenchRow:
    n_points: int
    t_us: dict[str, float]              # median time per method
    sigma_mm: dict[str, tuple[float, float]]  # (sigma_x, sigma_y) per method

    def csv_row(self) -> list:
        row = [self.n_points] + [self.t_us[m] for m in METHODS]
        for m in METHODS:
            row += list(self.sigma_mm[m])
        return row


def parse_ladder(text: str) -> list[int]:
    """``"LO..HI..STEP"`` (inclusive) or a comma-separated list."""
    try:
        if ".." in text:
            parts = [int(p) for p in text.split("..")]
            if len(parts) != 3:
                raise ValueError
            lo, hi, step = parts
            if step <= 0 or lo > hi:
                raise ValueError
            ladder = list(range(lo, hi + 1, step))
        else:
            ladder = [int(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad ladder {text!r}; expected LO..HI..STEP, e.g. 10..130..10") from None
    if not ladder or min(ladder) < 2:
        raise ConfigError("ladder entries must be >= 2")
    return ladder


def even_subsample(count: int, n: int) -> np.ndarray:
    """``n`` evenly spaced positions in ``range(count)``, always keeping both ends."""
    if n > count:
        raise ConfigError(f"ladder entry {n} exceeds the {count} available points")
    return np.unique(np.round(np.linspace(0, count - 1, n)).astype(int))


def _pin_cpu() -> None:
    if hasattr(os, "sched_setaffinity"):
        try:
            cpus = sorted(os.sched_getaffinity(0))
            os.sched_setaffinity(0, {cpus[0]})
        except OSError:  # pragma: no cover - restricted containers
            pass


def time_calls(fns: dict[str, Callable[[], object]], repetitions: int,
               warmup: int = WARMUP) -> dict[str, float]:
    """Median wall time (microseconds) of each ``fn()``, timed round-robin."""
    for fn in fns.values():
        for _ in range(warmup):
            fn()
    samples: dict[str, list[int]] = {k: [] for k in fns}
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repetitions):
            for k, fn in fns.items():
                t0 = time.perf_counter_ns()
                fn()
                samples[k].append(time.perf_counter_ns() - t0)
    finally:
        if enabled:
            gc.enable()
    return {k: statistics.median(v) / 1000.0 for k, v in samples.items()}


def time_call(fn: Callable[[], object], repetitions: int, warmup: int = WARMUP) -> float:
    """Median wall time of ``fn()`` in microseconds."""
    return time_calls({"fn": fn}, repetitions, warmup)["fn"]


def corner_pipeline(method: str, in1: FitInput, in2: FitInput) -> CornerFeature:
    """Everything the benchmark times for one corner."""
    m = METHOD_TABLE[method]
    return m.corner_with_cov(m.fit(in1), m.fit(in2))


def _arras_fast_pipeline(in1: FitInput, in2: FitInput) -> CornerFeature:
    m = METHOD_TABLE["arras"]
    return m.corner_with_cov(fit_arras_with_cov(in1, False), fit_arras_with_cov(in2, False))


def corner_spans(scan: PolarScan, corner_id: int,
                 config: ExtractConfig | None = None) -> tuple[SegmentSpan, SegmentSpan]:
    fmap = extract_feature_map(scan, "wclm", config)
    if not 0 <= corner_id < len(fmap.corners):
        raise ConfigError(f"corner {corner_id} does not exist; the scan has {len(fmap.corners)} corners")
    i1, i2 = fmap.corners[corner_id].sources
    return fmap.spans[fmap.line_spans[i1]], fmap.spans[fmap.line_spans[i2]]


def bench_inputs(scan: PolarScan, spans: tuple[SegmentSpan, SegmentSpan], n: int,
                 unit_weights: bool = False) -> tuple[FitInput, FitInput]:
    out = []
    for span in spans:
        idx = span.indices(len(scan))[even_subsample(span.count, n)]
        out.append(FitInput.from_polar(scan.rho[idx], scan.theta[idx], scan.noise, unit_weights, span))
    return out[0], out[1]


def run_corner_bench(scan: PolarScan, corner_id: int, ladder: Sequence[int], repetitions: int = 101,
                     seed: int = 0, config: ExtractConfig | None = None,
                     include_arras_fast: bool = False, pin: bool = True) -> list[BenchRow]:
    """Time the three corner pipelines over ``ladder``.

    ``seed`` is accepted for interface symmetry: subsampling is evenly spaced
    and therefore independent of it.  With ``include_arras_fast`` the O(n)
    Arras variant is timed too, under the key ``"arras_fast"``.
    """
    if repetitions < MIN_REPETITIONS:
        raise ConfigError(f"repetitions must be >= {MIN_REPETITIONS}")
    ladder = list(ladder)
    if not ladder:
        raise ConfigError("empty ladder")
    cfg = config or ExtractConfig()
    spans = corner_spans(scan, corner_id, cfg)
    avail = min(s.count for s in spans)
    if max(ladder) > avail:
        raise ConfigError(f"ladder entry {max(ladder)} exceeds the {avail} points of the "
                          f"shorter span supporting corner {corner_id}")
    if pin:
        _pin_cpu()
    rows = []
    for n in ladder:
        in1, in2 = bench_inputs(scan, spans, n, cfg.unit_weights)
        sig = {}
        for m in METHODS:
            c = corner_pipeline(m, in1, in2)
            sig[m] = (c.sigma[0] * 1000.0, c.sigma[1] * 1000.0)
        fns = {m: (lambda m=m: corner_pipeline(m, in1, in2)) for m in METHODS}
        if include_arras_fast:
            fns["arras_fast"] = lambda: _arras_fast_pipeline(in1, in2)
        rows.append(BenchRow(n, time_calls(fns, repetitions), sig))
    return rows


# --- reports ---------------------------------------------------------------------

def environment_metadata(repetitions: int | None = None) -> list[tuple[str, str]]:
    meta = [
        ("python", platform.python_version()),
        ("implementation", platform.python_implementation()),
        ("numpy", np.__version__),
        ("machine", platform.machine()),
        ("processor", platform.processor() or "unknown"),
        ("system", f"{platform.system()} {platform.release()}"),
        ("cpu_count", str(os.cpu_count())),
        ("clock", "time.perf_counter_ns"),
        ("timing", f"median of repetitions (methods interleaved) after {WARMUP} warm-up calls, gc disabled"),
        ("scope", "fit + line covariance for both lines, corner, corner covariance"),
        ("arras_form", "O(n^2) double sums"),
    ]
    if repetitions is not None:
        meta.append(("repetitions", str(repetitions)))
    return meta


def _num(v) -> str:
    return str(v) if isinstance(v, int) else f"{v:.6g}"


def format_bench_csv(rows: Sequence[BenchRow], metadata: Sequence[tuple[str, str]] = ()) -> str:
    buf = io.StringIO()
    for k, v in metadata:
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_num(v) for v in r.csv_row()])
    return buf.getvalue()


def format_fast_csv(rows: Sequence[BenchRow], metadata: Sequence[tuple[str, str]] = ()) -> str:
    """Companion table comparing the O(n^2) and O(n) Arras forms."""
    buf = io.StringIO()
    for k, v in metadata:
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n_points", "t_wclm_us", "t_arras_us", "t_arras_fast_us"))
    for r in rows:
        w.writerow([r.n_points] + [_num(r.t_us[k]) for k in ("wclm", "arras", "arras_fast")])
    return buf.getvalue()


def read_bench_csv(path: str | os.PathLike) -> list[dict[str, float]]:
    with open(path, encoding="utf-8") as fh:
        body = [ln for ln in fh if not ln.startswith("#")]
    return [{k: float(v) for k, v in rec.items()} for rec in csv.DictReader(body)]


def emit_bench_report(rows: Sequence[BenchRow], prefix: str | os.PathLike,
                      metadata: Sequence[tuple[str, str]] | None = None) -> list[str]:
    """Write ``<prefix>.csv`` and ``<prefix>.svg`` (plus ``<prefix>_arras_fast.csv``)."""
    from .svg import bench_svg

    if not rows:
        raise ConfigError("no benchmark rows to report")
    meta = environment_metadata() if metadata is None else list(metadata)
    prefix = os.fspath(prefix)
    written = []
    with open(prefix + ".csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(format_bench_csv(rows, meta))
    written.append(prefix + ".csv")
    with open(prefix + ".svg", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(bench_svg(rows))
    written.append(prefix + ".svg")
    if all("arras_fast" in r.t_us for r in rows):
        with open(prefix + "_arras_fast.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(format_fast_csv(rows, meta))
        written.append(prefix + "_arras_fast.csv")
    return written


def ratio_series(rows: Sequence[BenchRow], num: str, den: str = "wclm") -> list[float]:
    return [r.t_us[num] / r.t_us[den] for r in rows]


def nondecreasing_within(series: Sequence[float], allowance: float) -> bool:
    """Each value is at least ``(1 - allowance)`` times its predecessor."""
    return all(b >= (1.0 - allowance) * a for a, b in zip(series, series[1:]))


def nonincreasing_within(series: Sequence[float], allowance: float) -> bool:
    return all(b <= (1.0 + allowance) * a for a, b in zip(series, series[1:]))

