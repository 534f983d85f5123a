"""Aggregation of per-framework results into comparison tables, plot series and rankings.

Holds full-precision values everywhere; rounding happens only when rendering
(4 decimals for error metrics, 2 for indices). Plot output is data files
(CSV), not images: rendering belongs to the UI or external tools.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .indices import InIReport
from .metrics import MetricReport

METRIC_FIELDS = (
    "mse",
    "mae",
    "mb",
    "mape_pct",
    "mape_masked_pct",
    "mfe_pct",
    "mfb_pct",
    "r2",
    "pearson_r",
)

METRIC_RENDER_DECIMALS = 4
INDEX_RENDER_DECIMALS = 2


@dataclass(frozen=True)
class PlotWindow:
    """Index range [start, end) into the test series for a zoomed plot."""

    start_index: int
    end_index: int

    def __post_init__(self) -> None:
        if not 0 <= self.start_index < self.end_index:
            raise ValueError(
                f"plot window must satisfy 0 <= start < end, got "
                f"[{self.start_index}, {self.end_index})"
            )


@dataclass(frozen=True)
class FrameworkResult:
    """Everything scored for one framework: per-variable metrics plus indices."""

    framework_label: str
    metric_reports: Mapping[str, MetricReport]  # variable name -> report
    ini_report: InIReport
    session_ref: str = ""

    def __post_init__(self) -> None:
        if not self.metric_reports:
            raise ValueError("metric_reports must not be empty")
        masked = [r.mape_masked_pct for r in self.metric_reports.values()]
        if any(v is None for v in masked):
            raise ValueError("all per-variable masked MAPEs must be defined")
        mean_masked = sum(masked) / len(masked)
        if not math.isclose(mean_masked, self.ini_report.mape_av_pct, rel_tol=0, abs_tol=1e-9):
            raise ValueError(
                f"ini_report.mape_av_pct ({self.ini_report.mape_av_pct}) does not equal the "
                f"mean of per-variable masked MAPEs ({mean_masked})"
            )


def mape_average(metric_reports: Mapping[str, MetricReport]) -> float:
    """Arithmetic mean of the per-variable masked MAPEs, the accuracy input."""
    masked = [r.mape_masked_pct for r in metric_reports.values()]
    if not masked or any(v is None for v in masked):
        raise ValueError("every variable needs a defined masked MAPE")
    return sum(masked) / len(masked)


def comparison_table(results: Sequence[FrameworkResult], metric: str) -> dict:
    """One row per framework, one column per variable, for the named metric.

    Cell values are the stored full-precision metric fields; consumers round
    at render time.
    """
    if not results:
        raise ValueError("comparison_table needs at least one result")
    if metric not in METRIC_FIELDS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRIC_FIELDS}")
    variables = list(results[0].metric_reports.keys())
    for result in results:
        if list(result.metric_reports.keys()) != variables:
            raise ValueError(
                f"framework {result.framework_label!r} reports variables "
                f"{list(result.metric_reports)} but expected {variables}"
            )
    rows = [
        {
            "framework": r.framework_label,
            "values": [getattr(r.metric_reports[v], metric) for v in variables],
        }
        for r in results
    ]
    return {"metric": metric, "variables": variables, "rows": rows}


def rank(results: Sequence[FrameworkResult]) -> list[FrameworkResult]:
    """Order by inference index, highest first; ties break on the label."""
    if not results:
        raise ValueError("rank needs at least one result")
    return sorted(results, key=lambda r: (-r.ini_report.ini, r.framework_label))


def ranking_table(results: Sequence[FrameworkResult]) -> list[dict]:
    return [
        {"framework": r.framework_label, **r.ini_report.to_dict()} for r in rank(results)
    ]


def emit_plot_series(
    truth: Sequence[float],
    predictions: Mapping[str, Sequence[float]],
    windows: Sequence[PlotWindow],
    out_dir: str | Path,
    variable: str = "series",
) -> list[Path]:
    """Write plot-ready CSVs: the full range plus one file per focus window.

    Columns are (index, truth, one column per framework). All prediction
    series must match the truth's length; windows must fit inside it.
    """
    truth_arr = np.asarray(truth, dtype=float)
    n = truth_arr.size
    series = {}
    for name, values in predictions.items():
        arr = np.asarray(values, dtype=float)
        if arr.size != n:
            raise ValueError(
                f"prediction series {name!r} has {arr.size} points, truth has {n}"
            )
        series[name] = arr
    for window in windows:
        if window.end_index > n:
            raise ValueError(
                f"plot window [{window.start_index}, {window.end_index}) exceeds "
                f"series length {n}"
            )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frameworks = list(series.keys())

    def write(path: Path, start: int, end: int) -> Path:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["index", "truth", *frameworks])
            for i in range(start, end):
                writer.writerow(
                    [i, repr(float(truth_arr[i])), *(repr(float(series[f][i])) for f in frameworks)]
                )
        return path

    paths = [write(out_dir / f"{variable}_full.csv", 0, n)]
    for window in windows:
        name = f"{variable}_{window.start_index}_{window.end_index}.csv"
        paths.append(write(out_dir / name, window.start_index, window.end_index))
    return paths


def render_metric(value: float | None) -> str:
    """4-decimal display form; undefined renders as 'undefined', inf as 'inf'."""
    if value is None:
        return "undefined"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{METRIC_RENDER_DECIMALS}f}"


def render_index(value: float) -> str:
    """2-decimal display form used for the index family."""
    return f"{value:.{INDEX_RENDER_DECIMALS}f}"


def jsonable(value):
    """Map report values onto strict-JSON types: inf -> 'inf', None -> null."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):  # should not happen; fail loudly downstream
            raise ValueError("NaN has no JSON representation in reports")
        return value
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value
