"""Weather series ingestion and preprocessing for the reference forecaster.

Loads a 10-minute-cadence weather CSV into a numeric feature matrix,
decomposing wind direction (degrees) into sine/cosine components so the
0/360 wrap-around does not appear as a discontinuity. Provides the
chronological train/test split, min-max scaling fitted on training rows only,
and the sliding-window transform that turns the series into fixed-length
inputs each predicting the next step's target values.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# loader aliases: canonical name -> accepted CSV header spellings
COLUMN_ALIASES: dict[str, tuple[str, ...]] = {
    "temp": ("temp", "temperature", "temp_avg"),
    "hum": ("hum", "humidity", "relative_humidity", "rh"),
    "windvel": ("windvel", "wind_vel", "wind-vel", "wind_speed", "windspeed"),
    "winddir": ("winddir", "wind_dir", "wind_direction", "winddir_deg"),
}

DEFAULT_TARGETS = ("temp", "hum", "windvel")

WIND_SIN = "winddir_sin"
WIND_COS = "winddir_cos"


class DatasetError(Exception):
    """The CSV could not be turned into a valid feature matrix."""


@dataclass
class WeatherDataset:
    """Numeric time-series matrix with named columns and target indices."""

    feature_matrix: np.ndarray  # rows = time steps, columns = features
    column_names: list[str]
    target_columns: list[int]

    def __post_init__(self) -> None:
        if self.feature_matrix.ndim != 2:
            raise DatasetError("feature matrix must be 2-D")
        if self.feature_matrix.shape[1] != len(self.column_names):
            raise DatasetError("column_names length does not match matrix width")
        if not self.target_columns:
            raise DatasetError("dataset has no target columns")
        for idx in self.target_columns:
            if not 0 <= idx < self.feature_matrix.shape[1]:
                raise DatasetError(f"target column index {idx} out of range")
        if not np.all(np.isfinite(self.feature_matrix)):
            raise DatasetError("feature matrix contains non-finite values")

    @property
    def row_count(self) -> int:
        return int(self.feature_matrix.shape[0])

    @property
    def target_names(self) -> list[str]:
        return [self.column_names[i] for i in self.target_columns]


def _resolve_column(header: list[str], canonical: str) -> int | None:
    lowered = [h.strip().lower() for h in header]
    for alias in COLUMN_ALIASES[canonical]:
        if alias in lowered:
            return lowered.index(alias)
    return None


def load_weather_csv(
    path: str | Path,
    target_names: tuple[str, ...] = DEFAULT_TARGETS,
    aliases: dict[str, tuple[str, ...]] | None = None,
) -> WeatherDataset:
    """Read a weather CSV into a WeatherDataset.

    Every non-timestamp column becomes a feature. A wind-direction column in
    degrees, when present, is replaced by its sine and cosine. A cell that is
    not numeric raises with the exact row and column so upstream data problems
    (the classic stray text in an otherwise numeric column) are diagnosable.
    """
    if aliases:
        merged = dict(COLUMN_ALIASES)
        merged.update(aliases)
        alias_map = merged
    else:
        alias_map = COLUMN_ALIASES

    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]

        # skip timestamp-ish columns, everything else must be numeric
        skip = {
            i
            for i, name in enumerate(header)
            if name.lower() in ("time", "timestamp", "date", "datetime")
        }
        kept = [i for i in range(len(header)) if i not in skip]
        kept_names = [header[i] for i in kept]

        rows: list[list[float]] = []
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {row_num} has {len(row)} cells, header has {len(header)}"
                )
            values = []
            for i in kept:
                cell = row[i].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric value {cell!r} at row {row_num}, "
                        f"column {header[i]!r}"
                    ) from None
            rows.append(values)

    if not rows:
        raise DatasetError(f"{path}: no data rows")
    matrix = np.asarray(rows, dtype=float)
    names = list(kept_names)

    lowered = [n.lower() for n in names]

    def find(canonical: str) -> int | None:
        for alias in alias_map[canonical]:
            if alias in lowered:
                return lowered.index(alias)
        return None

    dir_idx = find("winddir")
    has_components = WIND_SIN in lowered and WIND_COS in lowered
    if dir_idx is not None:
        radians = np.deg2rad(matrix[:, dir_idx])
        sin_col = np.sin(radians)
        cos_col = np.cos(radians)
        matrix = np.delete(matrix, dir_idx, axis=1)
        names.pop(dir_idx)
        matrix = np.column_stack([matrix, sin_col, cos_col])
        names.extend([WIND_SIN, WIND_COS])
    elif has_components:
        s = matrix[:, lowered.index(WIND_SIN)]
        c = matrix[:, lowered.index(WIND_COS)]
        bad = np.flatnonzero(np.abs(s**2 + c**2 - 1.0) > 1e-9)
        if bad.size:
            raise DatasetError(
                f"{path}: wind direction components at row {int(bad[0]) + 2} "
                "do not lie on the unit circle"
            )

    lowered = [n.lower() for n in names]
    target_columns = []
    for canonical in target_names:
        idx = None
        for alias in alias_map.get(canonical, (canonical,)):
            if alias in lowered:
                idx = lowered.index(alias)
                break
        if idx is None:
            raise DatasetError(f"{path}: missing target column {canonical!r}")
        target_columns.append(idx)

    return WeatherDataset(feature_matrix=matrix, column_names=names, target_columns=target_columns)


def split_train_test(
    ds: WeatherDataset, train_fraction: float, timesteps: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Chronological split: first ``train_fraction`` of rows train, the rest test.

    No shuffling; the test block is exactly the final rows. When ``timesteps``
    is given, both splits must be long enough to window.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = ds.row_count
    split = int(n * train_fraction)
    train, test = ds.feature_matrix[:split], ds.feature_matrix[split:]
    minimum = (timesteps + 1) if timesteps else 1
    if len(train) < minimum or len(test) < minimum:
        raise ValueError(
            f"too few rows to split {n} at {train_fraction} "
            f"(train {len(train)}, test {len(test)}, need >= {minimum} each)"
        )
    return train, test


@dataclass(frozen=True)
class ScalerState:
    """Per-column min/max fitted on the training rows only."""

    mins: np.ndarray
    maxs: np.ndarray

    @property
    def spans(self) -> np.ndarray:
        span = self.maxs - self.mins
        return np.where(span == 0.0, 1.0, span)

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalerState":
        return cls(mins=np.asarray(data["mins"], float), maxs=np.asarray(data["maxs"], float))


def fit_scaler(train_rows: np.ndarray) -> ScalerState:
    """Fit a min-max scaler on training rows. Constant columns get span 1."""
    train_rows = np.asarray(train_rows, dtype=float)
    if train_rows.ndim != 2 or train_rows.shape[0] < 1:
        raise ValueError("fit_scaler expects a nonempty 2-D matrix")
    mins = train_rows.min(axis=0)
    maxs = train_rows.max(axis=0)
    constant = np.flatnonzero(maxs == mins)
    if constant.size:
        warnings.warn(
            f"columns {constant.tolist()} are constant in the training rows; "
            "scaling them with span 1",
            stacklevel=2,
        )
    return ScalerState(mins=mins, maxs=maxs)


def transform(state: ScalerState, rows: np.ndarray) -> np.ndarray:
    """Map each column onto [0, 1] over the training range; values outside the
    range map outside [0, 1] unclipped."""
    return (np.asarray(rows, dtype=float) - state.mins) / state.spans


def inverse_transform(state: ScalerState, rows: np.ndarray) -> np.ndarray:
    """Exact inverse of ``transform``."""
    return np.asarray(rows, dtype=float) * state.spans + state.mins


def inverse_transform_columns(
    state: ScalerState, values: np.ndarray, columns: list[int]
) -> np.ndarray:
    """Inverse-scale a matrix whose columns correspond to the given indices."""
    values = np.asarray(values, dtype=float)
    cols = np.asarray(columns, dtype=int)
    return values * state.spans[cols] + state.mins[cols]


def make_windows(
    matrix: np.ndarray, timesteps: int, target_columns: list[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Slide a fixed-length window over the rows.

    Window k covers rows [k, k+timesteps) and its target is the target-column
    vector at row k+timesteps, giving ``rows - timesteps`` windows.
    """
    matrix = np.asarray(matrix, dtype=float)
    if timesteps < 1:
        raise ValueError(f"timesteps must be >= 1, got {timesteps}")
    n = matrix.shape[0]
    if n <= timesteps:
        raise ValueError(f"need more than {timesteps} rows to window, got {n}")
    count = n - timesteps
    inputs = np.stack([matrix[k : k + timesteps] for k in range(count)])
    targets = matrix[timesteps:, target_columns]
    return inputs, targets


def make_sine_dataset(
    rows: int = 2000, period: int = 50, level: float = 10.0, amplitude: float = 2.0
) -> WeatherDataset:
    """Noiseless sinusoid toy series used as the offline training benchmark.

    The level keeps all values well away from zero so MAPE stays meaningful.
    """
    t = np.arange(rows, dtype=float)
    values = level + amplitude * np.sin(2.0 * math.pi * t / period)
    return WeatherDataset(
        feature_matrix=values.reshape(-1, 1),
        column_names=["signal"],
        target_columns=[0],
    )


def write_dataset_csv(ds: WeatherDataset, path: str | Path) -> Path:
    """Write a dataset back to CSV (header + rows), mainly for fixtures."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(ds.column_names)
        for row in ds.feature_matrix:
            writer.writerow([repr(float(v)) for v in row])
    return path
