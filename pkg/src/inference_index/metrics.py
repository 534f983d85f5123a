"""Forecasting error metrics between a prediction series and an observation series.

Provides the eight metrics used throughout the harness: MSE, MAE, mean bias,
MAPE (raw and masked), MFE, MFB, R2 and Pearson r, plus ``metric_report`` which
computes all of them at once for a single variable.

Conventions:
    - Bias sign is prediction minus observation (positive = overprediction).
    - MAPE, MFE and MFB are percent-scaled.
    - MAPE is reported twice: raw over every point, and masked with points
      where ``|obs| < mask_eps`` excluded, so near-zero blow-ups stay visible
      instead of being silently patched.
    - Statistics that are undefined for the given input (constant series, all
      points masked) come back as ``None`` rather than NaN. A raw MAPE over an
      exact-zero observation is ``inf``, never NaN.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_MASK_EPS = 0.1


@dataclass(frozen=True)
class MetricReport:
    """All eight error metrics for one predicted variable.

    ``mape_pct`` may be ``inf`` when an observation is exactly zero;
    ``mape_masked_pct``, ``r2`` and ``pearson_r`` are ``None`` when undefined.
    ``n_masked`` counts points excluded from the masked MAPE and
    ``n_zero_sum`` counts points excluded from MFE/MFB because
    ``pred + obs == 0``.
    """

    mse: float
    mae: float
    mb: float
    mape_pct: float
    mape_masked_pct: float | None
    mfe_pct: float | None
    mfb_pct: float | None
    r2: float | None
    pearson_r: float | None
    n_masked: int
    n_zero_sum: int

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "mae": self.mae,
            "mb": self.mb,
            "mape_pct": self.mape_pct,
            "mape_masked_pct": self.mape_masked_pct,
            "mfe_pct": self.mfe_pct,
            "mfb_pct": self.mfb_pct,
            "r2": self.r2,
            "pearson_r": self.pearson_r,
            "n_masked": self.n_masked,
            "n_zero_sum": self.n_zero_sum,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def _as_series(values: Sequence[float] | np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"{name} contains a non-finite value at index {bad}")
    return arr


def _paired(pred: Sequence[float], obs: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    p = _as_series(pred, "pred")
    o = _as_series(obs, "obs")
    if p.size != o.size:
        raise ValueError(f"length mismatch: pred has {p.size} points, obs has {o.size}")
    return p, o


def mse(pred: Sequence[float], obs: Sequence[float]) -> float:
    """Mean squared error, mean of (pred_i - obs_i)^2."""
    p, o = _paired(pred, obs)
    return float(np.mean((p - o) ** 2))


def mae(pred: Sequence[float], obs: Sequence[float]) -> float:
    """Mean absolute error, mean of |pred_i - obs_i|."""
    p, o = _paired(pred, obs)
    return float(np.mean(np.abs(p - o)))


def mean_bias(pred: Sequence[float], obs: Sequence[float]) -> float:
    """Mean of (pred_i - obs_i); positive means the predictions run high."""
    p, o = _paired(pred, obs)
    return float(np.mean(p - o))


def mape(
    pred: Sequence[float],
    obs: Sequence[float],
    mask_eps: float = DEFAULT_MASK_EPS,
) -> tuple[float, float | None, int]:
    """Mean absolute percentage error, raw and near-zero-masked.

    Raw MAPE averages ``|pred-obs| / |obs| * 100`` over every point; a point
    with ``obs == 0`` contributes ``inf`` (or 0 when the prediction is also
    exact), so division blow-ups surface instead of collapsing into NaN. The
    masked variant recomputes the mean excluding points with
    ``|obs| < mask_eps``.

    Args:
        pred: Predicted values.
        obs: Observed (ground truth) values.
        mask_eps: Exclusion threshold for the masked variant, in the units of
            the observed variable. Zero disables masking.

    Returns:
        ``(raw_pct, masked_pct, n_masked)``. ``masked_pct`` is ``None`` when
        every point falls under the mask.
    """
    if mask_eps < 0:
        raise ValueError(f"mask_eps must be >= 0, got {mask_eps}")
    p, o = _paired(pred, obs)
    abs_err = np.abs(p - o)
    abs_obs = np.abs(o)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = abs_err / abs_obs
    # exact zero observation: inf unless the prediction is exact too
    terms = np.where(abs_obs == 0.0, np.where(abs_err == 0.0, 0.0, np.inf), terms)
    raw = float(np.mean(terms) * 100.0)

    keep = abs_obs >= mask_eps
    n_masked = int(np.count_nonzero(~keep))
    masked = float(np.mean(terms[keep]) * 100.0) if n_masked < p.size else None
    return raw, masked, n_masked


def mfe_mfb(
    pred: Sequence[float], obs: Sequence[float]
) -> tuple[float | None, float | None, int]:
    """Mean fractional error and bias, factor-2 form, in percent.

    MFB averages ``(pred-obs) / ((pred+obs)/2) * 100``; MFE does the same with
    the absolute numerator. Points with ``pred + obs == 0`` have no defined
    fraction and are excluded; their count is returned.

    Returns:
        ``(mfe_pct, mfb_pct, n_zero_sum)``; the metrics are ``None`` when
        every point was excluded.
    """
    p, o = _paired(pred, obs)
    half_sum = (p + o) / 2.0
    keep = half_sum != 0.0
    n_zero_sum = int(np.count_nonzero(~keep))
    if n_zero_sum == p.size:
        return None, None, n_zero_sum
    diff = (p - o)[keep] / half_sum[keep]
    mfe = float(np.mean(np.abs(diff)) * 100.0)
    mfb = float(np.mean(diff) * 100.0)
    return mfe, mfb, n_zero_sum


def r_squared(pred: Sequence[float], obs: Sequence[float]) -> float | None:
    """Coefficient of determination, 1 - SS_res/SS_tot about the observation mean.

    Returns ``None`` when the observations are constant (SS_tot is zero).
    """
    p, o = _paired(pred, obs)
    if p.size < 2:
        raise ValueError("r_squared needs at least 2 points")
    ss_tot = float(np.sum((o - o.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    ss_res = float(np.sum((p - o) ** 2))
    return 1.0 - ss_res / ss_tot


def pearson_r(pred: Sequence[float], obs: Sequence[float]) -> float | None:
    """Sample Pearson correlation; ``None`` when either series is constant."""
    p, o = _paired(pred, obs)
    if p.size < 2:
        raise ValueError("pearson_r needs at least 2 points")
    dp = p - p.mean()
    do = o - o.mean()
    denom = math.sqrt(float(np.sum(dp * dp)) * float(np.sum(do * do)))
    if denom == 0.0:
        return None
    r = float(np.sum(dp * do)) / denom
    # guard against rounding pushing past the mathematical bounds
    return max(-1.0, min(1.0, r))


def metric_report(
    pred: Sequence[float],
    obs: Sequence[float],
    mask_eps: float = DEFAULT_MASK_EPS,
) -> MetricReport:
    """Compute all eight metrics for one variable in a single report.

    Per-metric undefined results propagate into the report as ``None`` without
    aborting the remaining metrics.
    """
    p, o = _paired(pred, obs)
    raw_mape, masked_mape, n_masked = mape(p, o, mask_eps)
    mfe_val, mfb_val, n_zero_sum = mfe_mfb(p, o)
    return MetricReport(
        mse=mse(p, o),
        mae=mae(p, o),
        mb=mean_bias(p, o),
        mape_pct=raw_mape,
        mape_masked_pct=masked_mape,
        mfe_pct=mfe_val,
        mfb_pct=mfb_val,
        r2=r_squared(p, o) if p.size >= 2 else None,
        pearson_r=pearson_r(p, o) if p.size >= 2 else None,
        n_masked=n_masked,
        n_zero_sum=n_zero_sum,
    )
