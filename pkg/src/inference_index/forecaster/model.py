"""From-scratch LSTM forecaster: forward pass, backpropagation through time, Adam.

A single recurrent layer with the four standard gates feeds a linear
projection that predicts the next step's target vector from a fixed-length
input window. Gate activations are always logistic sigmoid; the configurable
activation (ReLU by default, tanh optional) applies to the candidate vector
and to the cell-output squashing, matching the convention mainstream
frameworks use for a configurable "activation".

Training minimizes mean squared error over sequential mini-batches with the
Adam update, gradients computed by exact backpropagation through time.
Everything is plain float64 numpy; runs are bit-reproducible given the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .data import (
    ScalerState,
    WeatherDataset,
    fit_scaler,
    inverse_transform_columns,
    make_windows,
    split_train_test,
    transform,
)

MODEL_FORMAT_VERSION = 1

PARAM_KEYS = (
    "W_i", "W_f", "W_o", "W_g",
    "U_i", "U_f", "U_o", "U_g",
    "b_i", "b_f", "b_o", "b_g",
    "W_out", "b_out",
)


class TrainingDiverged(Exception):
    """Training loss became non-finite."""


@dataclass(frozen=True)
class ForecastConfig:
    """Hyperparameters of the reference forecaster."""

    units: int = 10
    activation: str = "relu"  # relu | tanh
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 16
    epochs: int = 10
    train_fraction: float = 0.9
    timesteps: int = 3
    seed: int = 0
    shuffle: bool = False
    validation_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.units < 1 or self.batch_size < 1 or self.epochs < 1 or self.timesteps < 1:
            raise ValueError("units, batch_size, epochs and timesteps must be positive")
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"activation must be 'relu' or 'tanh', got {self.activation!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")

    def to_dict(self) -> dict:
        return {
            "units": self.units,
            "activation": self.activation,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "adam_eps": self.adam_eps,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "train_fraction": self.train_fraction,
            "timesteps": self.timesteps,
            "seed": self.seed,
            "shuffle": self.shuffle,
            "validation_fraction": self.validation_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForecastConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


@dataclass
class LstmModel:
    """Trained weights plus the scaler and config needed to reuse them."""

    params: dict[str, np.ndarray]
    scaler: ScalerState
    config: ForecastConfig
    feature_names: list[str]
    target_names: list[str]
    target_columns: list[int]
    epoch_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        missing = [k for k in PARAM_KEYS if k not in self.params]
        if missing:
            raise ValueError(f"model is missing parameters {missing}")
        f, h = self.params["W_i"].shape
        k = self.params["W_out"].shape[1]
        expected = {
            **{name: (f, h) for name in ("W_i", "W_f", "W_o", "W_g")},
            **{name: (h, h) for name in ("U_i", "U_f", "U_o", "U_g")},
            **{name: (h,) for name in ("b_i", "b_f", "b_o", "b_g")},
            "W_out": (h, k),
            "b_out": (k,),
        }
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(
                    f"parameter {name} has shape {self.params[name].shape}, expected {shape}"
                )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activation_pair(name: str) -> tuple[Callable, Callable]:
    """Return (phi, phi_prime_from_preact)."""
    if name == "relu":
        return (lambda z: np.maximum(z, 0.0), lambda z: (z > 0.0).astype(float))
    return (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2)


def init_params(
    n_features: int, units: int, n_targets: int, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases, in a fixed draw order."""

    def glorot(fan_in: int, fan_out: int, shape: tuple[int, ...]) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape)

    params: dict[str, np.ndarray] = {}
    for gate in ("i", "f", "o", "g"):
        params[f"W_{gate}"] = glorot(n_features, units, (n_features, units))
        params[f"U_{gate}"] = glorot(units, units, (units, units))
        params[f"b_{gate}"] = np.zeros(units)
    params["W_out"] = glorot(units, n_targets, (units, n_targets))
    params["b_out"] = np.zeros(n_targets)
    return params


def forward_batch(
    params: dict[str, np.ndarray], windows: np.ndarray, activation: str
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[dict]]:
    """Run the recurrence over a batch of windows.

    Args:
        params: Weight dictionary (see PARAM_KEYS).
        windows: Array of shape (batch, timesteps, features).
        activation: 'relu' or 'tanh'.

    Returns:
        Hidden states (batch, timesteps, units), cell states of the same
        shape, predictions (batch, targets), and the per-step caches the
        backward pass needs.
    """
    phi, _ = _activation_pair(activation)
    windows = np.asarray(windows, dtype=float)
    if windows.ndim != 3:
        raise ValueError(f"windows must be 3-D (batch, timesteps, features), got {windows.shape}")
    batch, timesteps, n_features = windows.shape
    if n_features != params["W_i"].shape[0]:
        raise ValueError(
            f"window has {n_features} features, model expects {params['W_i'].shape[0]}"
        )
    units = params["W_i"].shape[1]

    h = np.zeros((batch, units))
    c = np.zeros((batch, units))
    hs = np.empty((batch, timesteps, units))
    cs = np.empty((batch, timesteps, units))
    caches: list[dict] = []
    for t in range(timesteps):
        x = windows[:, t, :]
        gate_i = _sigmoid(x @ params["W_i"] + h @ params["U_i"] + params["b_i"])
        gate_f = _sigmoid(x @ params["W_f"] + h @ params["U_f"] + params["b_f"])
        gate_o = _sigmoid(x @ params["W_o"] + h @ params["U_o"] + params["b_o"])
        a_g = x @ params["W_g"] + h @ params["U_g"] + params["b_g"]
        g = phi(a_g)
        c_new = gate_f * c + gate_i * g
        act_c = phi(c_new)
        h_new = gate_o * act_c
        caches.append(
            {
                "x": x, "h_prev": h, "c_prev": c,
                "i": gate_i, "f": gate_f, "o": gate_o,
                "a_g": a_g, "g": g, "c": c_new, "act_c": act_c,
            }
        )
        h, c = h_new, c_new
        hs[:, t, :] = h
        cs[:, t, :] = c
    preds = h @ params["W_out"] + params["b_out"]
    return hs, cs, preds, caches


def lstm_forward(model: LstmModel, window: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward one window of shape (timesteps, features).

    Returns the per-step hidden states, cell states, and the prediction
    vector (one value per target).
    """
    window = np.asarray(window, dtype=float)
    if window.ndim != 2:
        raise ValueError(f"window must be 2-D (timesteps, features), got {window.shape}")
    hs, cs, preds, _ = forward_batch(model.params, window[None, :, :], model.config.activation)
    return hs[0], cs[0], preds[0]


def backward_batch(
    params: dict[str, np.ndarray],
    caches: list[dict],
    preds: np.ndarray,
    targets: np.ndarray,
    activation: str,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss and its exact gradients through time."""
    _, phi_prime = _activation_pair(activation)
    batch, n_targets = preds.shape
    diff = preds - targets
    loss = float(np.mean(diff**2))
    dpreds = 2.0 * diff / (batch * n_targets)

    grads = {k: np.zeros_like(v) for k, v in params.items()}
    h_last = caches[-1]["o"] * caches[-1]["act_c"]
    grads["W_out"] = h_last.T @ dpreds
    grads["b_out"] = dpreds.sum(axis=0)
    dh = dpreds @ params["W_out"].T
    dc = np.zeros_like(dh)

    for cache in reversed(caches):
        gate_i, gate_f, gate_o, g = cache["i"], cache["f"], cache["o"], cache["g"]
        d_o = dh * cache["act_c"]
        dc = dc + dh * gate_o * phi_prime(cache["c"])
        d_i = dc * g
        d_g = dc * gate_i
        d_f = dc * cache["c_prev"]
        da_i = d_i * gate_i * (1.0 - gate_i)
        da_f = d_f * gate_f * (1.0 - gate_f)
        da_o = d_o * gate_o * (1.0 - gate_o)
        da_g = d_g * phi_prime(cache["a_g"])

        x, h_prev = cache["x"], cache["h_prev"]
        for gate, da in (("i", da_i), ("f", da_f), ("o", da_o), ("g", da_g)):
            grads[f"W_{gate}"] += x.T @ da
            grads[f"U_{gate}"] += h_prev.T @ da
            grads[f"b_{gate}"] += da.sum(axis=0)
        dh = da_i @ params["U_i"].T + da_f @ params["U_f"].T \
            + da_o @ params["U_o"].T + da_g @ params["U_g"].T
        dc = dc * gate_f
    return loss, grads


class AdamState:
    """First/second moment accumulators for the Adam update."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        for k in params:
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grads[k]
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grads[k] ** 2
            m_hat = self.m[k] / bias1
            v_hat = self.v[k] / bias2
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(ds: WeatherDataset, cfg: ForecastConfig) -> LstmModel:
    """Train the forecaster on the chronological training split of ``ds``.

    The scaler is fitted on training rows only; windows are consumed in
    sequential mini-batches (the last partial batch kept) unless the shuffle
    flag is set. Per-epoch mean training loss is recorded on the model.
    Raises TrainingDiverged with the epoch and batch if the loss goes
    non-finite.
    """
    train_rows, _ = split_train_test(ds, cfg.train_fraction, cfg.timesteps)
    scaler = fit_scaler(train_rows)
    scaled = transform(scaler, train_rows)
    inputs, targets = make_windows(scaled, cfg.timesteps, ds.target_columns)

    val_inputs = val_targets = None
    if cfg.validation_fraction > 0.0:
        holdout = int(len(inputs) * cfg.validation_fraction)
        if holdout >= 1:
            val_inputs, val_targets = inputs[-holdout:], targets[-holdout:]
            inputs, targets = inputs[:-holdout], targets[:-holdout]
    if len(inputs) == 0:
        raise ValueError("no training windows left after validation holdout")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(scaled.shape[1], cfg.units, len(ds.target_columns), rng)
    adam = AdamState(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)

    model = LstmModel(
        params=params,
        scaler=scaler,
        config=cfg,
        feature_names=list(ds.column_names),
        target_names=list(ds.target_names),
        target_columns=list(ds.target_columns),
    )
    n = len(inputs)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total_loss = 0.0
        for batch_idx, start in enumerate(range(0, n, cfg.batch_size)):
            sel = order[start : start + cfg.batch_size]
            # overflow here surfaces as a non-finite loss and aborts below
            with np.errstate(over="ignore", invalid="ignore"):
                _, _, preds, caches = forward_batch(params, inputs[sel], cfg.activation)
                loss, grads = backward_batch(params, caches, preds, targets[sel], cfg.activation)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"loss became non-finite at epoch {epoch + 1}, batch {batch_idx + 1}"
                )
            adam.step(params, grads)
            total_loss += loss * len(sel)
        model.epoch_losses.append(total_loss / n)
        if val_inputs is not None:
            _, _, vpred, _ = forward_batch(params, val_inputs, cfg.activation)
            model.val_losses.append(float(np.mean((vpred - val_targets) ** 2)))
    return model


def predict(model: LstmModel, test_rows: np.ndarray) -> dict[str, np.ndarray]:
    """Predict each target over the test rows, denormalized to original units.

    One prediction per window: ``len(test_rows) - timesteps`` values per
    target, aligned with test rows ``timesteps:``.
    """
    cfg = model.config
    scaled = transform(model.scaler, np.asarray(test_rows, dtype=float))
    inputs, _ = make_windows(scaled, cfg.timesteps, model.target_columns)
    _, _, preds, _ = forward_batch(model.params, inputs, cfg.activation)
    denorm = inverse_transform_columns(model.scaler, preds, model.target_columns)
    return {name: denorm[:, j] for j, name in enumerate(model.target_names)}


def save_model(model: LstmModel, path: str | Path) -> Path:
    """Persist weights + scaler + config in one self-describing .npz file."""
    path = Path(path)
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "scaler": model.scaler.to_dict(),
        "feature_names": model.feature_names,
        "target_names": model.target_names,
        "target_columns": model.target_columns,
        "epoch_losses": model.epoch_losses,
        "val_losses": model.val_losses,
    }
    arrays = {f"param__{k}": v for k, v in model.params.items()}
    np.savez(path, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)
    return path


def load_model(path: str | Path) -> LstmModel:
    with np.load(Path(path)) as bundle:
        meta = json.loads(bundle["meta"].tobytes().decode("utf-8"))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {meta.get('format_version')!r}")
        params = {
            key[len("param__"):]: bundle[key] for key in bundle.files if key.startswith("param__")
        }
    model = LstmModel(
        params=params,
        scaler=ScalerState.from_dict(meta["scaler"]),
        config=ForecastConfig.from_dict(meta["config"]),
        feature_names=list(meta["feature_names"]),
        target_names=list(meta["target_names"]),
        target_columns=list(meta["target_columns"]),
        epoch_losses=list(meta["epoch_losses"]),
        val_losses=list(meta["val_losses"]),
    )
    return model


def train_and_predict(
    ds: WeatherDataset, cfg: ForecastConfig
) -> tuple[LstmModel, dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Convenience pipeline: train, predict the test block, return truths too."""
    model = train(ds, cfg)
    _, test_rows = split_train_test(ds, cfg.train_fraction, cfg.timesteps)
    predictions = predict(model, test_rows)
    truth_matrix = test_rows[cfg.timesteps :, :][:, model.target_columns]
    truths = {name: truth_matrix[:, j] for j, name in enumerate(model.target_names)}
    return model, predictions, truths
