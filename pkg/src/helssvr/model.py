"""The HE-LSSVR estimator and its baseline-loss variants.

Fitting builds the training Gram matrix, minimizes the kernel objective
with mini-batch Adam, and keeps the (scaled) training inputs so the model
is self-contained: prediction is f(x) = sum_k alpha_k K(x, x_k) followed
by inverse target scaling.  There is no separate bias term; centering, if
wanted, comes from the scaling layer.

Swapping the loss spec turns the same pipeline into any of the baseline
regressors (least squares, insensitive, ramp variants, ...).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .data import ScalingState, inverse_target, scale_features, scale_fit, scale_target
from .kernels import KernelSpec, gram_matrix, kernel_row
from .losses import LossSpec
from .optimizer import AdamConfig, objective_value, train_adam

MODEL_FORMAT = "helssvr-model-v1"


@dataclass
class TrainedModel:
    """Coefficients, retained training inputs, and scaling metadata."""

    alpha: np.ndarray
    X_train: np.ndarray  # stored in scaled space
    kernel: KernelSpec
    loss: LossSpec
    C: float
    scaling: ScalingState

    def predict(self, X_new) -> np.ndarray:
        return predict(self, X_new)


@dataclass
class FitReport:
    """Training summary: objective values, iterations, wall times."""

    final_objective: float
    initial_objective: float
    iterations: int
    wall_time_seconds: float
    gram_seconds: float
    trace: list[float] | None = None


def fit(
    X,
    y,
    kernel: KernelSpec,
    loss: LossSpec,
    C: float,
    adam: AdamConfig | None = None,
    scaling: str = "minmax",
) -> tuple[TrainedModel, FitReport]:
    """Train on (X, y); returns the model and a fit report.

    Scaling parameters are fit on this training data only.  The reported
    wall time covers the optimizer run; Gram construction is timed
    separately.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape} vs y {y.shape}")
    if X.shape[0] == 0:
        raise ValueError("cannot fit on an empty dataset")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("training data contains non-finite values")
    if not C > 0:
        raise ValueError("C must be > 0")
    if adam is None:
        adam = AdamConfig()

    state_scaling = scale_fit(X, y, scaling)
    Xs = scale_features(state_scaling, X)
    ys = scale_target(state_scaling, y)

    t0 = time.perf_counter()
    gram = gram_matrix(kernel, Xs)
    gram_seconds = time.perf_counter() - t0

    alpha0 = np.full(Xs.shape[0], float(adam.alpha0))
    initial_objective = objective_value(alpha0, gram, ys, C, loss)

    t1 = time.perf_counter()
    state = train_adam(gram, ys, C, loss, adam)
    wall = time.perf_counter() - t1

    final_objective = objective_value(state.alpha, gram, ys, C, loss)
    model = TrainedModel(
        alpha=state.alpha,
        X_train=Xs,
        kernel=kernel,
        loss=loss,
        C=float(C),
        scaling=state_scaling,
    )
    report = FitReport(
        final_objective=final_objective,
        initial_objective=initial_objective,
        iterations=state.t,
        wall_time_seconds=wall,
        gram_seconds=gram_seconds,
        trace=state.trace,
    )
    return model, report


def predict(model: TrainedModel, X_new) -> np.ndarray:
    """Predictions for new samples, in original target units.

    Each raw prediction is the dot product of a kernel row against the
    coefficients, computed through the same code path as the Gram rows.
    """
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new.reshape(-1, 1)
    if X_new.shape[1] != model.X_train.shape[1]:
        raise ValueError(
            f"feature count {X_new.shape[1]} does not match training data ({model.X_train.shape[1]})"
        )
    Xs = scale_features(model.scaling, X_new)
    raw = np.empty(Xs.shape[0])
    for i in range(Xs.shape[0]):
        raw[i] = kernel_row(model.kernel, Xs[i], model.X_train) @ model.alpha
    return inverse_target(model.scaling, raw)


# ---------------------------------------------------------------------------
# Serialization: one JSON document, canonical key order, full float
# precision via repr, so save -> load -> predict is bit-exact and two runs
# with the same seed produce byte-identical files.


def _scaling_to_doc(s: ScalingState) -> dict:
    return {
        "mode": s.mode,
        "feature_a": None if s.feature_a is None else s.feature_a.tolist(),
        "feature_b": None if s.feature_b is None else s.feature_b.tolist(),
        "target_a": s.target_a,
        "target_b": s.target_b,
    }


def _scaling_from_doc(doc: dict) -> ScalingState:
    return ScalingState(
        mode=doc["mode"],
        feature_a=None if doc["feature_a"] is None else np.asarray(doc["feature_a"], dtype=float),
        feature_b=None if doc["feature_b"] is None else np.asarray(doc["feature_b"], dtype=float),
        target_a=doc["target_a"],
        target_b=doc["target_b"],
    )


def model_to_json(model: TrainedModel) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "kernel": {"kind": model.kernel.kind, "sigma": model.kernel.sigma},
        "loss": {"kind": model.loss.kind, **model.loss.params()},
        "C": model.C,
        "scaling": _scaling_to_doc(model.scaling),
        "x_train": model.X_train.tolist(),
        "alpha": model.alpha.tolist(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def model_from_json(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    loss_doc = dict(doc["loss"])
    kind = loss_doc.pop("kind")
    return TrainedModel(
        alpha=np.asarray(doc["alpha"], dtype=float),
        X_train=np.asarray(doc["x_train"], dtype=float),
        kernel=KernelSpec(kind=doc["kernel"]["kind"], sigma=doc["kernel"]["sigma"]),
        loss=LossSpec(kind=kind, **loss_doc),
        C=float(doc["C"]),
        scaling=_scaling_from_doc(doc["scaling"]),
    )


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(model_to_json(model))


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())


__all__ = [
    "MODEL_FORMAT",
    "FitReport",
    "TrainedModel",
    "fit",
    "load_model",
    "model_from_json",
    "model_to_json",
    "objective_value",
    "predict",
    "save_model",
]
