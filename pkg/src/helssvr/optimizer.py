"""Mini-batch Adam for the kernelized regression objective.

The trainer minimizes, over the coefficient vector alpha,

    H(alpha) = 1/2 * alpha^T K alpha + C * sum_i L(xi_i),
    xi_i = y_i - (K alpha)_i,

where K is the training Gram matrix and L any loss from
:mod:`helssvr.losses`.  Each iteration draws a fresh uniform mini-batch
without replacement; the quadratic term's gradient K alpha is computed
exactly every step, while the loss-sum gradient is restricted to the
batch rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix
from .losses import LossSpec, loss_derivative, loss_value
from .seeding import make_rng, sample_without_replacement


@dataclass(frozen=True)
class AdamConfig:
    """Adam hyperparameters and initial state scalars.

    Defaults: beta1=0.9, beta2=0.999, delta=1e-8, batch_size=32,
    max_iter=1000, and 0.01 for the initial coefficient and both moment
    vectors.  ``gamma`` is the learning rate; 0.01 is the largest value of
    the usual search set {1e-4, 1e-3, 1e-2}.
    """

    gamma: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    delta: float = 1e-8
    batch_size: int = 32
    max_iter: int = 1000
    alpha0: float = 0.01
    m0: float = 0.01
    v0: float = 0.01
    seed: int = 0
    collect_trace: bool = False
    early_stop: bool = False
    early_stop_tol: float = 1e-10
    early_stop_patience: int = 20

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("adam gamma must be > 0")
        if not 0 <= self.beta1 < 1:
            raise ValueError("adam beta1 must lie in [0, 1)")
        if not 0 <= self.beta2 < 1:
            raise ValueError("adam beta2 must lie in [0, 1)")
        if not self.delta > 0:
            raise ValueError("adam delta must be > 0")
        if self.batch_size < 1:
            raise ValueError("adam batch_size must be >= 1")
        if self.max_iter < 1:
            raise ValueError("adam max_iter must be >= 1")


@dataclass
class AdamState:
    """Coefficients plus both moment vectors and the step counter."""

    alpha: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    trace: list[float] | None = None


def objective_value(alpha, gram: GramMatrix, y, C: float, loss: LossSpec) -> float:
    """H(alpha) = 1/2 alpha^T K alpha + C * sum of losses at the residuals."""
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    K = gram.values
    Kalpha = K @ alpha
    xi = y - Kalpha
    return float(0.5 * alpha @ Kalpha + C * np.sum(loss_value(loss, xi)))


def objective_gradient(alpha, gram: GramMatrix, y, C: float, loss: LossSpec, batch) -> np.ndarray:
    """Gradient of H restricted to a mini-batch of loss terms.

    Returns K alpha + C * sum over the batch of the loss-term gradients,
    each of which is -dL/dxi_i times row i of K.  With the full index set
    as the batch this is the exact gradient of H.
    """
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    K = gram.values
    batch = np.asarray(batch, dtype=int)
    if batch.size and (batch.min() < 0 or batch.max() >= gram.n):
        raise ValueError("batch index out of range")
    Kalpha = K @ alpha
    xi = y[batch] - Kalpha[batch]
    d = loss_derivative(loss, xi)
    return Kalpha - C * (K[batch].T @ d)


def adam_step(state: AdamState, grad, cfg: AdamConfig) -> AdamState:
    """One Adam update; returns the new state with ``t`` incremented.

    Bias correction uses the post-increment step counter, and the
    stabilizer delta sits inside the square root:
    alpha <- alpha - gamma * m_hat / sqrt(v_hat + delta).
    """
    grad = np.asarray(grad, dtype=float)
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (grad * grad)
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    alpha = state.alpha - cfg.gamma * m_hat / np.sqrt(v_hat + cfg.delta)
    return AdamState(alpha=alpha, m=m, v=v, t=t, trace=state.trace)


def train_adam(gram: GramMatrix, y, C: float, loss: LossSpec, cfg: AdamConfig) -> AdamState:
    """Run ``cfg.max_iter`` Adam iterations and return the final state.

    A fresh mini-batch of size min(batch_size, N) is drawn uniformly
    without replacement at every iteration.  Residuals use the full
    coefficient vector against the batch's Gram rows.  The run is
    bit-reproducible for a fixed config (including the seed).

    When ``collect_trace`` is set, ``state.trace[t]`` holds H(alpha_t) for
    t = 0..T.  Optional early stopping ends the run once successive
    objective values differ by less than ``early_stop_tol`` for
    ``early_stop_patience`` consecutive iterations.
    """
    y = np.asarray(y, dtype=float)
    n = gram.n
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if y.shape != (n,):
        raise ValueError(f"target vector has shape {y.shape}, expected ({n},)")

    K = gram.values
    state = AdamState(
        alpha=np.full(n, float(cfg.alpha0)),
        m=np.full(n, float(cfg.m0)),
        v=np.full(n, float(cfg.v0)),
        t=0,
        trace=[] if cfg.collect_trace else None,
    )
    rng = make_rng(cfg.seed)
    s = min(cfg.batch_size, n)
    track = cfg.collect_trace or cfg.early_stop

    prev_h = None
    flat_run = 0
    stopped_early = False
    for _ in range(cfg.max_iter):
        Kalpha = K @ state.alpha
        if track:
            h = float(0.5 * state.alpha @ Kalpha + C * np.sum(loss_value(loss, y - Kalpha)))
            if cfg.collect_trace:
                state.trace.append(h)
            if cfg.early_stop and prev_h is not None:
                flat_run = flat_run + 1 if abs(h - prev_h) < cfg.early_stop_tol else 0
                if flat_run >= cfg.early_stop_patience:
                    stopped_early = True
                    break
            prev_h = h
        if s == n:
            # full batch: no draw, no row gather (K is symmetric)
            xi = y - Kalpha
            d = loss_derivative(loss, xi)
            grad = Kalpha - C * (K @ d)
        else:
            # canonical index order keeps the float summation order
            # independent of the draw
            batch = np.sort(sample_without_replacement(rng, n, s))
            xi = y[batch] - Kalpha[batch]
            d = loss_derivative(loss, xi)
            grad = Kalpha - C * (K[batch].T @ d)
        state = adam_step(state, grad, cfg)
    if cfg.collect_trace and not stopped_early:
        state.trace.append(objective_value(state.alpha, gram, y, C, loss))
    return state
