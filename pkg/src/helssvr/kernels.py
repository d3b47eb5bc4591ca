"""Kernel functions and dense Gram-matrix construction.

The RBF kernel uses the exp(-||x - z||^2 / sigma^2) parameterization.
Gram matrices are stored dense and row-major (8 * N^2 bytes); every row is
produced by the same code path as :func:`kernel_row`, so the two agree
bitwise and the matrix is exactly symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RBF = "rbf"
LINEAR = "linear"
KERNEL_KINDS = (RBF, LINEAR)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters (sigma is the RBF width)."""

    kind: str
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == RBF:
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise ValueError("rbf kernel requires sigma > 0")
        elif self.sigma is not None:
            raise ValueError("linear kernel does not take sigma")


def rbf(sigma: float) -> KernelSpec:
    return KernelSpec(RBF, sigma=sigma)


def linear() -> KernelSpec:
    return KernelSpec(LINEAR)


@dataclass(frozen=True)
class GramMatrix:
    """Dense N x N matrix of pairwise kernel values."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d sample matrix, got ndim={X.ndim}")
    return X


def kernel_row(spec: KernelSpec, x, X) -> np.ndarray:
    """Kernel values of one point ``x`` against every row of ``X``."""
    X = _as_matrix(X)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != X.shape[1]:
        raise ValueError(
            f"dimension mismatch: point has {x.shape[0]} features, matrix has {X.shape[1]}"
        )
    if spec.kind == LINEAR:
        return X @ x
    diff = X - x
    sq = np.einsum("ij,ij->i", diff, diff)
    return np.exp(-sq / (spec.sigma * spec.sigma))


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Kernel value of a single pair of points."""
    z = np.asarray(z, dtype=float).reshape(-1)
    return float(kernel_row(spec, x, z.reshape(1, -1))[0])


def gram_matrix(spec: KernelSpec, X) -> GramMatrix:
    """Pairwise kernel matrix of the rows of ``X``.

    Rows are filled one at a time through :func:`kernel_row`; construction
    is single-threaded and deterministic.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if n == 0:
        raise ValueError("gram matrix of an empty sample set")
    values = np.empty((n, n), dtype=float)
    for i in range(n):
        values[i] = kernel_row(spec, X[i], X)
    return GramMatrix(values)
