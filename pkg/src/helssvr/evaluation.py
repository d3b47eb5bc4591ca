"""Metrics, cross-validated grid search, and rank statistics.

The metrics are RMSE, MAE, and the signed-group errors (mean absolute
residual over the under- and over-prediction groups separately; an empty
group is reported as absent, not zero).

Model comparison across datasets uses average ranks with a chi-square
rank test, its F-distributed refinement, and a critical-difference
post-hoc threshold for pairwise verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from . import losses
from .data import Dataset, kfold_split
from .kernels import KernelSpec
from .losses import LossSpec
from .model import FitReport, fit, predict
from .optimizer import AdamConfig
from .seeding import child_seed


@dataclass(frozen=True)
class MetricsReport:
    """RMSE/MAE plus per-sign-group mean absolute errors."""

    rmse: float
    mae: float
    error_pos: float | None
    error_neg: float | None
    n: int
    n_pos: int
    n_neg: int


def compute_metrics(y, f) -> MetricsReport:
    """Evaluate predictions ``f`` against targets ``y``.

    ``error_pos`` averages |y - f| over samples with y >= f (model under-
    predicts), ``error_neg`` over samples with y < f; each is None when
    its group is empty.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    f = np.asarray(f, dtype=float).reshape(-1)
    if y.shape != f.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {f.shape}")
    if y.size == 0:
        raise ValueError("metrics need at least one sample")
    r = y - f
    ar = np.abs(r)
    pos = r >= 0
    n_pos = int(pos.sum())
    n_neg = int(y.size - n_pos)
    return MetricsReport(
        rmse=float(np.sqrt(np.mean(r * r))),
        mae=float(np.mean(ar)),
        error_pos=float(np.mean(ar[pos])) if n_pos else None,
        error_neg=float(np.mean(ar[~pos])) if n_neg else None,
        n=int(y.size),
        n_pos=n_pos,
        n_neg=n_neg,
    )


# ---------------------------------------------------------------------------
# Cross-validated grid search.


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter value lists plus the fold count."""

    C_values: tuple[float, ...]
    sigma_values: tuple[float, ...]
    epsilon_values: tuple[float, ...] = (0.05,)
    lambda_values: tuple[float, ...] = (1.0,)
    a_values: tuple[float, ...] = (1.0,)
    gamma_values: tuple[float, ...] = (0.01,)
    k: int = 5

    def __post_init__(self):
        for name in ("C_values", "sigma_values", "epsilon_values", "lambda_values", "a_values", "gamma_values"):
            vals = getattr(self, name)
            object.__setattr__(self, name, tuple(float(v) for v in vals))
            if not getattr(self, name):
                raise ValueError(f"grid {name} must be non-empty")
        if self.k < 2:
            raise ValueError("grid k must be >= 2")


#: default search sets in the spirit of the usual powers-of-ten sweeps
DEFAULT_GRID = GridSpec(
    C_values=tuple(10.0**i for i in range(-6, 7, 2)),
    sigma_values=tuple(10.0**i for i in range(-6, 7, 2)),
    epsilon_values=(0.001, 0.005, 0.01, 0.05, 0.1, 0.15, 0.2, 0.25),
    lambda_values=tuple(np.arange(0.1, 2.0 + 1e-12, 0.2)),
    a_values=tuple(np.arange(0.1, 5.0 + 1e-12, 0.2)),
    gamma_values=(0.0001, 0.001, 0.01),
)

#: loss kinds whose insensitivity half-width comes from the grid
_EPSILON_KINDS = frozenset(
    {
        losses.HAWKEYE,
        losses.INSENSITIVE,
        losses.RAMP_INSENSITIVE,
        losses.RAMP_INSENSITIVE_LEAST_SQUARES,
        losses.QUADRATIC_NONCONVEX_INSENSITIVE,
        losses.CANAL,
    }
)


@dataclass(frozen=True)
class ModelRecipe:
    """A trainable model family: loss kind, kernel kind, fixed loss params.

    Grid axes that the recipe does not consume (e.g. lambda for a least
    squares loss) are collapsed so the search does not revisit identical
    models.
    """

    name: str
    loss_kind: str
    kernel_kind: str = "rbf"
    fixed: tuple[tuple[str, float], ...] = ()

    def fixed_params(self) -> dict:
        return dict(self.fixed)

    def uses_epsilon(self) -> bool:
        return self.loss_kind in _EPSILON_KINDS and "epsilon" not in self.fixed_params()

    def uses_lambda(self) -> bool:
        return self.loss_kind == losses.HAWKEYE and "lam" not in self.fixed_params()

    def uses_a(self) -> bool:
        return self.loss_kind == losses.HAWKEYE and "a" not in self.fixed_params()

    def uses_sigma(self) -> bool:
        return self.kernel_kind == "rbf"

    def build_loss(self, epsilon, lam, a) -> LossSpec:
        params = self.fixed_params()
        if self.loss_kind in _EPSILON_KINDS:
            params.setdefault("epsilon", epsilon)
        if self.loss_kind == losses.HAWKEYE:
            params.setdefault("lam", lam)
            params.setdefault("a", a)
        return LossSpec(self.loss_kind, **params)

    def build_kernel(self, sigma) -> KernelSpec:
        if self.kernel_kind == "rbf":
            return KernelSpec("rbf", sigma=sigma)
        return KernelSpec(self.kernel_kind)


def recipe_from_name(name: str) -> ModelRecipe:
    """Recipe for a loss kind referred to by its config name."""
    if name not in losses.LOSS_KINDS:
        raise ValueError(f"unknown model recipe {name!r}")
    fixed: tuple[tuple[str, float], ...] = ()
    if name in (losses.HUBER, losses.NONCONVEX_LEAST_SQUARES):
        fixed = (("theta", 1.0),)
    elif name in (losses.RAMP_INSENSITIVE, losses.RAMP_INSENSITIVE_LEAST_SQUARES, losses.CANAL):
        fixed = (("theta", 1.0),)
    elif name == losses.QUADRATIC_NONCONVEX_INSENSITIVE:
        fixed = (("t", 1.0), ("theta", 1.0))
    elif name == losses.BOUNDED_LEAST_SQUARES:
        fixed = (("t", 1.0), ("theta", 2.0))
    return ModelRecipe(name=name, loss_kind=name, fixed=fixed)


@dataclass(frozen=True)
class CellParams:
    C: float
    sigma: float | None
    epsilon: float | None
    lam: float | None
    a: float | None
    gamma: float


@dataclass
class CellResult:
    params: CellParams
    fold_rmse: list[float]
    fold_metrics: list[MetricsReport]
    fold_reports: list[FitReport]
    stat: float


@dataclass
class GridSearchResult:
    best: CellResult
    cells: list[CellResult]
    folds: list[np.ndarray]
    selection: str

    @property
    def best_params(self) -> CellParams:
        return self.best.params

    @property
    def best_rmse(self) -> float:
        return self.best.stat


def _enumerate_cells(grid: GridSpec, recipe: ModelRecipe) -> list[CellParams]:
    cs = sorted(grid.C_values)
    sigmas = sorted(grid.sigma_values) if recipe.uses_sigma() else [None]
    epss = sorted(grid.epsilon_values) if recipe.uses_epsilon() else [None]
    lams = sorted(grid.lambda_values) if recipe.uses_lambda() else [None]
    avals = sorted(grid.a_values) if recipe.uses_a() else [None]
    gammas = sorted(grid.gamma_values)
    return [
        CellParams(C=c, sigma=s, epsilon=e, lam=l, a=a, gamma=g)
        for c, s, e, l, a, g in product(cs, sigmas, epss, lams, avals, gammas)
    ]


def _evaluate_cell(ds, folds, recipe, cell, adam, scaling, seed, cell_index, selection):
    loss = recipe.build_loss(cell.epsilon, cell.lam, cell.a)
    kernel = recipe.build_kernel(cell.sigma)
    fold_rmse, fold_metrics, fold_reports = [], [], []
    all_idx = np.arange(ds.n)
    for j, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test_idx, assume_unique=True)
        cfg = replace(adam, gamma=cell.gamma, seed=child_seed(seed, cell_index, j))
        model, report = fit(
            ds.X[train_idx], ds.y[train_idx], kernel, loss, C=cell.C, adam=cfg, scaling=scaling
        )
        pred = predict(model, ds.X[test_idx])
        metrics = compute_metrics(ds.y[test_idx], pred)
        fold_rmse.append(metrics.rmse)
        fold_metrics.append(metrics)
        fold_reports.append(report)
    if selection == "best_fold":
        stat = min(fold_rmse)
    else:
        stat = float(np.mean(fold_rmse))
    return CellResult(cell, fold_rmse, fold_metrics, fold_reports, stat)


def grid_search_cv(
    ds: Dataset,
    grid: GridSpec,
    recipe: ModelRecipe,
    seed: int = 0,
    adam: AdamConfig | None = None,
    scaling: str = "minmax",
    selection: str = "best_fold",
    threads: int = 1,
) -> GridSearchResult:
    """Search the grid with k-fold cross validation.

    For each cell the model trains on k-1 folds and is scored by RMSE on
    the held-out fold.  A cell's statistic is its best (lowest) fold RMSE
    by default, or the fold mean with ``selection="mean"``.  Ties break
    to the first cell in ascending (C, sigma, epsilon, lambda, a, gamma)
    order.  Cells are independent work items; results do not depend on
    ``threads``.
    """
    if selection not in ("best_fold", "mean"):
        raise ValueError(f"selection must be 'best_fold' or 'mean', got {selection!r}")
    if adam is None:
        adam = AdamConfig()
    folds = kfold_split(ds.n, grid.k, seed)
    cells = _enumerate_cells(grid, recipe)

    def run(i):
        return _evaluate_cell(ds, folds, recipe, cells[i], adam, scaling, seed, i, selection)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(cells))))
    else:
        results = [run(i) for i in range(len(cells))]

    best = None
    for res in results:
        if not math.isfinite(res.stat):
            continue
        if best is None or res.stat < best.stat:
            best = res
    if best is None:
        raise ValueError("no grid cell produced a finite fold RMSE")
    return GridSearchResult(best=best, cells=results, folds=folds, selection=selection)


# ---------------------------------------------------------------------------
# Rank statistics across datasets.

#: two-tailed critical values of the studentized range / sqrt(2) at the 5%
#: level, indexed by the number of compared models
NEMENYI_Q_ALPHA_05 = {
    2: 1.960,
    3: 2.343,
    4: 2.569,
    5: 2.728,
    6: 2.850,
    7: 2.949,
    8: 3.031,
    9: 3.102,
    10: 3.164,
}


def friedman_chi2(avg_ranks, D: int, p: int | None = None) -> float:
    """Rank chi-square statistic from the models' average ranks."""
    avg_ranks = np.asarray(avg_ranks, dtype=float)
    if p is None:
        p = avg_ranks.size
    if p < 2:
        raise ValueError("need at least two models")
    if D < 1:
        raise ValueError("need at least one dataset")
    return float(12.0 * D / (p * (p + 1)) * (np.sum(avg_ranks**2) - p * (p + 1) ** 2 / 4.0))


def iman_davenport_F(chi2: float, D: int, p: int) -> float:
    """F-distributed refinement of the rank chi-square statistic."""
    denom = D * (p - 1) - chi2
    if denom <= 0:
        raise ValueError("statistic undefined: D*(p-1) must exceed chi2")
    return float((D - 1) * chi2 / denom)


def nemenyi_cd(q_alpha: float, p: int, D: int) -> float:
    """Critical difference threshold for pairwise average-rank gaps."""
    if q_alpha <= 0:
        raise ValueError("q_alpha must be > 0")
    return float(q_alpha * math.sqrt(p * (p + 1) / (6.0 * D)))


def _row_ranks(values: np.ndarray, tie: str) -> np.ndarray:
    ranks = np.full(values.shape, np.nan)
    present = ~np.isnan(values)
    vals = values[present]
    out = np.empty(vals.size)
    for i, v in enumerate(vals):
        smaller = int(np.sum(vals < v))
        if tie == "competition":
            out[i] = smaller + 1
        else:  # fractional: tied entries share the mean of their positions
            equal = int(np.sum(vals == v))
            out[i] = smaller + (equal + 1) / 2.0
    ranks[present] = out
    return ranks


def _truncate(x: float, decimals: int) -> float:
    scale = 10.0**decimals
    return math.floor(x * scale) / scale


@dataclass
class RankAnalysis:
    """Per-dataset ranks, average ranks, and the test statistics."""

    rank_matrix: np.ndarray
    avg_ranks: np.ndarray
    stat_ranks: np.ndarray
    D: int
    p: int
    chi2_F: float
    F_F: float
    CD: float
    q_alpha: float
    pairwise: np.ndarray
    complete: bool
    tie: str
    model_names: list[str] | None = None
    dataset_names: list[str] | None = None


def rank_models(
    table,
    tie: str = "competition",
    q_alpha: float | None = None,
    rank_decimals: int | None = 4,
    model_names: list[str] | None = None,
    dataset_names: list[str] | None = None,
) -> RankAnalysis:
    """Rank models per dataset and run the rank tests on the averages.

    ``table`` is a D x p array of scores (lower is better) with NaN for
    absent entries.  The default tie convention is competition style (tied
    best models share rank 1, the next model gets rank 3); ``tie="fractional"``
    uses mean positions instead.  A model's average divides by the number
    of datasets where it is present; the chi-square statistic always uses
    the full dataset count D.

    ``rank_decimals`` truncates the average ranks to that many decimal
    places before the test statistics are computed, which matches how the
    statistics are conventionally recomputed from 4-decimal published rank
    tables; pass None to use the exact averages.
    """
    values = np.asarray(table, dtype=float)
    if values.ndim != 2:
        raise ValueError("rank table must be 2-d")
    D, p = values.shape
    if p < 2:
        raise ValueError("need at least two models to rank")
    if tie not in ("competition", "fractional"):
        raise ValueError(f"tie must be 'competition' or 'fractional', got {tie!r}")

    rank_matrix = np.full(values.shape, np.nan)
    for i in range(D):
        present = ~np.isnan(values[i])
        if present.sum() < 2:
            raise ValueError(f"dataset row {i} needs at least two present entries")
        rank_matrix[i] = _row_ranks(values[i], tie)

    present_counts = np.sum(~np.isnan(rank_matrix), axis=0)
    avg_ranks = np.nansum(rank_matrix, axis=0) / present_counts

    if rank_decimals is None:
        stat_ranks = avg_ranks.copy()
    else:
        stat_ranks = np.array([_truncate(r, rank_decimals) for r in avg_ranks])

    chi2 = friedman_chi2(stat_ranks, D, p)
    denom = D * (p - 1) - chi2
    f_f = math.inf if denom <= 0 else float((D - 1) * chi2 / denom)
    if q_alpha is None:
        if p not in NEMENYI_Q_ALPHA_05:
            raise ValueError(f"no built-in q_alpha for p={p}; pass q_alpha explicitly")
        q_alpha = NEMENYI_Q_ALPHA_05[p]
    cd = nemenyi_cd(q_alpha, p, D)
    gaps = np.abs(stat_ranks[:, None] - stat_ranks[None, :])
    pairwise = gaps > cd

    return RankAnalysis(
        rank_matrix=rank_matrix,
        avg_ranks=avg_ranks,
        stat_ranks=stat_ranks,
        D=D,
        p=p,
        chi2_F=chi2,
        F_F=f_f,
        CD=cd,
        q_alpha=float(q_alpha),
        pairwise=pairwise,
        complete=bool(not np.any(np.isnan(values))),
        tie=tie,
        model_names=model_names,
        dataset_names=dataset_names,
    )


def format_rank_report(analysis: RankAnalysis, critical_f: float | None = None) -> str:
    """Human-readable summary of a rank analysis."""
    names = analysis.model_names or [f"model_{j}" for j in range(analysis.p)]
    lines = []
    lines.append(f"models compared : {analysis.p}")
    lines.append(f"datasets        : {analysis.D}")
    lines.append(f"tie convention  : {analysis.tie}")
    if not analysis.complete:
        lines.append(
            "note: the design is incomplete (absent entries); averages divide by"
            " per-model present counts and the chi-square statistic is heuristic"
        )
    if analysis.D == 1:
        lines.append("warning: only one dataset; the F test is not meaningful")
    lines.append("")
    lines.append("average ranks (lower is better):")
    order = np.argsort(analysis.avg_ranks)
    for j in order:
        lines.append(f"  {names[j]:<32s} {analysis.avg_ranks[j]:.4f}")
    lines.append("")
    lines.append(f"chi-square rank statistic : {analysis.chi2_F:.4f}")
    f_repr = "inf" if math.isinf(analysis.F_F) else f"{analysis.F_F:.4f}"
    lines.append(f"F statistic               : {f_repr}")
    if critical_f is not None:
        verdict = "reject" if analysis.F_F > critical_f else "fail to reject"
        lines.append(
            f"critical F                : {critical_f:.4f} -> {verdict} the equal-performance hypothesis"
        )
    lines.append(f"critical difference       : {analysis.CD:.4f} (q_alpha={analysis.q_alpha})")
    lines.append("")
    lines.append("pairwise significant rank gaps (|gap| > CD):")
    for i in range(analysis.p):
        for j in range(i + 1, analysis.p):
            gap = abs(analysis.stat_ranks[i] - analysis.stat_ranks[j])
            flag = "significant" if analysis.pairwise[i, j] else "not significant"
            lines.append(f"  {names[i]} vs {names[j]}: gap={gap:.4f} -> {flag}")
    return "\n".join(lines) + "\n"
