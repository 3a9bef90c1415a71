"""Grid-search hyperparameter selection with k-fold cross-validation.

The grid is a Cartesian product over base-2 exponents. With parameter tying
(the default) the two bound sides share their three regularization weights,
so a kernel grid has four axes (c1, c2, c3, mu) and a linear one has three.
Candidates are ordered lexicographically by exponent tuple, and a stride
subsample over that order keeps desk-scale runs tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, PIDataset
from .kernels import KernelSpec
from .linalg import NumericalError
from .metrics import evaluate
from .model import Hyperparams, fit, fit_krr_comparator, predict


class TuningError(RuntimeError):
    """Raised when no grid candidate can be fitted."""


#: Hard cap on materialized candidates when no subsample is requested.
MAX_MATERIALIZED = 200_000


@dataclass(frozen=True)
class GridSpec:
    """Search space and cross-validation protocol.

    ``kernel`` is "rbf", "linear" (identity-kernel variant) or None for the
    linear feature-space variant; only "rbf" adds a width axis, which
    ``pin_mu`` removes again by fixing the width.
    """

    c_lo: int = -8
    c_hi: int = 8
    mu_lo: int = -8
    mu_hi: int = 8
    tie_params: bool = True
    eps: float = 0.01
    folds: int = 5
    seed: int = 0
    kernel: str | None = "rbf"
    pin_mu: float | None = None
    max_candidates: int | None = None

    def __post_init__(self) -> None:
        if self.c_lo > self.c_hi or self.mu_lo > self.mu_hi:
            raise ValueError("exponent ranges must satisfy lo <= hi")
        if self.folds < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds}")
        if self.kernel not in (None, "linear", "rbf"):
            raise ValueError(f"kernel must be None, 'linear' or 'rbf', got {self.kernel!r}")
        if self.max_candidates is not None and self.max_candidates < 1:
            raise ValueError("max_candidates must be positive when given")

    @property
    def has_mu_axis(self) -> bool:
        return self.kernel == "rbf" and self.pin_mu is None


@dataclass(frozen=True)
class CandidateResult:
    """One grid candidate with its cross-validated score.

    ``fold_rmses`` holds one entry per fold (None where the fit failed);
    ``mean_rmse`` is None when the candidate failed to fit on every fold.
    """

    hp: Hyperparams
    exponents: tuple[int, ...]
    mean_rmse: float | None
    failed_folds: int
    fold_rmses: tuple[float | None, ...] = ()


@dataclass(frozen=True)
class TuneResult:
    """Selected hyperparameters plus the full candidate table and folds."""

    best: Hyperparams
    best_index: int
    table: tuple[CandidateResult, ...]
    folds: tuple[np.ndarray, ...]


def _candidate_hp(spec: GridSpec, exponents: tuple[int, ...]) -> Hyperparams:
    if spec.tie_params:
        c1, c2, c3 = (2.0**e for e in exponents[:3])
        c4, c5, c6 = c1, c2, c3
        rest = exponents[3:]
    else:
        c1, c2, c3, c4, c5, c6 = (2.0**e for e in exponents[:6])
        rest = exponents[6:]
    kernel = None
    if spec.kernel == "linear":
        kernel = KernelSpec("linear")
    elif spec.kernel == "rbf":
        mu = spec.pin_mu if spec.pin_mu is not None else 2.0 ** rest[0]
        kernel = KernelSpec("rbf", mu=mu)
    return Hyperparams(
        c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, c6=c6,
        eps1=spec.eps, eps2=spec.eps, kernel=kernel,
    )


def _grid_axes(spec: GridSpec) -> list[list[int]]:
    c_axis = list(range(spec.c_lo, spec.c_hi + 1))
    n_c_axes = 3 if spec.tie_params else 6
    axes = [c_axis] * n_c_axes
    if spec.has_mu_axis:
        axes.append(list(range(spec.mu_lo, spec.mu_hi + 1)))
    return axes


def _unrank(index: int, sizes: list[int]) -> tuple[int, ...]:
    # Mixed-radix digits, last axis fastest: lexicographic order over tuples.
    digits = []
    for size in reversed(sizes):
        digits.append(index % size)
        index //= size
    return tuple(reversed(digits))


def make_grid(spec: GridSpec) -> list[Hyperparams]:
    """Candidates in deterministic lexicographic order by exponent tuple.

    With ``max_candidates`` set, an even stride over that order is taken
    instead of the full product.
    """
    return [hp for hp, _ in _grid_candidates(spec)]


def _grid_candidates(spec: GridSpec) -> list[tuple[Hyperparams, tuple[int, ...]]]:
    axes = _grid_axes(spec)
    sizes = [len(a) for a in axes]
    total = math.prod(sizes)
    if spec.max_candidates is None:
        if total > MAX_MATERIALIZED:
            raise TuningError(
                f"grid has {total} candidates; set max_candidates to subsample"
            )
        indices = range(total)
    else:
        stride = max(1, math.ceil(total / spec.max_candidates))
        indices = range(0, total, stride)
    out = []
    for idx in indices:
        digit_positions = _unrank(idx, sizes)
        exponents = tuple(axis[d] for axis, d in zip(axes, digit_positions))
        out.append((_candidate_hp(spec, exponents), exponents))
    return out


def kfold_indices(m: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle 0..m-1 with ``seed`` and split into k folds of near-equal size."""
    if k > m:
        raise ValueError(f"cannot make {k} folds from {m} samples")
    if k < 2:
        raise ValueError(f"folds must be at least 2, got {k}")
    perm = np.random.default_rng(seed).permutation(m)
    return [np.sort(part) for part in np.array_split(perm, k)]


def cross_validate(data: PIDataset, spec: GridSpec) -> TuneResult:
    """Score every grid candidate by k-fold validation RMSE and pick the best.

    Within each fold the model is fitted on the remaining folds (privileged
    features included) and scored on the held-out fold through regular
    features only. Ties break toward the earliest candidate in grid order.
    """
    candidates = _grid_candidates(spec)
    folds = kfold_indices(data.n_samples, spec.folds, spec.seed)
    all_idx = np.arange(data.n_samples)
    splits = []
    for val_idx in folds:
        mask = np.ones(data.n_samples, dtype=bool)
        mask[val_idx] = False
        splits.append((all_idx[mask], val_idx))

    table: list[CandidateResult] = []
    best_index = -1
    best_rmse = math.inf
    for pos, (hp, exponents) in enumerate(candidates):
        fold_rmses: list[float | None] = []
        for train_idx, val_idx in splits:
            try:
                model = fit(data.subset(train_idx), hp)
            except NumericalError:
                fold_rmses.append(None)
                continue
            y_hat = predict(model, data.regular[val_idx])
            fold_rmses.append(evaluate(data.targets[val_idx], y_hat).rmse)
        scored = [r for r in fold_rmses if r is not None]
        mean_rmse = float(np.mean(scored)) if scored else None
        failed = len(fold_rmses) - len(scored)
        table.append(CandidateResult(hp, exponents, mean_rmse, failed, tuple(fold_rmses)))
        if mean_rmse is not None and mean_rmse < best_rmse:
            best_rmse = mean_rmse
            best_index = pos

    if best_index < 0:
        failures = sum(r.failed_folds for r in table)
        raise TuningError(
            f"all {len(table)} candidates failed to fit ({failures} failed folds total)"
        )
    return TuneResult(
        best=table[best_index].hp,
        best_index=best_index,
        table=tuple(table),
        folds=tuple(folds),
    )


def export_tune_csv(result: TuneResult, path: str | Path) -> None:
    """One row per candidate: exponent tuple, mean validation RMSE, failed folds."""
    width = max(len(r.exponents) for r in result.table)
    header = [f"exp{i + 1}" for i in range(width)] + ["mean_rmse", "failed_folds"]
    lines = [",".join(header)]
    for r in result.table:
        exps = [str(e) for e in r.exponents] + [""] * (width - len(r.exponents))
        rmse = "" if r.mean_rmse is None else repr(float(r.mean_rmse))
        lines.append(",".join(exps + [rmse, str(r.failed_folds)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def tune_krr(data: Dataset, spec: GridSpec) -> tuple[float, KernelSpec]:
    """Cross-validate the kernel ridge comparator over (ridge, width) exponents.

    Uses the same exponent ranges, folds and seed as the twin-model search so
    both models see identical validation splits.
    """
    ridge_axis = list(range(spec.c_lo, spec.c_hi + 1))
    if spec.has_mu_axis:
        axes = [ridge_axis, list(range(spec.mu_lo, spec.mu_hi + 1))]
    else:
        axes = [ridge_axis]
    sizes = [len(a) for a in axes]
    total = math.prod(sizes)
    if spec.max_candidates is None:
        indices = range(total)
    else:
        stride = max(1, math.ceil(total / spec.max_candidates))
        indices = range(0, total, stride)

    folds = kfold_indices(data.n_samples, spec.folds, spec.seed)
    all_idx = np.arange(data.n_samples)

    def kernel_for(exponents: tuple[int, ...]) -> KernelSpec:
        if spec.kernel == "rbf":
            mu = spec.pin_mu if spec.pin_mu is not None else 2.0 ** exponents[1]
            return KernelSpec("rbf", mu=mu)
        return KernelSpec("linear")

    best: tuple[float, KernelSpec] | None = None
    best_rmse = math.inf
    for idx in indices:
        digit_positions = _unrank(idx, sizes)
        exponents = tuple(axis[d] for axis, d in zip(axes, digit_positions))
        ridge = 2.0 ** exponents[0]
        kernel = kernel_for(exponents)
        errors = []
        for val_idx in folds:
            mask = np.ones(data.n_samples, dtype=bool)
            mask[val_idx] = False
            train_idx = all_idx[mask]
            try:
                model = fit_krr_comparator(
                    Dataset(data.features[train_idx], data.targets[train_idx]), ridge, kernel
                )
            except NumericalError:
                continue
            y_hat = model.predict(data.features[val_idx])
            errors.append(evaluate(data.targets[val_idx], y_hat).rmse)
        if errors:
            mean_rmse = float(np.mean(errors))
            if mean_rmse < best_rmse:
                best_rmse = mean_rmse
                best = (ridge, kernel)
    if best is None:
        raise TuningError("all kernel ridge candidates failed to fit")
    return best
