"""Capacity and generalization-gap calculators for the fitted regressors.

The averaged twin regressor lives in the ball of weight norm at most B, whose
Rademacher complexity over m samples is (B / m) * sqrt(sum_i K(x_i, x_i)).
The generalization bound adds the Lipschitz-scaled complexity and a
confidence term to the empirical error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the generalization bound.

    ``lipschitz`` has no principled default: the loss is Lipschitz but no
    single constant is prescribed, so the caller must choose one (1.0 is a
    common illustrative choice for the affine losses used here).
    """

    weight_norm_cap: float
    lipschitz: float
    delta: float
    kernel_diag: np.ndarray
    empirical_error: float = 0.0

    def __post_init__(self) -> None:
        if not self.weight_norm_cap > 0:
            raise ValueError(f"weight norm cap must be positive, got {self.weight_norm_cap}")
        if not self.lipschitz > 0:
            raise ValueError(f"Lipschitz constant must be positive, got {self.lipschitz}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        diag = np.asarray(self.kernel_diag, dtype=float).ravel()
        if diag.size == 0:
            raise ValueError("kernel diagonal must be non-empty")
        if np.any(diag < 0) or not np.all(np.isfinite(diag)):
            raise ValueError("kernel diagonal entries must be finite and non-negative")
        object.__setattr__(self, "kernel_diag", diag)
        if self.empirical_error < 0:
            raise ValueError(f"empirical error must be non-negative, got {self.empirical_error}")


def rademacher_bound(weight_norm_cap: float, kernel_diag: np.ndarray) -> float:
    """(B / m) * sqrt(sum of the kernel diagonal); B / sqrt(m) for a unit diagonal."""
    if not weight_norm_cap > 0:
        raise ValueError(f"weight norm cap must be positive, got {weight_norm_cap}")
    diag = np.asarray(kernel_diag, dtype=float).ravel()
    if diag.size == 0:
        raise ValueError("kernel diagonal must be non-empty")
    m = diag.size
    return weight_norm_cap / m * math.sqrt(float(np.sum(diag)))


def generalization_bound(inp: BoundInputs, m: int) -> float:
    """empirical error + 2 L * complexity + sqrt(ln(1 / delta) / (2 m))."""
    if m != inp.kernel_diag.size:
        raise ValueError(
            f"m = {m} does not match the kernel diagonal length {inp.kernel_diag.size}"
        )
    complexity = rademacher_bound(inp.weight_norm_cap, inp.kernel_diag)
    confidence = math.sqrt(math.log(1.0 / inp.delta) / (2.0 * m))
    return inp.empirical_error + 2.0 * inp.lipschitz * complexity + confidence
