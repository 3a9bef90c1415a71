"""Checked dense linear solves.

Every square system in this package goes through :func:`solve_checked`:
LU factorization with partial pivoting followed by an explicit
infinity-norm residual check. The training systems contain Gram-matrix
products and are generally nonsymmetric, so no symmetric or
positive-definite shortcut is taken anywhere.
"""

from __future__ import annotations

import numpy as np

#: Accept a solution when ||A x - b||_inf <= RESIDUAL_TOL * (1 + ||b||_inf).
RESIDUAL_TOL = 1e-6

#: Scale of the single diagonal-jitter retry applied after a failed solve.
JITTER_SCALE = 1e-10


class NumericalError(RuntimeError):
    """A linear system could not be solved to the required residual."""


def _residual_inf(a: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ x - b)))


def solve_checked(a: np.ndarray, b: np.ndarray, context: str = "linear system") -> np.ndarray:
    """Solve ``a @ x = b`` with a verified backward error.

    The first LU solve is accepted if its residual passes the check.
    Otherwise the solve is retried once on ``a + jitter * I`` with
    ``jitter = JITTER_SCALE * trace(a) / n``. The retry resolves systems
    that are rank-deficient but consistent (a degenerate training instance
    defines its multiplier only up to the common null space of the two
    design matrices; the jittered solve picks the minimum-norm
    representative). A second failure raises :class:`NumericalError`
    carrying a condition estimate of the original matrix.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{context}: matrix must be square, got shape {a.shape}")
    if b.ndim != 1 or b.shape[0] != a.shape[0]:
        raise ValueError(
            f"{context}: rhs of shape {b.shape} does not match matrix of size {a.shape[0]}"
        )
    n = a.shape[0]
    tol = RESIDUAL_TOL * (1.0 + float(np.max(np.abs(b), initial=0.0)))

    try:
        x = np.linalg.solve(a, b)
        if np.all(np.isfinite(x)) and _residual_inf(a, x, b) <= tol:
            return x
    except np.linalg.LinAlgError:
        pass

    jitter = JITTER_SCALE * float(np.trace(a)) / n
    if not jitter > 0.0:
        jitter = JITTER_SCALE
    try:
        x = np.linalg.solve(a + jitter * np.eye(n), b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"{context}: singular even after jitter {jitter:.3e} "
            f"(cond estimate {np.linalg.cond(a):.3e})"
        ) from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError(
            f"{context}: non-finite solution after jitter {jitter:.3e} "
            f"(cond estimate {np.linalg.cond(a):.3e})"
        )
    res = _residual_inf(a, x, b)
    if res > tol:
        raise NumericalError(
            f"{context}: residual {res:.3e} exceeds tolerance {tol:.3e} after "
            f"jitter {jitter:.3e} (cond estimate {np.linalg.cond(a):.3e})"
        )
    return x
