"""Independent verification path for the twin training solves.

Instead of eliminating variables into the m x m multiplier system, the three
optimality equations of one bound side are stacked into a single square
linear system in (v, v*, multiplier) and solved directly. The assembly here
deliberately shares nothing with the closed-form training path beyond the
raw checked dense solver, so a transcription slip in either path cannot
confirm itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import solve_checked
from .model import FitWorkspace, Hyperparams

SIDES = ("down", "up")


@dataclass(frozen=True)
class StackedSystem:
    """One stacked optimality system plus its block layout.

    Unknown order is (v, v*, multiplier); the slices address the blocks of
    both the unknown vector and the solution.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    v_block: slice
    v_star_block: slice
    multiplier_block: slice


def build_stacked_system(
    ws: FitWorkspace, y: np.ndarray, hp: Hyperparams, side: str
) -> StackedSystem:
    """Assemble the three optimality equations of one bound side.

    Down side:
        (c1 I + G^T G) v1            - G^T a  = G^T y
                      c2 v1* + G*^T a         = -c3 G*^T 1
        -G v1         + G* v1*                = -y - eps1 1

    Up side (sign of the multiplier coupling and of y flipped):
        (c4 I + G^T G) v2            + G^T b  = G^T y
                      c5 v2* + G*^T b         = -c6 G*^T 1
        G v2          + G* v2*                = y - eps2 1
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    g, gs, e = ws.G, ws.G_star, ws.ones
    y = np.asarray(y, dtype=float).ravel()
    m, q1 = g.shape
    q2 = gs.shape[1]
    if y.shape[0] != m:
        raise ValueError(f"got {y.shape[0]} targets for {m} training rows")

    if side == "down":
        c_reg, c_corr, c_drift, eps = hp.c1, hp.c2, hp.c3, hp.eps1
        sign = -1.0
        feas_rhs = -y - eps * e
    else:
        c_reg, c_corr, c_drift, eps = hp.c4, hp.c5, hp.c6, hp.eps2
        sign = 1.0
        feas_rhs = y - eps * e

    size = q1 + q2 + m
    a = np.zeros((size, size))
    b = np.zeros(size)

    a[:q1, :q1] = c_reg * np.eye(q1) + g.T @ g
    a[:q1, q1 + q2 :] = sign * g.T
    b[:q1] = g.T @ y

    a[q1 : q1 + q2, q1 : q1 + q2] = c_corr * np.eye(q2)
    a[q1 : q1 + q2, q1 + q2 :] = gs.T
    b[q1 : q1 + q2] = -c_drift * (gs.T @ e)

    a[q1 + q2 :, :q1] = sign * g
    a[q1 + q2 :, q1 : q1 + q2] = gs
    b[q1 + q2 :] = feas_rhs

    return StackedSystem(
        matrix=a,
        rhs=b,
        v_block=slice(0, q1),
        v_star_block=slice(q1, q1 + q2),
        multiplier_block=slice(q1 + q2, size),
    )


def solve_stacked_kkt(
    ws: FitWorkspace, y: np.ndarray, hp: Hyperparams, side: str
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve one stacked system; returns (v, v*, multiplier)."""
    system = build_stacked_system(ws, y, hp, side)
    solution = solve_checked(system.matrix, system.rhs, context=f"stacked {side}-side system")
    return (
        solution[system.v_block],
        solution[system.v_star_block],
        solution[system.multiplier_block],
    )
