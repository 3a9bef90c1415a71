"""Twin least-squares regression trained with a privileged feature channel.

Training solves two coupled equality-constrained least-squares problems, one
per epsilon-insensitive bound regressor. Each couples a regressor over the
regular features with a correcting function over the privileged features
through an equality constraint; for the down-bound side:

    minimize  c1/2 ||v1||^2 + c2/2 ||v1*||^2
              + 1/2 ||y - G v1||^2 + c3 <1, G* v1*>
    subject   y - G v1 + eps1 * 1 + G* v1* = 0

where G = [Phi | 1] and G* = [Phi* | 1] are the augmented designs of the
regular and privileged channels (raw features in linear mode, self-Gram
columns in kernel mode). Eliminating the stationarity conditions reduces
training to one dense m x m solve for the constraint multiplier,

    [S + (c1/c2) H + (1/c2) S H] alpha
        = c1 y + c1 eps1 1 - (c1 c3/c2) H 1 + eps1 S 1 - (c3/c2) S H 1,

with S = G G^T and H = G* G*^T, followed by two small recovery solves.
The up-bound side mirrors this with (c4, c5, c6, eps2) and y negated in the
right-hand side. The prediction is the average of the two bound regressors
and never reads privileged features.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import DataError, Dataset, NormStats, PIDataset
from .kernels import KernelSpec, gram
from .linalg import NumericalError, solve_checked

#: A fit is accepted only if all six optimality residuals are below
#: KKT_TOL_SCALE * (1 + ||y||_inf).
KKT_TOL_SCALE = 1e-8


@dataclass(frozen=True)
class Hyperparams:
    """Regularization weights, insensitivity margins and the kernel choice.

    ``kernel`` None selects the linear (raw feature space) variant; a
    :class:`KernelSpec` selects the kernelized variant.
    """

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    c6: float = 1.0
    eps1: float = 0.01
    eps2: float = 0.01
    kernel: KernelSpec | None = None

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "c3", "c4", "c5", "c6"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.eps1 < 0 or self.eps2 < 0:
            raise ValueError("eps1 and eps2 must be non-negative")


@dataclass(frozen=True)
class FitWorkspace:
    """Augmented design matrices shared by the two training problems."""

    G: np.ndarray
    G_star: np.ndarray
    ones: np.ndarray


@dataclass(frozen=True)
class DualSolution:
    """Constraint multipliers of the down- and up-bound problems."""

    alpha: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class KKTResiduals:
    """Infinity norms of the six optimality equations at a fitted solution."""

    down_stationarity: float
    down_correcting: float
    down_feasibility: float
    up_stationarity: float
    up_correcting: float
    up_feasibility: float

    def max_residual(self) -> float:
        return max(
            self.down_stationarity,
            self.down_correcting,
            self.down_feasibility,
            self.up_stationarity,
            self.up_correcting,
            self.up_feasibility,
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "down_stationarity": self.down_stationarity,
            "down_correcting": self.down_correcting,
            "down_feasibility": self.down_feasibility,
            "up_stationarity": self.up_stationarity,
            "up_correcting": self.up_correcting,
            "up_feasibility": self.up_feasibility,
        }


@dataclass(frozen=True)
class TrainedModel:
    """Fitted twin regressor: weight vectors packed as [u; bias].

    Regular training rows are retained for kernel prediction; privileged
    rows are retained only so the correcting functions can be inspected.
    ``norm`` carries the training normalization when the surrounding
    pipeline attached one, in which case prediction inputs are raw.
    """

    v1: np.ndarray
    v2: np.ndarray
    v1_star: np.ndarray
    v2_star: np.ndarray
    duals: DualSolution
    hp: Hyperparams
    train_regular: np.ndarray
    train_privileged: np.ndarray
    norm: NormStats | None = None

    @property
    def is_kernel(self) -> bool:
        return self.hp.kernel is not None

    @property
    def n_regular_features(self) -> int:
        return self.train_regular.shape[1]


def build_workspace(data: PIDataset, hp: Hyperparams) -> FitWorkspace:
    """Assemble G = [Phi | 1] and G* = [Phi* | 1] for the chosen variant."""
    m = data.n_samples
    ones = np.ones(m)
    if hp.kernel is None:
        phi = data.regular
        phi_star = data.privileged
    else:
        phi = gram(data.regular, data.regular, hp.kernel)
        phi_star = gram(data.privileged, data.privileged, hp.kernel)
    g = np.column_stack([phi, ones])
    g_star = np.column_stack([phi_star, ones])
    return FitWorkspace(G=g, G_star=g_star, ones=ones)


def _multiplier_system(
    ws: FitWorkspace, y: np.ndarray, c_reg: float, c_corr: float, c_drift: float, eps: float
) -> tuple[np.ndarray, np.ndarray]:
    s = ws.G @ ws.G.T
    h = ws.G_star @ ws.G_star.T
    e = ws.ones
    a = s + (c_reg / c_corr) * h + (1.0 / c_corr) * (s @ h)
    he = h @ e
    se = s @ e
    she = s @ he
    rhs = c_reg * y + c_reg * eps * e - (c_reg * c_drift / c_corr) * he + eps * se - (
        c_drift / c_corr
    ) * she
    return a, rhs


def _check_targets(ws: FitWorkspace, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != ws.G.shape[0]:
        raise ValueError(f"got {y.shape[0]} targets for {ws.G.shape[0]} training rows")
    return y


def solve_alpha(ws: FitWorkspace, y: np.ndarray, hp: Hyperparams) -> np.ndarray:
    """Down-bound multiplier from the eliminated m x m system (c1, c2, c3, eps1)."""
    y = _check_targets(ws, y)
    a, rhs = _multiplier_system(ws, y, hp.c1, hp.c2, hp.c3, hp.eps1)
    return solve_checked(a, rhs, context="down-bound multiplier system")


def solve_beta(ws: FitWorkspace, y: np.ndarray, hp: Hyperparams) -> np.ndarray:
    """Up-bound multiplier: same system with (c4, c5, c6, eps2) and y negated."""
    y = _check_targets(ws, y)
    a, rhs = _multiplier_system(ws, -y, hp.c4, hp.c5, hp.c6, hp.eps2)
    return solve_checked(a, rhs, context="up-bound multiplier system")


def _residuals_from_workspace(
    ws: FitWorkspace,
    y: np.ndarray,
    hp: Hyperparams,
    v1: np.ndarray,
    v2: np.ndarray,
    v1_star: np.ndarray,
    v2_star: np.ndarray,
    alpha: np.ndarray,
    beta: np.ndarray,
) -> KKTResiduals:
    e = ws.ones
    g, gs = ws.G, ws.G_star

    def norm_inf(v: np.ndarray) -> float:
        return float(np.max(np.abs(v)))

    return KKTResiduals(
        down_stationarity=norm_inf(hp.c1 * v1 - g.T @ (y - g @ v1) - g.T @ alpha),
        down_correcting=norm_inf(hp.c2 * v1_star + hp.c3 * gs.T @ e + gs.T @ alpha),
        down_feasibility=norm_inf(y - g @ v1 + hp.eps1 * e + gs @ v1_star),
        up_stationarity=norm_inf(hp.c4 * v2 + g.T @ (g @ v2 - y) + g.T @ beta),
        up_correcting=norm_inf(hp.c5 * v2_star + hp.c6 * gs.T @ e + gs.T @ beta),
        up_feasibility=norm_inf(g @ v2 - y + hp.eps2 * e + gs @ v2_star),
    )


def fit(data: PIDataset, hp: Hyperparams, norm: NormStats | None = None) -> TrainedModel:
    """Fit both bound regressors and their correcting functions.

    After the multiplier solves, the weights are recovered from

        (G^T G + c1 I) v1 = G^T (y + alpha)    v1* = -(1/c2) G*^T (c3 1 + alpha)
        (G^T G + c4 I) v2 = G^T (y - beta)     v2* = -(1/c5) G*^T (c6 1 + beta)

    A fit is returned only when all six optimality residuals come out below
    ``KKT_TOL_SCALE * (1 + ||y||_inf)``; an ill-conditioned hyperparameter
    choice whose per-solve checks pass but whose recovered solution violates
    the optimality system fails loudly instead of returning garbage.

    ``norm`` is not applied here; training data is expected to be already
    normalized by the caller, and the stats ride along for prediction time.
    """
    ws = build_workspace(data, hp)
    y = _check_targets(ws, data.targets)
    alpha = solve_alpha(ws, y, hp)
    beta = solve_beta(ws, y, hp)

    gtg = ws.G.T @ ws.G
    eye = np.eye(gtg.shape[0])
    v1 = solve_checked(gtg + hp.c1 * eye, ws.G.T @ (y + alpha), context="down-bound recovery")
    v2 = solve_checked(gtg + hp.c4 * eye, ws.G.T @ (y - beta), context="up-bound recovery")
    v1_star = -(ws.G_star.T @ (hp.c3 * ws.ones + alpha)) / hp.c2
    v2_star = -(ws.G_star.T @ (hp.c6 * ws.ones + beta)) / hp.c5

    residuals = _residuals_from_workspace(ws, y, hp, v1, v2, v1_star, v2_star, alpha, beta)
    tol = KKT_TOL_SCALE * (1.0 + float(np.max(np.abs(y))))
    if residuals.max_residual() > tol:
        raise NumericalError(
            f"fit rejected: optimality residual {residuals.max_residual():.3e} exceeds "
            f"{tol:.3e}; the multiplier system is too ill-conditioned for these "
            f"hyperparameters"
        )

    return TrainedModel(
        v1=v1,
        v2=v2,
        v1_star=v1_star,
        v2_star=v2_star,
        duals=DualSolution(alpha=alpha, beta=beta),
        hp=hp,
        train_regular=np.array(data.regular, dtype=float),
        train_privileged=np.array(data.privileged, dtype=float),
        norm=norm,
    )


def _regular_design(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.n_regular_features:
        raise ValueError(
            f"expected {model.n_regular_features} regular feature columns, got {x.shape[1]}"
        )
    if model.norm is not None:
        x = model.norm.transform_features(x)
    if model.hp.kernel is None:
        return x
    return gram(x, model.train_regular, model.hp.kernel)


def predict(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """Average of the two bound regressors over regular features only.

    Applies the stored training normalization to ``x`` first when the model
    carries one. Privileged features are not a parameter by design.
    """
    phi = _regular_design(model, x)
    weights = model.v1[:-1] + model.v2[:-1]
    bias = model.v1[-1] + model.v2[-1]
    return 0.5 * (phi @ weights + bias)


def bound_functions(model: TrainedModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the down- and up-bound regressors separately."""
    phi = _regular_design(model, x)
    r1 = phi @ model.v1[:-1] + model.v1[-1]
    r2 = phi @ model.v2[:-1] + model.v2[-1]
    return r1, r2


def correcting_values(model: TrainedModel, x_star: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate both correcting functions on privileged inputs.

    Training-time diagnostic only: inputs are expected in the same
    (already normalized) space the model was fitted in.
    """
    x_star = np.atleast_2d(np.asarray(x_star, dtype=float))
    if x_star.shape[1] != model.train_privileged.shape[1]:
        raise ValueError(
            f"expected {model.train_privileged.shape[1]} privileged feature columns, "
            f"got {x_star.shape[1]}"
        )
    if model.hp.kernel is None:
        phi = x_star
    else:
        phi = gram(x_star, model.train_privileged, model.hp.kernel)
    p1 = phi @ model.v1_star[:-1] + model.v1_star[-1]
    p2 = phi @ model.v2_star[:-1] + model.v2_star[-1]
    return p1, p2


def kkt_residuals(model: TrainedModel, data: PIDataset) -> KKTResiduals:
    """Infinity norms of all six optimality equations on the training data."""
    ws = build_workspace(data, model.hp)
    y = _check_targets(ws, data.targets)
    return _residuals_from_workspace(
        ws, y, model.hp,
        model.v1, model.v2, model.v1_star, model.v2_star,
        model.duals.alpha, model.duals.beta,
    )


@dataclass(frozen=True)
class KRRModel:
    """Kernel ridge comparator: (K + ridge I) coef = y, no privileged channel."""

    train_features: np.ndarray
    coef: np.ndarray
    ridge: float
    kernel: KernelSpec
    norm: NormStats | None = None

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.train_features.shape[1]:
            raise ValueError(
                f"expected {self.train_features.shape[1]} feature columns, got {x.shape[1]}"
            )
        if self.norm is not None:
            x = self.norm.transform_features(x)
        return gram(x, self.train_features, self.kernel) @ self.coef


def fit_krr_comparator(
    data: Dataset,
    ridge: float,
    kernel: KernelSpec,
    norm: NormStats | None = None,
) -> KRRModel:
    """Kernel ridge regression baseline on the same (regular) features."""
    if not ridge > 0:
        raise ValueError(f"ridge must be positive, got {ridge}")
    k = gram(data.features, data.features, kernel)
    coef = solve_checked(
        k + ridge * np.eye(k.shape[0]), np.asarray(data.targets, dtype=float),
        context="kernel ridge system",
    )
    return KRRModel(
        train_features=np.array(data.features, dtype=float),
        coef=coef,
        ridge=ridge,
        kernel=kernel,
        norm=norm,
    )


MODEL_FORMAT = "twinpi-model-v1"


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Serialize to JSON with shortest round-trip floats (exact decimal round trip)."""
    hp = model.hp
    payload = {
        "format": MODEL_FORMAT,
        "hyperparams": {
            "c1": hp.c1, "c2": hp.c2, "c3": hp.c3,
            "c4": hp.c4, "c5": hp.c5, "c6": hp.c6,
            "eps1": hp.eps1, "eps2": hp.eps2,
            "kernel": None if hp.kernel is None else {"kind": hp.kernel.kind, "mu": hp.kernel.mu},
        },
        "v1": model.v1.tolist(),
        "v2": model.v2.tolist(),
        "v1_star": model.v1_star.tolist(),
        "v2_star": model.v2_star.tolist(),
        "alpha": model.duals.alpha.tolist(),
        "beta": model.duals.beta.tolist(),
        "train_regular": model.train_regular.tolist(),
        "train_privileged": model.train_privileged.tolist(),
        "norm": None
        if model.norm is None
        else {"col_min": model.norm.col_min.tolist(), "col_max": model.norm.col_max.tolist()},
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from exc
    if payload.get("format") != MODEL_FORMAT:
        raise DataError(f"model file {path} has unknown format {payload.get('format')!r}")
    hp_raw = payload["hyperparams"]
    kernel = None
    if hp_raw["kernel"] is not None:
        kernel = KernelSpec(kind=hp_raw["kernel"]["kind"], mu=hp_raw["kernel"]["mu"])
    hp = Hyperparams(
        c1=hp_raw["c1"], c2=hp_raw["c2"], c3=hp_raw["c3"],
        c4=hp_raw["c4"], c5=hp_raw["c5"], c6=hp_raw["c6"],
        eps1=hp_raw["eps1"], eps2=hp_raw["eps2"], kernel=kernel,
    )
    norm = None
    if payload["norm"] is not None:
        norm = NormStats(
            np.asarray(payload["norm"]["col_min"], dtype=float),
            np.asarray(payload["norm"]["col_max"], dtype=float),
        )
    return TrainedModel(
        v1=np.asarray(payload["v1"], dtype=float),
        v2=np.asarray(payload["v2"], dtype=float),
        v1_star=np.asarray(payload["v1_star"], dtype=float),
        v2_star=np.asarray(payload["v2_star"], dtype=float),
        duals=DualSolution(
            alpha=np.asarray(payload["alpha"], dtype=float),
            beta=np.asarray(payload["beta"], dtype=float),
        ),
        hp=hp,
        train_regular=np.asarray(payload["train_regular"], dtype=float),
        train_privileged=np.asarray(payload["train_privileged"], dtype=float),
        norm=norm,
    )
