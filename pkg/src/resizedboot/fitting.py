"""Damped-Newton maximum-likelihood fitting with separability detection.

The fitter minimises ``sum_i f_{y_i}(x_i @ beta)`` by Newton steps with a
step-halving line search, so the objective trace is non-increasing (up to
the rounding floor of the objective in the final iterations). Binary fits
are flagged ``separable`` instead of ``converged`` when an iterate strictly
separates the data, i.e. every margin ``y_i * (x_i @ beta)`` is positive: a
non-separable dataset keeps at least one observation on the wrong side of
every hyperplane (objective at least log 2), so the certificate can never
misfire; runaway coefficient norms and near-zero objectives stay in as
backstops for quasi-separation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import linalg, optimize

from .exceptions import DatasetError
from .families import Family, get_family


class FitStatus(str, Enum):
    CONVERGED = "converged"
    SEPARABLE = "separable"
    MAX_ITER = "max_iter"
    SINGULAR_HESSIAN = "singular_hessian"


@dataclass
class Dataset:
    """An n x p covariate matrix, response vector and family tag.

    ``has_intercept`` marks the first column of ``X`` as the constant-1
    column; the column must actually be constant. Binary responses are
    normalised to the {-1, +1} encoding on construction.
    """

    X: np.ndarray
    y: np.ndarray
    family: Family
    has_intercept: bool = False

    def __post_init__(self):
        self.family = get_family(self.family)
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        if X.ndim != 2:
            raise DatasetError("X must be a 2-d array")
        n, p = X.shape
        if n < p + 1:
            raise DatasetError(f"n >= p+1 required; got n={n}, p={p}")
        if not np.all(np.isfinite(X)):
            raise DatasetError("X contains non-finite entries")
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if y.shape[0] != n:
            raise DatasetError(f"y has length {y.shape[0]}, expected {n}")
        if not np.all(np.isfinite(y)):
            raise DatasetError("y contains non-finite entries")
        if self.has_intercept and not np.all(X[:, 0] == 1.0):
            raise DatasetError("has_intercept requires X[:, 0] to be all ones")
        self.X = X
        self.y = self.family.validate_y(y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitOptions:
    """Newton solver controls. Defaults follow standard GLM practice."""

    tol: float = 1e-8                 # gradient-norm stopping rule
    max_iter: int = 100
    max_halvings: int = 30
    ridge: float = 1e-10              # scale of the one-shot Cholesky fallback
    separable_beta_norm: float = 1e6
    separable_objective: float = 1e-10  # per observation; binary families only


@dataclass
class FitResult:
    """MLE output. ``hessian`` is the negative log-likelihood Hessian at
    ``beta_hat``; treat the instance as immutable once constructed."""

    beta_hat: np.ndarray
    eta_lin: np.ndarray
    hessian: np.ndarray
    status: FitStatus
    grad_norm: float
    objective: float
    n_iter: int
    objective_trace: np.ndarray = field(repr=False, default=None)

    @property
    def converged(self) -> bool:
        return self.status is FitStatus.CONVERGED


def _try_cholesky(H: np.ndarray, ridge: float):
    """Cholesky factor of H, retrying once with a tiny ridge; None if both fail."""
    try:
        return linalg.cho_factor(H, lower=True)
    except linalg.LinAlgError:
        pass
    p = H.shape[0]
    bump = ridge * np.trace(H) / p
    try:
        return linalg.cho_factor(H + bump * np.eye(p), lower=True)
    except linalg.LinAlgError:
        return None


def newton_fit(
    X: np.ndarray,
    y: np.ndarray,
    family: Family,
    opts: FitOptions = FitOptions(),
    beta0: np.ndarray | None = None,
) -> FitResult:
    """Low-level fitter on raw arrays (no Dataset validation)."""
    n, p = X.shape
    beta = np.zeros(p) if beta0 is None else np.asarray(beta0, dtype=np.float64).copy()
    trace = []
    status = FitStatus.MAX_ITER
    grad_norm = np.inf
    obj = np.inf
    polish_left = 3
    for it in range(opts.max_iter + 1):
        t = X @ beta
        obj = float(np.sum(family.nll(y, t)))
        grad = X.T @ family.d1(y, t)
        grad_norm = float(np.linalg.norm(grad))
        trace.append(obj)
        # A non-separable binary dataset keeps some margin y*t <= 0 at every
        # beta, so an iterate with all margins positive is itself a strictly
        # separating direction; the norm and objective rules catch the
        # quasi-separable escapes to infinity.
        if family.is_binary and (
            float(np.min(y * t)) > 0.0
            or float(np.linalg.norm(beta)) > opts.separable_beta_norm
            or obj < n * opts.separable_objective
        ):
            status = FitStatus.SEPARABLE
            break
        if grad_norm <= opts.tol:
            status = FitStatus.CONVERGED
            break
        if it == opts.max_iter:
            break
        W = family.d2(y, t)
        H = (X * W[:, None]).T @ X
        chol = _try_cholesky(H, opts.ridge)
        if chol is None:
            status = FitStatus.SINGULAR_HESSIAN
            break
        direction = linalg.cho_solve(chol, -grad)
        step = 1.0
        accepted = None
        # overshooting trial steps may overflow exp() to inf; such candidates
        # simply fail the decrease test, so the warning carries no signal
        with np.errstate(over="ignore"):
            for _ in range(opts.max_halvings + 1):
                cand = beta + step * direction
                cand_obj = float(np.sum(family.nll(y, X @ cand)))
                if cand_obj < obj:  # accept any decrease; NaN/inf fail
                    accepted = cand
                    break
                step *= 0.5
        if accepted is None:
            # No measurable decrease: the objective is at its float floor.
            # Inside the quadratic basin a full Newton step still contracts
            # the gradient, so take it (bounded number of times) and let the
            # gradient test decide.
            small_step = float(np.linalg.norm(direction)) <= 1e-2 * (
                1.0 + float(np.linalg.norm(beta))
            )
            if polish_left > 0 and grad_norm < 1e-3 and small_step:
                polish_left -= 1
                beta = beta + direction
                continue
            break  # stalled at numerical precision without meeting tol
        beta = accepted

    t = X @ beta
    H = (X * family.d2(y, t)[:, None]).T @ X
    if status is FitStatus.CONVERGED:
        try:
            linalg.cho_factor(H, lower=True)
        except linalg.LinAlgError:
            status = FitStatus.SINGULAR_HESSIAN
    return FitResult(
        beta_hat=beta,
        eta_lin=t,
        hessian=H,
        status=status,
        grad_norm=grad_norm,
        objective=obj,
        n_iter=len(trace) - 1,
        objective_trace=np.asarray(trace),
    )


def fit_mle(
    data: Dataset,
    opts: FitOptions = FitOptions(),
    *,
    beta0: np.ndarray | None = None,
) -> FitResult:
    """Maximum-likelihood fit of ``data``; see FitStatus for outcomes."""
    return newton_fit(data.X, data.y, data.family, opts, beta0)


def find_separating_direction(
    X: np.ndarray, y: np.ndarray, *, margin_tol: float = 1e-7
) -> np.ndarray | None:
    """LP feasibility check for strict linear separation of a binary dataset.

    Maximises the margin eps subject to ``y_i * (x_i @ w) >= eps`` with
    ``|w|_inf <= 1``. Returns a separating direction if the optimal margin
    exceeds ``margin_tol``, else None. Diagnostic only; the fitter itself
    detects separability from the Newton iterates.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    # variables z = (w_1..w_p, eps); maximise eps
    c = np.zeros(p + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-(y[:, None] * X), np.ones((n, 1))])
    b_ub = np.zeros(n)
    bounds = [(-1.0, 1.0)] * p + [(0.0, 1.0)]
    res = optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status == 0 and res.x is not None and res.x[-1] > margin_tol:
        return res.x[:-1]
    return None
