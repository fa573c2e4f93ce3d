"""Single-fit estimation of the corrupted signal strength eta.

``sloe_estimate`` approximates each leave-one-out linear predictor from the
full fit via one Newton correction, then takes the spread of those values:

    w_i = x_i' H^{-1} x_i
    q_i = w_i / (1 - w_i * f''_{y_i}(t_i))
    S_i = x_i' beta_hat + q_i * f'_{y_i}(t_i)
    eta_hat^2 = mean(S^2) - mean(S)^2        (1/n normalisation)

``loo_oracle`` is the brute-force counterpart (n full refits); it exists for
validation and tests only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import FitFailedError, LeverageDegenerateError
from .fitting import Dataset, FitOptions, FitResult, FitStatus, fit_mle


@dataclass
class SloeEstimate:
    eta_hat: float
    s_values: np.ndarray
    w_values: np.ndarray


def sloe_estimate(
    data: Dataset, fit: FitResult, *, leverage_guard: float = 1e-8
) -> SloeEstimate:
    """Leave-one-out estimate of eta = sd of a new observation's x' beta_hat."""
    if fit.status is not FitStatus.CONVERGED:
        raise ValueError(f"sloe_estimate requires a converged fit, got {fit.status.value}")
    t = fit.eta_lin
    d1 = data.family.d1(data.y, t)
    d2 = data.family.d2(data.y, t)
    L = linalg.cholesky(fit.hessian, lower=True)
    Z = linalg.solve_triangular(L, data.X.T, lower=True)
    w = np.einsum("ij,ij->j", Z, Z)  # x_i' H^-1 x_i without forming H^-1
    denom = 1.0 - w * d2
    if np.any(denom <= leverage_guard):
        worst = int(np.argmin(denom))
        raise LeverageDegenerateError(
            f"observation {worst} has 1 - w*f'' = {denom[worst]:.3e} <= "
            f"{leverage_guard:g}; the leave-one-out approximation is unreliable"
        )
    q = w / denom
    s = t + q * d1
    eta_sq = float(np.var(s))
    return SloeEstimate(eta_hat=float(np.sqrt(max(eta_sq, 0.0))), s_values=s, w_values=w)


def loo_oracle(data: Dataset, opts: FitOptions = FitOptions()) -> float:
    """Exact leave-one-out sd of x_i' beta_(i), by n full refits."""
    n = data.n
    preds = np.empty(n)
    for i in range(n):
        sub = Dataset(
            X=np.delete(data.X, i, axis=0),
            y=np.delete(data.y, i),
            family=data.family,
            has_intercept=data.has_intercept,
        )
        res = fit_mle(sub, opts)
        if res.status is not FitStatus.CONVERGED:
            raise FitFailedError(
                f"leave-one-out refit without observation {i} ended with "
                f"status {res.status.value}"
            )
        preds[i] = data.X[i] @ res.beta_hat
    return float(np.std(preds))
