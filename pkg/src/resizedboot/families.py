"""GLM response families.

Each family is characterised by the per-observation negative log-likelihood
``nll(y, t)`` as a function of the linear predictor ``t = x @ beta``, together
with its first two derivatives in ``t``. Binary families use the {-1, +1}
response encoding; ``validate_y`` maps a {0, 1} encoding onto it.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .exceptions import DatasetError, ResponseOverflowError

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class Family:
    """Base class: negative log-likelihood pieces plus response handling."""

    name: str = ""
    is_binary: bool = False

    def nll(self, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def d1(self, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def d2(self, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate_y(self, y: np.ndarray) -> np.ndarray:
        """Check response validity; return the canonical encoding."""
        raise NotImplementedError

    def simulate(self, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Draw responses at linear predictors ``t``."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


def _validate_binary(y: np.ndarray, family_name: str) -> np.ndarray:
    values = set(np.unique(y).tolist())
    if values <= {0.0, 1.0}:
        return np.where(y > 0, 1.0, -1.0)
    if values <= {-1.0, 1.0}:
        return y.astype(np.float64)
    raise DatasetError(
        f"{family_name} response must be coded in {{0,1}} or {{-1,+1}}; "
        f"saw values {sorted(values)[:6]}"
    )


class Logistic(Family):
    """Bernoulli response with the logit link: P(Y=1|x) = sigmoid(t)."""

    name = "logistic"
    is_binary = True

    def nll(self, y, t):
        # log(1 + exp(-y*t)), computed without overflow
        return np.logaddexp(0.0, -y * t)

    def d1(self, y, t):
        return -y * special.expit(-y * t)

    def d2(self, y, t):
        # expit(t) * expit(-t); the (1 - p) form cancels badly in the tails
        return special.expit(t) * special.expit(-t)

    def validate_y(self, y):
        return _validate_binary(y, self.name)

    def simulate(self, t, rng):
        u = rng.random(t.shape[0])
        return np.where(u < special.expit(t), 1.0, -1.0)


class Probit(Family):
    """Bernoulli response with the probit link: P(Y=1|x) = Phi(t).

    The likelihood pieces are computed through ``log_ndtr`` and the inverse
    Mills ratio exp(log phi - log Phi), which stay finite far into the tails
    where a direct Phi(t) underflows.
    """

    name = "probit"
    is_binary = True

    @staticmethod
    def _mills(z: np.ndarray) -> np.ndarray:
        # phi(z) / Phi(z)
        log_phi = -0.5 * z * z - _LOG_SQRT_2PI
        return np.exp(log_phi - special.log_ndtr(z))

    def nll(self, y, t):
        return -special.log_ndtr(y * t)

    def d1(self, y, t):
        return -y * self._mills(y * t)

    def d2(self, y, t):
        z = y * t
        lam = self._mills(z)
        return lam * (z + lam)

    def validate_y(self, y):
        return _validate_binary(y, self.name)

    def simulate(self, t, rng):
        u = rng.random(t.shape[0])
        return np.where(u < special.ndtr(t), 1.0, -1.0)


class PoissonLog(Family):
    """Poisson counts with the log link: Y | x ~ Poisson(exp(t)).

    ``nll`` drops the log(y!) term, which does not depend on the coefficients.
    """

    name = "poisson-log"
    is_binary = False

    #: simulating means above this raises instead of producing huge counts
    mean_cap = 1e12

    def nll(self, y, t):
        return np.exp(t) - y * t

    def d1(self, y, t):
        return np.exp(t) - y

    def d2(self, y, t):
        return np.exp(t)

    def validate_y(self, y):
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise DatasetError(
                "poisson-log response must contain non-negative integers"
            )
        return y.astype(np.float64)

    def simulate(self, t, rng):
        mu = np.exp(t)
        if np.any(mu > self.mean_cap):
            raise ResponseOverflowError(
                f"Poisson mean exp(t) exceeds {self.mean_cap:g}; "
                "rescale the coefficients"
            )
        return rng.poisson(mu).astype(np.float64)


_FAMILIES: dict[str, Family] = {
    "logistic": Logistic(),
    "probit": Probit(),
    "poisson-log": PoissonLog(),
}
_ALIASES = {"poisson": "poisson-log"}

FAMILY_NAMES = tuple(_FAMILIES)


def get_family(name: str | Family) -> Family:
    """Resolve a family by name ('logistic', 'probit', 'poisson-log')."""
    if isinstance(name, Family):
        return name
    key = _ALIASES.get(name, name)
    try:
        return _FAMILIES[key]
    except KeyError:
        raise DatasetError(
            f"unknown family {name!r}; expected one of {sorted(_FAMILIES)}"
        ) from None
