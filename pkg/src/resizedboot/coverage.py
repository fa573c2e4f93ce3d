"""Monte Carlo coverage experiments and bias/sd studies.

``run_coverage`` repeats the full pipeline over freshly simulated datasets
(coefficients drawn once and held fixed) and tallies, per method and level,
the per-coordinate coverage frequency q_j and the per-repetition fraction of
covered coordinates qbar_i. ``baseline_bootstraps`` supplies the pairs and
parametric-at-the-MLE comparison modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import (
    BootstrapSummary,
    ResizedCoefficients,
    resize,
    run_bootstrap,
    summarize_bootstrap,
)
from .designs import DesignSpec, gen_coefficients, gen_covariates, gen_response
from .exceptions import ResizedBootError, TooManyFailuresError
from .fitting import Dataset, FitOptions, FitResult, FitStatus, fit_mle, newton_fit
from .intervals import IntervalSet, boot_g_ci, boot_t_ci, classical_se, classical_wald_ci
from .rng import child_seed, substream
from .serialize import SCHEMA_VERSION
from .signal_strength import estimate_gamma, sd_linear_predictor

_X_STREAM, _Y_STREAM = 1, 2
_GAMMA_KEY, _BOOT_KEY, _PARAM_KEY, _PAIRS_KEY = 3, 4, 5, 6
_PAIRS_STREAM = 31

METHODS = ("classical", "boot-g", "boot-t", "parametric", "pairs")
_RESIZED = {"boot-g", "boot-t"}


def pairs_indices(seed: int, b: int, n: int) -> np.ndarray:
    """Row indices (with replacement) for pairs-bootstrap replicate b."""
    return substream(seed, _PAIRS_STREAM, b).integers(0, n, n)


def baseline_bootstraps(
    data: Dataset,
    fit: FitResult,
    B: int,
    mode: str,
    seed: int = 0,
    *,
    fit_options: FitOptions = FitOptions(),
    fail_fraction: float = 0.5,
) -> BootstrapSummary:
    """Standard bootstraps for comparison; both over-disperse in high
    dimensions (the parametric one inflates the signal strength, the pairs
    one the dimensionality ratio), which is what the resized method fixes.

    ``mode``: 'parametric_at_mle' simulates responses at beta_hat itself;
    'pairs' resamples rows with replacement. Summaries are reduced exactly
    like the resized bootstrap, regressing against beta_hat.
    """
    if mode in ("parametric", "parametric_at_mle"):
        at_mle = ResizedCoefficients(
            beta_star=fit.beta_hat.copy(),
            scale_s=1.0,
            gamma_target=sd_linear_predictor(
                data.X, fit.beta_hat, has_intercept=data.has_intercept
            ),
        )
        return run_bootstrap(
            data, at_mle, B, seed, fit_options=fit_options, fail_fraction=fail_fraction
        )
    if mode != "pairs":
        raise ValueError(f"unknown baseline mode {mode!r}")
    kept = []
    for b in range(B):
        idx = pairs_indices(seed, b, data.n)
        res = newton_fit(
            data.X[idx], data.y[idx], data.family, fit_options, beta0=fit.beta_hat
        )
        if res.status is FitStatus.CONVERGED:
            kept.append(res.beta_hat)
    n_failed = B - len(kept)
    if n_failed > fail_fraction * B:
        raise TooManyFailuresError(n_failed, B, context="pairs bootstrap")
    return summarize_bootstrap(
        np.asarray(kept), fit.beta_hat, n_failed, has_intercept=data.has_intercept
    )


@dataclass
class CoverageReport:
    """Tally of a coverage experiment plus the bias/sd side tables."""

    design: DesignSpec
    methods: tuple[str, ...]
    levels: tuple[float, ...]
    n_reps_requested: int
    n_reps: int
    n_rep_failed: int
    beta_true: np.ndarray
    covered: dict  # method -> level -> (n_reps, p) bool array
    mle_mean: np.ndarray
    mle_sd: np.ndarray
    classical_se_mean: np.ndarray
    alpha_hats: np.ndarray
    sigma_hat_mean: np.ndarray | None
    gamma_mode: str
    gamma_used: np.ndarray
    gamma_estimates: np.ndarray | None
    n_boot_failed: int
    B: int
    seed: int

    # -- coverage metrics ------------------------------------------------
    def q_j(self, method: str, level: float) -> np.ndarray:
        """Per-coordinate coverage frequency across repetitions."""
        return self.covered[method][level].mean(axis=0)

    def qbar_i(self, method: str, level: float) -> np.ndarray:
        """Per-repetition fraction of covered coordinates."""
        return self.covered[method][level].mean(axis=1)

    def qbar(self, method: str, level: float) -> float:
        return float(self.qbar_i(method, level).mean())

    def qbar_se(self, method: str, level: float) -> float:
        qs = self.qbar_i(method, level)
        return float(qs.std(ddof=1) / np.sqrt(qs.shape[0]))

    def q_j_se(self, method: str, level: float) -> np.ndarray:
        """Binomial Monte Carlo standard error of each q_j."""
        q = self.q_j(method, level)
        return np.sqrt(q * (1.0 - q) / self.n_reps)

    # -- bias / sd tables --------------------------------------------------
    @property
    def nonnull_index(self) -> int:
        return int(np.argmax(np.abs(self.beta_true)))

    @property
    def null_index(self) -> int | None:
        nulls = np.flatnonzero(self.beta_true == 0)
        return int(nulls[0]) if nulls.size else None

    @property
    def empirical_alpha_per_coordinate(self) -> np.ndarray:
        """mean(beta_hat_j) / beta_j for non-nulls, NaN for nulls."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(
                self.beta_true != 0, self.mle_mean / self.beta_true, np.nan
            )

    @property
    def alpha_empirical(self) -> float:
        """Through-origin slope of the mean MLE on the true coefficients."""
        den = float(self.beta_true @ self.beta_true)
        if den == 0:
            return float("nan")
        return float(self.mle_mean @ self.beta_true / den)

    @property
    def alpha_resized_mean(self) -> float:
        return float(self.alpha_hats.mean()) if self.alpha_hats.size else float("nan")

    def to_json_dict(self) -> dict:
        lv = [float(x) for x in self.levels]
        return {
            "schema_version": SCHEMA_VERSION,
            "design": self.design.to_json_dict(),
            "methods": list(self.methods),
            "levels": lv,
            "n_reps_requested": self.n_reps_requested,
            "n_reps": self.n_reps,
            "n_rep_failed": self.n_rep_failed,
            "B": self.B,
            "seed": self.seed,
            "gamma": {
                "mode": self.gamma_mode,
                "used": self.gamma_used,
                "estimates": self.gamma_estimates,
            },
            "beta_true": self.beta_true,
            "q_j": {
                m: {str(l): self.q_j(m, l) for l in self.levels} for m in self.methods
            },
            "qbar_i": {
                m: {str(l): self.qbar_i(m, l) for l in self.levels}
                for m in self.methods
            },
            "qbar": {
                m: {str(l): self.qbar(m, l) for l in self.levels}
                for m in self.methods
            },
            "qbar_se": {
                m: {str(l): self.qbar_se(m, l) for l in self.levels}
                for m in self.methods
            },
            "bias": {
                "per_coordinate": self.empirical_alpha_per_coordinate,
                "alpha_empirical": self.alpha_empirical,
                "alpha_resized_mean": self.alpha_resized_mean,
            },
            "sd": {
                "empirical": self.mle_sd,
                "classical_mean": self.classical_se_mean,
                "resized_mean": self.sigma_hat_mean,
            },
            "n_boot_failed": self.n_boot_failed,
        }

    def summary_rows(self) -> list[dict]:
        """One row per method x level, for the CSV artifact and the printer."""
        rows = []
        jn = self.null_index
        jnn = self.nonnull_index
        for m in self.methods:
            for l in self.levels:
                qj = self.q_j(m, l)
                qse = self.q_j_se(m, l)
                rows.append(
                    {
                        "method": m,
                        "level": float(l),
                        "qbar": self.qbar(m, l),
                        "qbar_se": self.qbar_se(m, l),
                        "qj_nonnull": float(qj[jnn]),
                        "qj_nonnull_se": float(qse[jnn]),
                        "qj_null": float(qj[jn]) if jn is not None else float("nan"),
                        "qj_null_se": float(qse[jn]) if jn is not None else float("nan"),
                    }
                )
        return rows

    def format_table(self) -> str:
        """Human-readable method x level table; percentages, se in parens."""
        lines = [
            f"coverage over {self.n_reps} repetitions "
            f"(gamma: {self.gamma_mode}, B={self.B})",
            f"{'method':<12}{'level':>7}{'single-experiment':>21}"
            f"{'single non-null':>18}{'single null':>15}",
        ]
        for r in self.summary_rows():
            lines.append(
                f"{r['method']:<12}{100 * r['level']:>7.0f}"
                f"{100 * r['qbar']:>14.1f} ({100 * r['qbar_se']:.1f})"
                f"{100 * r['qj_nonnull']:>12.1f} ({100 * r['qj_nonnull_se']:.1f})"
                f"{100 * r['qj_null']:>9.1f} ({100 * r['qj_null_se']:.1f})"
            )
        return "\n".join(lines)


def run_coverage(
    design: DesignSpec,
    methods=("classical", "boot-g", "boot-t"),
    levels=(0.95,),
    n_reps: int = 100,
    B: int = 100,
    seed: int = 0,
    *,
    gamma_mode: str = "estimated",
    grid_size: int = 8,
    reps: int = 2,
    fix_x: bool = False,
    fit_options: FitOptions = FitOptions(),
    threads: int = 1,
    max_rep_failure_fraction: float = 0.2,
) -> CoverageReport:
    """Coverage experiment over ``n_reps`` fresh datasets from ``design``.

    Coefficients are drawn once (from ``design.seed``) and held fixed; X and
    Y are redrawn each repetition unless ``fix_x``. ``gamma_mode`` 'known'
    uses sd(X beta_true) of each repetition's realised X; 'estimated' runs
    the signal-strength estimator with reduced defaults per repetition.
    """
    methods = tuple(methods)
    levels = tuple(float(l) for l in levels)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected subset of {METHODS}")
    if gamma_mode not in ("known", "estimated"):
        raise ValueError("gamma_mode must be 'known' or 'estimated'")
    if n_reps < 2:
        raise ValueError("n_reps must be at least 2")

    beta_true = gen_coefficients(design, substream(design.seed, 0))
    p = design.p
    needs_resized = bool(_RESIZED.intersection(methods))

    covered = {m: {l: [] for l in levels} for m in methods}
    beta_sum = np.zeros(p)
    beta_sq = np.zeros(p)
    se_sum = np.zeros(p)
    sigma_sum = np.zeros(p)
    alpha_hats: list[float] = []
    gamma_used: list[float] = []
    gamma_estimates: list[float] = []
    n_boot_failed = 0
    n_done = 0
    n_failed = 0
    x_fixed = gen_covariates(design, substream(seed, _X_STREAM, 0)) if fix_x else None

    for rep in range(n_reps):
        X = (
            x_fixed
            if fix_x
            else gen_covariates(design, substream(seed, _X_STREAM, rep))
        )
        y = gen_response(X, beta_true, design.family, substream(seed, _Y_STREAM, rep))
        data = Dataset(X=X, y=y, family=design.family)
        fit = fit_mle(data, fit_options)
        if fit.status is not FitStatus.CONVERGED:
            n_failed += 1
            continue
        try:
            if gamma_mode == "known":
                gamma = sd_linear_predictor(X, beta_true)
            else:
                gamma = estimate_gamma(
                    data,
                    fit,
                    grid_size=grid_size,
                    reps=reps,
                    seed=child_seed(seed, _GAMMA_KEY, rep),
                    fit_options=fit_options,
                ).gamma_hat
            summaries: dict[str, tuple[BootstrapSummary, np.ndarray]] = {}
            if needs_resized:
                resized = resize(fit, gamma, X, has_intercept=data.has_intercept)
                rs = run_bootstrap(
                    data,
                    resized,
                    B,
                    child_seed(seed, _BOOT_KEY, rep),
                    fit_options=fit_options,
                    threads=threads,
                )
                summaries["resized"] = (rs, resized.beta_star)
            if "parametric" in methods:
                ps = baseline_bootstraps(
                    data, fit, B, "parametric_at_mle",
                    child_seed(seed, _PARAM_KEY, rep), fit_options=fit_options,
                )
                summaries["parametric"] = (ps, fit.beta_hat)
            if "pairs" in methods:
                rs = baseline_bootstraps(
                    data, fit, B, "pairs",
                    child_seed(seed, _PAIRS_KEY, rep), fit_options=fit_options,
                )
                summaries["pairs"] = (rs, fit.beta_hat)
        except ResizedBootError:
            n_failed += 1
            continue

        for m in methods:
            for l in levels:
                ci = _make_interval(m, fit, summaries, l)
                covered[m][l].append(ci.contains(beta_true))
        beta_sum += fit.beta_hat
        beta_sq += fit.beta_hat**2
        se_sum += classical_se(fit)
        if needs_resized:
            s, _ = summaries["resized"]
            alpha_hats.append(s.alpha_hat)
            sigma_sum += s.sigma_hat
            n_boot_failed += s.n_failed
        gamma_used.append(gamma)
        if gamma_mode == "estimated":
            gamma_estimates.append(gamma)
        n_done += 1

    if n_failed > max_rep_failure_fraction * n_reps:
        raise TooManyFailuresError(n_failed, n_reps, context="coverage repetition")
    mle_mean = beta_sum / n_done
    mle_var = np.maximum(beta_sq / n_done - mle_mean**2, 0.0) * n_done / (n_done - 1)
    return CoverageReport(
        design=design,
        methods=methods,
        levels=levels,
        n_reps_requested=n_reps,
        n_reps=n_done,
        n_rep_failed=n_failed,
        beta_true=beta_true,
        covered={
            m: {l: np.asarray(covered[m][l]) for l in levels} for m in methods
        },
        mle_mean=mle_mean,
        mle_sd=np.sqrt(mle_var),
        classical_se_mean=se_sum / n_done,
        alpha_hats=np.asarray(alpha_hats),
        sigma_hat_mean=(sigma_sum / len(alpha_hats)) if alpha_hats else None,
        gamma_mode=gamma_mode,
        gamma_used=np.asarray(gamma_used),
        gamma_estimates=np.asarray(gamma_estimates) if gamma_estimates else None,
        n_boot_failed=n_boot_failed,
        B=B,
        seed=seed,
    )


def _make_interval(method, fit, summaries, level) -> IntervalSet:
    if method == "classical":
        return classical_wald_ci(fit, level)
    if method == "boot-g":
        s, _ = summaries["resized"]
        return boot_g_ci(fit, s, level)
    if method == "boot-t":
        s, bstar = summaries["resized"]
        return boot_t_ci(fit, s, bstar, level)
    # baselines: Gaussian-pivot interval from their own summaries
    s, _ = summaries[method]
    ci = boot_g_ci(fit, s, level)
    return IntervalSet(lo=ci.lo, hi=ci.hi, level=ci.level, method=method)


@dataclass
class BiasSdStudy:
    """Empirical bias/sd of the MLE versus classical and resized estimates."""

    design: DesignSpec
    beta_true: np.ndarray
    mle_mean: np.ndarray
    mle_sd: np.ndarray
    classical_se_mean: np.ndarray
    alpha_hats: np.ndarray
    sigma_hat_mean: np.ndarray | None
    gamma_mode: str
    n_reps: int
    resized_reps: int
    B: int
    seed: int
    n_rep_failed: int

    @property
    def alpha_empirical(self) -> float:
        den = float(self.beta_true @ self.beta_true)
        return float(self.mle_mean @ self.beta_true / den) if den else float("nan")

    @property
    def alpha_resized_mean(self) -> float:
        return float(self.alpha_hats.mean()) if self.alpha_hats.size else float("nan")

    @property
    def empirical_alpha_per_coordinate(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.beta_true != 0, self.mle_mean / self.beta_true, np.nan)

    def format_table(self) -> str:
        """Rows for a designated null and the largest non-null coordinate;
        nulls show '-' in the bias columns."""
        jnn = int(np.argmax(np.abs(self.beta_true)))
        nulls = np.flatnonzero(self.beta_true == 0)
        lines = [
            f"bias/sd study over {self.n_reps} repetitions "
            f"(resized estimates from {len(self.alpha_hats)} runs, B={self.B})",
            f"{'':<18}{'bias(resized)':>14}{'bias(empirical)':>16}"
            f"{'sd(classical)':>14}{'sd(resized)':>12}{'sd(empirical)':>14}",
        ]

        def row(label, j, is_null):
            bias_r = "-" if is_null else f"{self.alpha_resized_mean:.3f}"
            bias_e = "-" if is_null else f"{self.empirical_alpha_per_coordinate[j]:.3f}"
            sd_r = (
                f"{self.sigma_hat_mean[j]:.3f}"
                if self.sigma_hat_mean is not None
                else "-"
            )
            return (
                f"{label:<18}{bias_r:>14}{bias_e:>16}"
                f"{self.classical_se_mean[j]:>14.3f}{sd_r:>12}{self.mle_sd[j]:>14.3f}"
            )

        if nulls.size:
            lines.append(row("beta = 0", int(nulls[0]), True))
        lines.append(row(f"beta = {self.beta_true[jnn]:.3f}", jnn, False))
        return "\n".join(lines)


def run_bias_sd_study(
    design: DesignSpec,
    n_reps: int = 200,
    seed: int = 0,
    *,
    resized_reps: int = 25,
    B: int = 100,
    gamma_mode: str = "known",
    grid_size: int = 8,
    reps: int = 2,
    fit_options: FitOptions = FitOptions(),
) -> BiasSdStudy:
    """Empirical bias and sd of the MLE over ``n_reps`` repetitions, with
    resized-bootstrap estimates averaged over the first ``resized_reps``
    repetitions (running the bootstrap on every repetition would dominate
    the cost without changing the average)."""
    if n_reps < 2:
        raise ValueError("n_reps must be at least 2")
    beta_true = gen_coefficients(design, substream(design.seed, 0))
    p = design.p
    beta_sum = np.zeros(p)
    beta_sq = np.zeros(p)
    se_sum = np.zeros(p)
    sigma_sum = np.zeros(p)
    alpha_hats: list[float] = []
    n_done = 0
    n_failed = 0
    for rep in range(n_reps):
        X = gen_covariates(design, substream(seed, _X_STREAM, rep))
        y = gen_response(X, beta_true, design.family, substream(seed, _Y_STREAM, rep))
        data = Dataset(X=X, y=y, family=design.family)
        fit = fit_mle(data, fit_options)
        if fit.status is not FitStatus.CONVERGED:
            n_failed += 1
            continue
        try:
            if len(alpha_hats) < resized_reps:
                if gamma_mode == "known":
                    gamma = sd_linear_predictor(X, beta_true)
                else:
                    gamma = estimate_gamma(
                        data,
                        fit,
                        grid_size=grid_size,
                        reps=reps,
                        seed=child_seed(seed, _GAMMA_KEY, rep),
                        fit_options=fit_options,
                    ).gamma_hat
                resized = resize(fit, gamma, X, has_intercept=data.has_intercept)
                summary = run_bootstrap(
                    data,
                    resized,
                    B,
                    child_seed(seed, _BOOT_KEY, rep),
                    fit_options=fit_options,
                )
                alpha_hats.append(summary.alpha_hat)
                sigma_sum += summary.sigma_hat
        except ResizedBootError:
            n_failed += 1
            continue
        beta_sum += fit.beta_hat
        beta_sq += fit.beta_hat**2
        se_sum += classical_se(fit)
        n_done += 1
    if n_failed > 0.2 * n_reps:
        raise TooManyFailuresError(n_failed, n_reps, context="bias/sd repetition")
    mle_mean = beta_sum / n_done
    mle_var = np.maximum(beta_sq / n_done - mle_mean**2, 0.0) * n_done / (n_done - 1)
    return BiasSdStudy(
        design=design,
        beta_true=beta_true,
        mle_mean=mle_mean,
        mle_sd=np.sqrt(mle_var),
        classical_se_mean=se_sum / n_done,
        alpha_hats=np.asarray(alpha_hats),
        sigma_hat_mean=(sigma_sum / len(alpha_hats)) if alpha_hats else None,
        gamma_mode=gamma_mode,
        n_reps=n_done,
        resized_reps=len(alpha_hats),
        B=B,
        seed=seed,
        n_rep_failed=n_failed,
    )
