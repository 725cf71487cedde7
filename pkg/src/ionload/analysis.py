"""Fits and statistics for loading-rate data.

Covers the whole analysis chain: the saturating-exponential fit to
power-sweep curves, weighted linear fits, Poisson MLE with a chi-square
goodness-of-fit, SEM, the power/flux rate normalization, the enhancement
ratio with propagated uncertainty, and the isotope-selectivity bound.
All fits are deterministic: fixed initialization, fixed damping
schedule, convergence to gradient norm below 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2 as _chi2_dist

__all__ = [
    "FitError",
    "FitResult",
    "GofStatistic",
    "saturation_model",
    "fit_saturation",
    "fit_linear",
    "poisson_mle",
    "sem",
    "normalize_rate",
    "enhancement_ratio",
    "selectivity_bound",
]


class FitError(ValueError):
    """Raised when a fit cannot be performed on the given data."""


@dataclass(frozen=True)
class FitResult:
    """Named parameters with 1-sigma uncertainties and covariance."""

    params: dict[str, float]
    sigmas: dict[str, float]
    covariance: np.ndarray
    residual_norm: float
    model_id: str
    extras: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, s in self.sigmas.items():
            if s < 0.0 or not np.isfinite(s):
                raise FitError(f"non-finite or negative sigma for {name}: {s}")
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (len(self.params), len(self.params)):
            raise FitError("covariance shape does not match parameter count")
        if not np.allclose(cov, cov.T, atol=1e-10 * (1.0 + np.abs(cov).max())):
            raise FitError("covariance not symmetric")


@dataclass(frozen=True)
class GofStatistic:
    """Chi-square goodness-of-fit over pooled bins."""

    chi2: float
    dof: int
    p_value: float


def _as_weights(y: np.ndarray, sigma, sem_floor: float | None) -> np.ndarray:
    """Per-point standard deviations for weighted least squares.

    None -> unit weights. Zeros are replaced by sem_floor, defaulting to
    the smallest positive sigma present (the data carries no scale for a
    zero-uncertainty point, so it gets the best scale on offer).
    """
    if sigma is None:
        return np.ones_like(y)
    s = np.asarray(sigma, dtype=float).copy()
    if s.shape != y.shape:
        raise FitError("sigma array shape mismatch")
    if np.any(s < 0.0):
        raise FitError("negative sigma")
    if np.any(s == 0.0):
        if sem_floor is None:
            positive = s[s > 0.0]
            sem_floor = float(positive.min()) if positive.size else 1.0
        s[s == 0.0] = sem_floor
    return s


def saturation_model(x, a: float, b: float):
    """f(x) = a * (1 - exp(-b*x))."""
    return a * -np.expm1(-b * np.asarray(x, dtype=float))


def fit_saturation(x, y, sigma=None, sem_floor: float | None = None) -> FitResult:
    """Weighted least-squares fit of y = a*(1 - exp(-b*x)).

    Gauss-Newton with Levenberg damping; starts at a0 = max(y),
    b0 = 1/mean(x); iterates until the gradient norm drops below 1e-9.
    Uncertainties treat the supplied sigmas as absolute; without sigmas
    the covariance is scaled by the reduced chi-square.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-d arrays of equal length")
    if x.size < 3:
        raise FitError("need at least 3 points")
    if np.any(x < 0.0):
        raise FitError("negative powers")
    if not np.any(y != 0.0):
        raise FitError("degenerate data: all rates are zero")
    s = _as_weights(y, sigma, sem_floor)

    a = float(np.max(y))
    xbar = float(np.mean(x))
    if xbar <= 0.0:
        raise FitError("mean of x must be positive for initialization")
    b = 1.0 / xbar

    def residuals(a_, b_):
        return (y - saturation_model(x, a_, b_)) / s

    def jacobian(a_, b_):
        e = np.exp(-b_ * x)
        # columns: d f/d a, d f/d b
        return np.column_stack(((1.0 - e) / s, a_ * x * e / s))

    lam = 1e-3
    r = residuals(a, b)
    chi2 = float(r @ r)
    converged = False
    for _ in range(500):
        jac = jacobian(a, b)
        grad = jac.T @ r
        if np.linalg.norm(grad) < 1e-9:
            converged = True
            break
        jtj = jac.T @ jac
        stepped = False
        for _ in range(50):
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            a_new, b_new = a + delta[0], b + delta[1]
            r_new = residuals(a_new, b_new)
            chi2_new = float(r_new @ r_new)
            if np.isfinite(chi2_new) and chi2_new <= chi2:
                improvement = chi2 - chi2_new
                step = max(
                    abs(delta[0]) / (abs(a_new) + 1e-300),
                    abs(delta[1]) / (abs(b_new) + 1e-300),
                )
                a, b, r, chi2 = a_new, b_new, r_new, chi2_new
                lam = max(lam / 3.0, 1e-12)
                stepped = True
                # at the numerical optimum: the objective and parameters
                # have stopped moving at machine precision even though a
                # small absolute gradient may remain out of reach
                if improvement <= 1e-14 * max(chi2, 1e-300) and step < 1e-10:
                    converged = True
                break
            lam *= 10.0
        if not stepped or converged:
            # no improving step exists at any damping: local optimum
            converged = True
            break
    if not converged:
        raise FitError("saturation fit did not converge")

    jac = jacobian(a, b)
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular normal equations at the optimum") from exc
    if sigma is None and x.size > 2:
        cov = cov * chi2 / (x.size - 2)
    cov = 0.5 * (cov + cov.T)
    return FitResult(
        params={"a": float(a), "b": float(b)},
        sigmas={"a": float(np.sqrt(cov[0, 0])), "b": float(np.sqrt(cov[1, 1]))},
        covariance=cov,
        residual_norm=float(np.sqrt(chi2)),
        model_id="saturation a*(1-exp(-b*x))",
        extras={"p_sat_mW": float(1.0 / b) if b != 0.0 else float("inf")},
    )


def fit_linear(x, y, sigma=None, sem_floor: float | None = None) -> FitResult:
    """Closed-form weighted least-squares line y = m*x + c."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise FitError("need at least 2 points")
    if np.all(x == x[0]):
        raise FitError("singular fit: all x values identical")
    s = _as_weights(y, sigma, sem_floor)
    w = 1.0 / s**2
    sw = w.sum()
    sx = (w * x).sum()
    sy = (w * y).sum()
    sxx = (w * x * x).sum()
    sxy = (w * x * y).sum()
    det = sw * sxx - sx * sx
    if det <= 0.0:
        raise FitError("singular normal equations")
    m = (sw * sxy - sx * sy) / det
    c = (sxx * sy - sx * sxy) / det
    r = (y - (m * x + c)) / s
    chi2 = float(r @ r)
    cov = np.array([[sw, -sx], [-sx, sxx]]) / det
    if sigma is None and x.size > 2:
        cov = cov * chi2 / (x.size - 2)
    return FitResult(
        params={"m": float(m), "c": float(c)},
        sigmas={"m": float(np.sqrt(cov[0, 0])), "c": float(np.sqrt(cov[1, 1]))},
        covariance=cov,
        residual_norm=float(np.sqrt(chi2)),
        model_id="linear m*x+c",
    )


def poisson_mle(counts) -> tuple[FitResult, GofStatistic]:
    """Poisson MLE over integer counts plus a chi-square GOF.

    lambda-hat is exactly the sample mean; its standard error is
    sqrt(lambda/n). The GOF pools count bins upward until each pooled
    bin has expected occupancy >= 5, with the final bin absorbing the
    open tail; dof = pooled bins - 2 (one for normalization, one for
    the estimated rate).
    """
    c = np.asarray(counts)
    if c.size == 0:
        raise FitError("empty count list")
    if np.any(c < 0) or not np.all(np.equal(np.mod(c, 1), 0)):
        raise FitError("counts must be non-negative integers")
    c = c.astype(int)
    n = c.size
    lam = float(np.mean(c))
    sigma_lam = float(np.sqrt(lam / n))
    fit = FitResult(
        params={"lambda": lam},
        sigmas={"lambda": sigma_lam},
        covariance=np.array([[lam / n]]),
        residual_norm=0.0,
        model_id="poisson pmf",
    )
    if lam == 0.0:
        return fit, GofStatistic(chi2=0.0, dof=0, p_value=1.0)

    kmax = int(c.max())
    observed = np.bincount(c, minlength=kmax + 1).astype(float)
    k = np.arange(kmax + 1)
    logpmf = k * np.log(lam) - lam - np.cumsum(np.concatenate(([0.0], np.log(k[1:]))))
    expected = n * np.exp(logpmf)
    # open upper tail goes with the last bin
    expected_tail = n - expected.sum()

    pooled_obs: list[float] = []
    pooled_exp: list[float] = []
    acc_o = 0.0
    acc_e = 0.0
    for i in range(kmax + 1):
        acc_o += observed[i]
        acc_e += expected[i]
        if acc_e >= 5.0:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = 0.0
            acc_e = 0.0
    acc_e += expected_tail
    if pooled_exp and acc_e < 5.0:
        pooled_obs[-1] += acc_o
        pooled_exp[-1] += acc_e
    else:
        pooled_obs.append(acc_o)
        pooled_exp.append(acc_e)

    obs = np.array(pooled_obs)
    exp = np.array(pooled_exp)
    chi2 = float(np.sum((obs - exp) ** 2 / exp))
    dof = max(len(obs) - 2, 0)
    p = float(_chi2_dist.sf(chi2, dof)) if dof > 0 else 1.0
    return fit, GofStatistic(chi2=chi2, dof=dof, p_value=p)


def sem(values) -> float:
    """Standard error of the mean: sample sd / sqrt(n)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("sem needs at least 2 values")
    return float(np.std(v, ddof=1) / np.sqrt(v.size))


def normalize_rate(
    rate: float,
    power_actual: float,
    power_reference: float,
    flux_actual: float,
    flux_reference: float,
    rate_sigma: float = 0.0,
    power_actual_sigma: float = 0.0,
    power_reference_sigma: float = 0.0,
    flux_actual_sigma: float = 0.0,
    flux_reference_sigma: float = 0.0,
) -> tuple[float, float]:
    """Rescale a loading rate to reference power and neutral flux.

    R' = R * (power_reference/power_actual) * (flux_reference/flux_actual),
    valid far from saturation where the rate is linear in both.
    Uncertainty is first-order propagation with uncorrelated inputs.
    """
    for name, val in (
        ("rate", rate),
        ("power_actual", power_actual),
        ("power_reference", power_reference),
        ("flux_actual", flux_actual),
        ("flux_reference", flux_reference),
    ):
        if val <= 0.0:
            raise ValueError(f"{name} must be positive, got {val}")
    scaled = rate * (power_reference / power_actual) * (flux_reference / flux_actual)
    rel_sq = (
        (rate_sigma / rate) ** 2
        + (power_actual_sigma / power_actual) ** 2
        + (power_reference_sigma / power_reference) ** 2
        + (flux_actual_sigma / flux_actual) ** 2
        + (flux_reference_sigma / flux_reference) ** 2
    )
    return scaled, scaled * float(np.sqrt(rel_sq))


def enhancement_ratio(
    rate_a: float,
    sigma_a: float,
    rate_b: float,
    sigma_b: float,
) -> tuple[float, float]:
    """rate_a/rate_b with first-order propagated uncertainty."""
    if rate_b <= 0.0:
        raise ValueError(f"denominator rate must be positive, got {rate_b}")
    if sigma_a < 0.0 or sigma_b < 0.0:
        raise ValueError("sigmas must be non-negative")
    ratio = rate_a / rate_b
    # written so rate_a = 0 propagates cleanly
    sig = np.hypot(sigma_a / rate_b, rate_a * sigma_b / rate_b**2)
    return ratio, float(sig)


def selectivity_bound(total_ions: int, impurity_ions: int) -> float:
    """Fraction of ions that are the target isotope: (total-impurity)/total."""
    if total_ions <= 0:
        raise ValueError("total_ions must be positive")
    if not 0 <= impurity_ions <= total_ions:
        raise ValueError("impurity_ions must lie in [0, total_ions]")
    return (total_ions - impurity_ions) / total_ions
