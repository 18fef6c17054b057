"""The generalized extreme value family: CDF, PDF, quantiles, sampling.

All evaluations route |shape| < 1e-8 to the Gumbel branch and use
log1p/expm1 forms elsewhere, so values are continuous through shape -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# |xi| below this evaluates on the Gumbel branch.
XI_EPS = 1e-8


@dataclass(frozen=True)
class GevParams:
    """Location (mm), scale (mm, > 0) and dimensionless shape."""

    mu: float
    sigma: float
    xi: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma", "xi"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def family(self) -> str:
        """'frechet' for positive shape, 'weibull' for negative, else 'gumbel'."""
        if self.xi > 0:
            return "frechet"
        if self.xi < 0:
            return "weibull"
        return "gumbel"

    def support(self) -> tuple[float, float]:
        """Interval outside which the density is zero."""
        if abs(self.xi) < XI_EPS:
            return (-np.inf, np.inf)
        endpoint = self.mu - self.sigma / self.xi
        if self.xi > 0:
            return (endpoint, np.inf)
        return (-np.inf, endpoint)


@dataclass(frozen=True)
class ReturnSpec:
    """A return period in years paired with its yearly exceedance probability."""

    period_years: float
    exceedance_prob: float

    def __post_init__(self) -> None:
        if not 0.0 < self.exceedance_prob < 1.0:
            raise ValueError("exceedance_prob must lie in (0, 1)")
        if self.period_years <= 1.0:
            raise ValueError("period_years must exceed 1")
        if abs(self.period_years * self.exceedance_prob - 1.0) > 1e-9:
            raise ValueError("period_years must equal 1 / exceedance_prob")

    @classmethod
    def from_period(cls, years: float) -> "ReturnSpec":
        return cls(period_years=years, exceedance_prob=1.0 / years)

    @classmethod
    def from_prob(cls, p: float) -> "ReturnSpec":
        return cls(period_years=1.0 / p, exceedance_prob=p)


def _as_output(x: object, out: np.ndarray) -> float | np.ndarray:
    return float(out) if np.ndim(x) == 0 else out


def gev_cdf(x: object, params: GevParams) -> float | np.ndarray:
    """Distribution function; 0/1 beyond the finite support endpoint."""
    z = (np.asarray(x, dtype=float) - params.mu) / params.sigma
    xi = params.xi
    if abs(xi) < XI_EPS:
        out = np.exp(-np.exp(-z))
    else:
        inside = 1.0 + xi * z > 0
        logt = np.log1p(xi * np.where(inside, z, 0.0))
        with np.errstate(over="ignore"):
            vals = np.exp(-np.exp(-logt / xi))
        out = np.where(inside, vals, 0.0 if xi > 0 else 1.0)
    return _as_output(x, out)


def gev_pdf(x: object, params: GevParams) -> float | np.ndarray:
    """Density in 1/mm; zero outside the support."""
    z = (np.asarray(x, dtype=float) - params.mu) / params.sigma
    xi = params.xi
    log_sigma = np.log(params.sigma)
    if abs(xi) < XI_EPS:
        with np.errstate(over="ignore"):
            out = np.exp(-log_sigma - z - np.exp(-z))
    else:
        inside = 1.0 + xi * z > 0
        w = np.log1p(xi * np.where(inside, z, 0.0)) / xi
        with np.errstate(over="ignore"):
            vals = np.exp(-log_sigma - (1.0 + xi) * w - np.exp(-w))
        out = np.where(inside, vals, 0.0)
    return _as_output(x, out)


def gev_quantile(p: object, params: GevParams) -> float | np.ndarray:
    """Inverse CDF for probabilities strictly inside (0, 1)."""
    parr = np.asarray(p, dtype=float)
    if np.any((parr <= 0.0) | (parr >= 1.0)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    loglog = np.log(-np.log(parr))
    xi = params.xi
    if abs(xi) < XI_EPS:
        out = params.mu - params.sigma * loglog
    else:
        out = params.mu + params.sigma * np.expm1(-xi * loglog) / xi
    return _as_output(p, out)


def return_level(spec: ReturnSpec, params: GevParams) -> float:
    """Level exceeded once per ``spec.period_years`` years on average."""
    return float(gev_quantile(1.0 - spec.exceedance_prob, params))


def gev_sample(params: GevParams, n: int, seed: int) -> np.ndarray:
    """``n`` inverse-transform draws, reproducible for a given seed."""
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    # rng.random can emit exactly 0.0, which the quantile rejects
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return np.asarray(gev_quantile(u, params))


def log_likelihood(params: GevParams, data: object) -> float:
    """Total log density; -inf when any point falls outside the support.

    The -inf sentinel (rather than an exception) lets optimizers traverse
    infeasible parameter regions.
    """
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("data must be nonempty")
    z = (x - params.mu) / params.sigma
    xi = params.xi
    n = x.size
    if abs(xi) < XI_EPS:
        ll = -n * np.log(params.sigma) - z.sum() - np.exp(-z).sum()
    else:
        t = 1.0 + xi * z
        if np.any(t <= 0.0):
            return -np.inf
        w = np.log1p(xi * z) / xi
        with np.errstate(over="ignore"):
            ll = -n * np.log(params.sigma) - (1.0 + xi) * w.sum() - np.exp(-w).sum()
    ll = float(ll)
    return ll if np.isfinite(ll) else -np.inf
