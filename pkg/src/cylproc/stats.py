"""Aggregation of realization results: moments, normality diagnostics, rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import special


@dataclass(frozen=True)
class Moments:
    """
    Count, mean and central power sums M2..M4 of a sample.

    Two summaries merge exactly (up to rounding) with the pairwise update
    formulas, so any partition of the data across workers gives the same
    result to about 1e-12 relative.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def of(cls, values) -> "Moments":
        x = np.asarray(values, dtype=float).ravel()
        if len(x) == 0:
            return cls()
        # pairwise tree keeps the rounding error logarithmic in the size
        if len(x) <= 64:
            mu = float(np.mean(x))
            dx = x - mu
            return cls(len(x), mu, float(np.sum(dx**2)), float(np.sum(dx**3)),
                       float(np.sum(dx**4)))
        h = len(x) // 2
        return cls.of(x[:h]).merge(cls.of(x[h:]))

    def merge(self, other: "Moments") -> "Moments":
        na, nb = self.count, other.count
        if na == 0:
            return other
        if nb == 0:
            return self
        n = na + nb
        delta = other.mean - self.mean
        d_n = delta / n
        mean = self.mean + nb * d_n
        m2 = self.m2 + other.m2 + delta * d_n * na * nb
        m3 = (self.m3 + other.m3 + d_n * d_n * delta * na * nb * (na - nb)
              + 3.0 * d_n * (na * other.m2 - nb * self.m2))
        m4 = (self.m4 + other.m4
              + d_n**3 * delta * na * nb * (na * na - na * nb + nb * nb)
              + 6.0 * d_n * d_n * (na * na * other.m2 + nb * nb * self.m2)
              + 4.0 * d_n * (na * other.m3 - nb * self.m3))
        return Moments(n, mean, m2, m3, m4)


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float

    @classmethod
    def from_moments(cls, mo: Moments) -> "SampleSummary":
        n = mo.count
        if n == 0:
            return cls(0, math.nan, math.nan, math.nan, math.nan)
        var = mo.m2 / (n - 1) if n >= 2 else math.nan
        se_mean = math.sqrt(var / n) if n >= 2 else math.nan
        if n >= 4:
            mu4 = mo.m4 / n
            mu2 = mo.m2 / n
            # Var(s²) ≈ (μ4 - (n-3)/(n-1) μ2²) / n
            se_var = math.sqrt(max(mu4 - (n - 3) / (n - 1) * mu2 * mu2, 0.0) / n)
        else:
            se_var = math.nan
        return cls(n, mo.mean, max(var, 0.0) if n >= 2 else var, se_mean, se_var)


def summarize(values) -> SampleSummary:
    return SampleSummary.from_moments(Moments.of(values))


def summarize_parts(parts) -> SampleSummary:
    """Summary of the concatenation of several samples, merged pairwise."""
    return SampleSummary.from_moments(reduce(Moments.merge, (Moments.of(p) for p in parts),
                                             Moments()))


def standardize(values, center: float, scale: float) -> np.ndarray:
    if not scale > 0:
        raise ValueError("scale must be positive")
    return (np.asarray(values, dtype=float) - center) / scale


def standardize_empirical(values) -> np.ndarray:
    """Standardize with the sample mean and standard deviation."""
    x = np.asarray(values, dtype=float)
    sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
    return standardize(x, float(np.mean(x)), sd)


def normal_cdf(x):
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def ks_distance_to_normal(sample) -> float:
    """Kolmogorov distance between the empirical CDF and the standard normal CDF."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    phi = normal_cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - phi), np.max(phi - (i - 1) / n)))


@dataclass(frozen=True)
class RateFit:
    r: tuple
    d: tuple
    slope: float
    intercept: float
    residual_rms: float

    def predict(self, r) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(r, dtype=float) ** self.slope


def fit_rate(pairs) -> RateFit:
    """Least-squares line through ``(log r, log d)``."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (r, d) pairs")
    r = np.array([p[0] for p in pairs], dtype=float)
    d = np.array([p[1] for p in pairs], dtype=float)
    if np.any(r <= 0) or np.any(d <= 0):
        raise ValueError("r and d must be positive")
    lx, ly = np.log(r), np.log(d)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (slope * lx + intercept)
    return RateFit(tuple(r), tuple(d), float(slope), float(intercept),
                   float(np.sqrt(np.mean(res**2))))


def empirical_covariance(pairs, r: float, n: int, m: int) -> np.ndarray:
    """
    Unbiased sample covariance of ``(V_n, V_{n-1})`` estimates scaled by
    ``r^{-(n+m)}``.
    """
    x = np.asarray(pairs, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2 or len(x) < 2:
        raise ValueError("need at least two (V_n, V_{n-1}) pairs")
    c = x - x.mean(axis=0)
    cov = c.T @ c / (len(x) - 1)
    cov = 0.5 * (cov + cov.T)
    return cov / r ** (n + m)


def is_psd(matrix, tol: float = 1e-12) -> bool:
    a = np.asarray(matrix, dtype=float)
    if not np.allclose(a, a.T, atol=tol * max(1.0, np.max(np.abs(a)))):
        return False
    return bool(np.linalg.eigvalsh(a)[0] >= -tol * max(1.0, np.max(np.abs(a))))


__all__ = [
    "Moments", "SampleSummary", "summarize", "summarize_parts", "standardize",
    "standardize_empirical", "normal_cdf", "ks_distance_to_normal", "RateFit",
    "fit_rate", "empirical_covariance", "is_psd",
]
