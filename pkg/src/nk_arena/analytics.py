"""Closed-form blind-search baselines and scaling-law fits.

For M agents independently resampling uniform genotypes, each trial hits a
global maximum with probability p (1/2^N for a unique maximum, 1/2^(N-1)
for the degenerate ferromagnetic pair), so the halting time follows a
geometric law with per-generation success probability 1 - (1-p)^M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

FIT_MODELS = ("n_plus_nlogn", "affine", "quadratic", "exponential")


@dataclass(frozen=True)
class BlindSearchModel:
    """Per-trial success probability and population size of a blind search."""

    p: float
    m: int

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ParameterError("success probability p must lie in (0, 1]")
        if self.m < 1:
            raise ParameterError("population size m must be >= 1")

    @classmethod
    def for_landscape(cls, n: int, m: int, degenerate: bool = False) -> "BlindSearchModel":
        """Model with p = 1/2^N, or 1/2^(N-1) when two maxima are degenerate."""
        return cls(p=2.0 ** -(n - 1 if degenerate else n), m=m)

    def _log_miss(self) -> float:
        # log[(1-p)^M], computed stably for tiny p
        return self.m * np.log1p(-self.p) if self.p < 1.0 else -np.inf


def halting_pmf(model: BlindSearchModel, t) -> np.ndarray | float:
    """P(t* = t) = [1-(1-p)^M] (1-p)^(M(t-1)); sums to 1 over t >= 1."""
    t = np.asarray(t)
    if np.any(t < 1):
        raise ParameterError("halting times start at t = 1")
    log_miss = model._log_miss()
    out = -np.expm1(log_miss) * np.exp(log_miss * (t - 1))
    return float(out) if out.ndim == 0 else out


def mean_halting_time(model: BlindSearchModel) -> float:
    """1 / [1-(1-p)^M]; approaches 1/(Mp) when Mp is small."""
    return float(1.0 / -np.expm1(model._log_miss()))


def success_cdf(model: BlindSearchModel, t) -> np.ndarray | float:
    """P(t* <= t) = 1-(1-p)^(Mt), nondecreasing in t."""
    t = np.asarray(t)
    out = -np.expm1(model._log_miss() * t)
    return float(out) if out.ndim == 0 else out


def mean_cost(model: BlindSearchModel, n: int) -> float:
    """Mean agent updates over 2^N: M * mean_halting_time / 2^N.

    Equals Mp / [1-(1-p)^M] when p = 1/2^N; close to 1 when Mp << 1 and to
    M/2^N when Mp >> 1.
    """
    return model.m * mean_halting_time(model) / 2.0**n


@dataclass
class ScalingFit:
    """Least-squares fit of halting-time data against a growth model."""

    model: str
    coefficients: tuple[float, ...]
    r_squared: float

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        c = self.coefficients
        if self.model == "n_plus_nlogn":
            return c[0] * n + c[1] * n * np.log(n)
        if self.model == "affine":
            return c[0] * n + c[1]
        if self.model == "quadratic":
            return c[0] * n**2
        return c[0] * np.exp(c[1] * n)


def fit_scaling(points, model: str) -> ScalingFit:
    """Fit (N, y) points with one of the growth models in FIT_MODELS.

    The exponential model is fitted in log space, and its R^2 is reported
    in log space as well.
    """
    if model not in FIT_MODELS:
        raise ParameterError(f"model must be one of {FIT_MODELS}, got {model!r}")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ParameterError("need at least 3 (N, y) points")
    n, y = pts[:, 0], pts[:, 1]
    if np.unique(n).size != n.size:
        raise ParameterError("N values must be distinct")
    if model == "n_plus_nlogn":
        design = np.column_stack([n, n * np.log(n)])
        target = y
    elif model == "affine":
        design = np.column_stack([n, np.ones_like(n)])
        target = y
    elif model == "quadratic":
        design = n[:, None] ** 2
        target = y
    else:
        if np.any(y <= 0):
            raise ParameterError("exponential fits require positive y values")
        design = np.column_stack([np.ones_like(n), n])
        target = np.log(y)
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        raise ParameterError("degenerate design matrix")
    resid = target - design @ coef
    total = target - target.mean()
    ss_tot = float(total @ total)
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / ss_tot
    if model == "exponential":
        coef = np.array([np.exp(coef[0]), coef[1]])
    return ScalingFit(model=model, coefficients=tuple(float(c) for c in coef), r_squared=r2)
