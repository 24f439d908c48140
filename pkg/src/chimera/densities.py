"""Predictive densities built from quantiles: monotone-cubic CDFs, numerical
PDFs, linear opinion pools, and the independence-copula joint over peak week
and peak intensity."""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import MonotonicityError, TargetError, WeightSumError

GRID_POINTS = 8001

TARGETS = ("peak_week", "peak_intensity")


@dataclass(frozen=True, eq=False)
class QuantileForecast:
    """One predictive distribution as (probability level, value) pairs."""

    levels: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        values = np.array(self.values, dtype=float)
        if levels.shape != values.shape or levels.ndim != 1 or levels.size == 0:
            raise ValueError("levels and values must be equal-length 1-d vectors")
        if np.any(levels <= 0) or np.any(levels >= 1) or np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly increasing inside (0, 1)")
        if np.any(np.diff(values) < 0):
            raise MonotonicityError("quantile values must be non-decreasing in level")
        levels.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.levels.size


@dataclass(frozen=True)
class IndividualForecast:
    """A single human forecast of one peak target for one location."""

    location: str
    target: str
    submitted_at: datetime.date
    quantiles: QuantileForecast
    forecaster_id: str | None = None

    def __post_init__(self):
        if self.target not in TARGETS:
            raise TargetError(f"unknown target {self.target!r}; expected one of {TARGETS}")


@dataclass(frozen=True)
class TailPolicy:
    """How far beyond the outermost quantile knots the CDF is extended
    linearly to reach 0 and 1. Absolute bounds override the factor."""

    factor: float = 0.5
    lo: float | None = None
    hi: float | None = None


@dataclass(frozen=True)
class Density1D:
    """A one-dimensional predictive density with bounded support.

    `cdf` is monotone with cdf(lo) = 0 and cdf(hi) = 1; `pdf`, when present,
    is non-negative and integrates to one over [lo, hi]. Both callables accept
    scalars or arrays and are defined on all of R (flat / zero outside the
    support). Instances are immutable and safe to share across threads.
    """

    lo: float
    hi: float
    cdf: Callable = field(repr=False)
    pdf: Callable | None = field(repr=False, default=None)
    knots: np.ndarray | None = field(repr=False, default=None)

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def log_pdf(self, x):
        if self.pdf is None:
            raise ValueError("density has no pdf; call pdf_from_cdf first")
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def grid(self, n: int = GRID_POINTS) -> np.ndarray:
        """Uniform n-point grid over the support, augmented with any knots."""
        xs = np.linspace(self.lo, self.hi, n)
        if self.knots is not None and self.knots.size:
            xs = np.unique(np.concatenate([xs, self.knots]))
        return xs

    def quantiles(self, levels) -> np.ndarray:
        """Invert the CDF at the given probability levels."""
        xs = self.grid()
        F = np.asarray(self.cdf(xs), dtype=float)
        F = F + np.linspace(0.0, 1e-12, F.size)  # break flat stretches for interp
        return np.interp(np.asarray(levels, dtype=float), F, xs)


def _dedupe_values(values: np.ndarray) -> np.ndarray:
    """Nudge tied quantile values apart so interpolation knots are strictly
    increasing; ties encode near-point masses."""
    if np.all(np.diff(values) > 0):
        return values
    scale = max(abs(values[0]), abs(values[-1]), 1.0)
    eps = 1e-9 * scale
    out = values.copy()
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = out[i - 1] + eps
    return out


def cdf_from_quantiles(q: QuantileForecast, tail_policy: TailPolicy = TailPolicy()) -> Density1D:
    """Interpolate a CDF through quantile knots with a monotone cubic spline,
    extended linearly in the tails to reach 0 and 1.

    The returned density has no pdf yet; see `pdf_from_cdf`.
    """
    v = _dedupe_values(q.values)
    p = q.levels
    spread = v[-1] - v[0]
    if spread <= 0:
        spread = max(abs(v[0]), 1.0) * 1e-6
    lo = tail_policy.lo if tail_policy.lo is not None else v[0] - tail_policy.factor * spread
    hi = tail_policy.hi if tail_policy.hi is not None else v[-1] + tail_policy.factor * spread
    if lo >= v[0] or hi <= v[-1]:
        raise ValueError("tail bounds must lie strictly outside the knot range")

    interior = PchipInterpolator(v, p) if v.size >= 2 else None
    v0, vK, p0, pK = v[0], v[-1], p[0], p[-1]

    def cdf(x):
        scalar = np.isscalar(x) or np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        out[x <= lo] = 0.0
        out[x >= hi] = 1.0
        left = (x > lo) & (x < v0)
        out[left] = p0 * (x[left] - lo) / (v0 - lo)
        right = (x > vK) & (x < hi)
        out[right] = pK + (1.0 - pK) * (x[right] - vK) / (hi - vK)
        mid = (x >= v0) & (x <= vK)
        if interior is not None:
            out[mid] = np.clip(interior(x[mid]), 0.0, 1.0)
        else:
            out[mid] = p0
        return float(out[0]) if scalar else out

    return Density1D(lo=float(lo), hi=float(hi), cdf=cdf, pdf=None, knots=v.copy())


def pdf_from_cdf(d: Density1D, n: int = GRID_POINTS) -> Density1D:
    """Attach a pdf obtained by numerically differentiating the CDF on a dense
    grid; negative finite differences are clipped to zero and the result is
    renormalized to integrate to one.

    The CDF may have slope breaks at the quantile knots, so the grid keeps
    knot locations as nodes; the symmetric difference there averages the
    one-sided slopes.
    """
    xp = d.grid(n)
    h = (d.hi - d.lo) * 1e-7
    up = np.minimum(xp + h, d.hi)
    dn = np.maximum(xp - h, d.lo)
    fp = (np.asarray(d.cdf(up)) - np.asarray(d.cdf(dn))) / (up - dn)
    fp = np.clip(fp, 0.0, None)
    total = np.trapezoid(fp, xp)
    if total <= 0:
        raise ValueError("CDF is flat; cannot form a density")
    fp /= total

    def pdf(x):
        return np.interp(np.asarray(x, dtype=float), xp, fp, left=0.0, right=0.0)

    return Density1D(lo=d.lo, hi=d.hi, cdf=d.cdf, pdf=pdf, knots=d.knots)


def _check_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.size != n:
        raise WeightSumError(f"{w.size} weights for {n} densities")
    if np.any(w < 0):
        raise WeightSumError("weights must be non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise WeightSumError(f"weights sum to {w.sum():.12f}, expected 1")
    return w


def linear_pool(densities: Sequence[Density1D], weights=None) -> Density1D:
    """Convex mixture of densities; the pooled CDF is the weighted mixture of
    component CDFs."""
    if len(densities) == 0:
        raise WeightSumError("cannot pool an empty list of densities")
    if weights is None:
        weights = np.full(len(densities), 1.0 / len(densities))
    w = _check_weights(weights, len(densities))
    lo = min(d.lo for d in densities)
    hi = max(d.hi for d in densities)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return sum(wj * np.asarray(d.cdf(x)) for wj, d in zip(w, densities))

    pdf = None
    if all(d.pdf is not None for d in densities):
        def pdf(x):  # noqa: F811 - deliberate conditional definition
            x = np.asarray(x, dtype=float)
            return sum(wj * np.asarray(d.pdf(x)) for wj, d in zip(w, densities))

    knot_arrays = [d.knots for d in densities if d.knots is not None]
    knots = np.unique(np.concatenate(knot_arrays)) if knot_arrays else None
    return Density1D(lo=float(lo), hi=float(hi), cdf=cdf, pdf=pdf, knots=knots)


def uniform_density(lo: float, hi: float) -> Density1D:
    """Exact uniform density on [lo, hi]."""
    if hi <= lo:
        raise ValueError("hi must exceed lo")
    height = 1.0 / (hi - lo)

    def cdf(x):
        return np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), height, 0.0)

    return Density1D(lo=float(lo), hi=float(hi), cdf=cdf, pdf=pdf)


@dataclass(frozen=True)
class JointDensity2D:
    """Joint density over (peak week, peak intensity) built from marginals
    through a copula; only the independence copula is supported, so the joint
    factorizes as the product of the marginals."""

    week_marginal: Density1D
    intensity_marginal: Density1D
    copula_kind: str = "independence"

    def __post_init__(self):
        if self.copula_kind != "independence":
            raise ValueError(f"unsupported copula: {self.copula_kind!r}")
        for m in (self.week_marginal, self.intensity_marginal):
            if m.pdf is None:
                raise ValueError("joint construction requires marginals with pdfs")

    def pdf(self, tau, rho):
        return np.asarray(self.week_marginal.pdf(tau)) * np.asarray(
            self.intensity_marginal.pdf(rho)
        )

    def log_pdf(self, tau, rho):
        return self.week_marginal.log_pdf(tau) + self.intensity_marginal.log_pdf(rho)


def joint_independence(week: Density1D, intensity: Density1D) -> JointDensity2D:
    """Combine peak-week and peak-intensity marginals under independence."""
    return JointDensity2D(week_marginal=week, intensity_marginal=intensity)


def log_joint_at(joint: JointDensity2D, tau: float, rho: float) -> float:
    """Log joint density at a proposed peak week and peak intensity; -inf
    outside the support."""
    return float(joint.log_pdf(tau, rho))
