"""Log prior, likelihood and posterior for surveillance-only (control) and
human-judgment-augmented (chimeric) fits, plus the unconstrained-space
potential used by gradient-based sampling.

The chimeric posterior multiplies the control posterior by exp(omega) times
the human-judgment joint density evaluated at the trajectory's proposed peak
week and peak intensity; the peak is the smooth softmax surrogate so the
log density stays differentiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np
from jax.scipy.special import gammaln

from .densities import JointDensity2D
from .dynamics import (
    ModelConfig,
    ModelParams,
    N_SCALARS,
    soft_peak_jnp,
    weekly_hosps_jnp,
)
from .series import HospSeries

JOINT_GRID_N = 8192
TEMPERATURE_FRACTION = 0.05
TEMPERATURE_FLOOR = 1e-3
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class PosteriorSpec:
    """What a fit targets: the observations, the model shape, and (for the
    chimeric kind) the human-judgment joint with its weight omega."""

    kind: str
    obs: HospSeries
    config: ModelConfig
    hj_joint: JointDensity2D | None = None
    omega: float = 1.0
    peak_temperature: float | None = None  # None: 5% of the peak weekly level

    def __post_init__(self):
        if self.kind not in ("control", "chimeric"):
            raise ValueError(f"kind must be control or chimeric, got {self.kind!r}")
        if self.kind == "chimeric" and self.hj_joint is None:
            raise ValueError("chimeric fits require a human-judgment joint")
        if self.kind == "control" and self.hj_joint is not None:
            raise ValueError("control fits must not carry a human-judgment joint")
        if len(self.obs) > self.config.season_weeks:
            raise ValueError("observations extend past the configured season")
        if self.peak_temperature is not None and self.peak_temperature <= 0:
            raise ValueError("peak_temperature must be positive")


# --- jnp pieces ---

def _log_prior_jnp(vec, t_days):
    beta_g, beta_e, mu_i, mu_h, alpha, R, mu, sigma, s = vec[:N_SCALARS]
    z = vec[N_SCALARS:]

    def exponential(x):  # Gamma(1, 1)
        return jnp.where(x > 0, -x, -jnp.inf)

    def arcsine(x):  # Beta(1/2, 1/2)
        ok = (x > 0) & (x < 1)
        safe = jnp.clip(x, 1e-300, 1.0 - 1e-16)
        return jnp.where(ok, -jnp.log(jnp.pi) - 0.5 * (jnp.log(safe) + jnp.log1p(-safe)), -jnp.inf)

    def uniform_0T(x):
        return jnp.where((x >= 0) & (x <= t_days), -jnp.log(float(t_days)), -jnp.inf)

    half_cauchy = jnp.where(s > 0, jnp.log(2.0 / jnp.pi) - jnp.log1p(s**2), -jnp.inf)
    normals = jnp.sum(-0.5 * z**2 - 0.5 * _LOG_2PI)
    return (
        exponential(beta_g)
        + exponential(beta_e)
        + exponential(R)
        + arcsine(mu_i)
        + arcsine(mu_h)
        + arcsine(alpha)
        + uniform_0T(mu)
        + uniform_0T(sigma)
        + jnp.where(sigma > 0, 0.0, -jnp.inf)
        + half_cauchy
        + normals
    )


def _poisson_loglik_jnp(weekly_h, obs_counts):
    h = jnp.maximum(weekly_h[: obs_counts.shape[0]], 1e-10)
    return jnp.sum(obs_counts * jnp.log(h) - h - gammaln(obs_counts + 1.0))


def _interp_uniform(x, x0, dx, vals):
    """Linear interpolation on a uniform grid, zero outside it."""
    pos = (x - x0) / dx
    idx = jnp.clip(jnp.floor(pos).astype(jnp.int32), 0, vals.shape[0] - 2)
    frac = pos - idx
    v = vals[idx] * (1.0 - frac) + vals[idx + 1] * frac
    inside = (pos >= 0.0) & (pos <= vals.shape[0] - 1.0)
    return jnp.where(inside, jnp.maximum(v, 0.0), 0.0)


def _safe_log(p):
    return jnp.where(p > 0, jnp.log(jnp.maximum(p, 1e-300)), -jnp.inf)


def _hj_term_jnp(weekly_h, omega, temp_fixed, grids):
    wk_x0, wk_dx, wk_pdf, int_x0, int_dx, int_pdf = grids
    temp = jnp.where(
        temp_fixed > 0,
        temp_fixed,
        jnp.maximum(TEMPERATURE_FRACTION * jnp.max(weekly_h), TEMPERATURE_FLOOR),
    )
    tau, rho = soft_peak_jnp(weekly_h, temp)
    log_week = _safe_log(_interp_uniform(tau, wk_x0, wk_dx, wk_pdf))
    log_intensity = _safe_log(_interp_uniform(rho, int_x0, int_dx, int_pdf))
    return omega + log_week + log_intensity


@lru_cache(maxsize=None)
def _compiled(season_weeks: int, lag: int, obs_len: int, chimeric: bool):
    def log_post(vec, obs, population, seed_scale, omega, temp_fixed, grids):
        weekly = weekly_hosps_jnp(vec, population, seed_scale, season_weeks, lag)
        value = _log_prior_jnp(vec, 7 * season_weeks) + _poisson_loglik_jnp(weekly, obs)
        if chimeric:
            value = value + _hj_term_jnp(weekly, omega, temp_fixed, grids)
        return value

    def potential(u, obs, population, seed_scale, omega, temp_fixed, grids):
        vec, logjac = _constrain_jnp(u, 7 * season_weeks)
        return -(log_post(vec, obs, population, seed_scale, omega, temp_fixed, grids) + logjac)

    return {
        "log_post": jax.jit(log_post),
        "potential": jax.jit(potential),
        "potential_grad": jax.jit(jax.value_and_grad(potential)),
        "potential_batch": jax.jit(jax.vmap(potential, in_axes=(0,) + (None,) * 6)),
    }


# --- unconstrained transform ---

def _constrain_jnp(u, t_days):
    """Map an unconstrained vector to the parameter supports; returns the
    constrained vector and the log Jacobian of the map."""
    logs = u[jnp.array([0, 1, 5, 8])]  # beta_g, beta_e, R, s
    sig = jax.nn.sigmoid(u[2:5])  # mu_infections, mu_hosps, alpha
    sig_T = jax.nn.sigmoid(u[6:8])  # mu, sigma on (0, T)
    vec = jnp.concatenate(
        [
            jnp.exp(u[0:2]),
            sig,
            jnp.exp(u[5:6]),
            t_days * sig_T,
            jnp.exp(u[8:9]),
            u[N_SCALARS:],
        ]
    )
    def log_sigmoid_jac(x):
        return jax.nn.log_sigmoid(x) + jax.nn.log_sigmoid(-x)

    logjac = (
        jnp.sum(logs)
        + jnp.sum(log_sigmoid_jac(u[2:5]))
        + jnp.sum(log_sigmoid_jac(u[6:8]) + jnp.log(float(t_days)))
    )
    return vec, logjac


def to_unconstrained(params: ModelParams) -> np.ndarray:
    vec = params.as_vector()
    t_days = 7.0 * params.season_weeks

    def logit(p):
        return np.log(p) - np.log1p(-p)

    u = vec.copy()
    u[[0, 1, 5, 8]] = np.log(vec[[0, 1, 5, 8]])
    u[2:5] = logit(vec[2:5])
    u[6:8] = logit(vec[6:8] / t_days)
    return u


def from_unconstrained(u, season_weeks: int) -> ModelParams:
    vec, _ = _constrain_jnp(jnp.asarray(u, dtype=jnp.float64), 7 * season_weeks)
    return ModelParams.from_vector(np.asarray(vec))


# --- public operations ---

def _marginal_grid(density, n=JOINT_GRID_N):
    xs = np.linspace(density.lo, density.hi, n)
    return float(xs[0]), float(xs[1] - xs[0]), jnp.asarray(density.pdf(xs))


def _spec_args(spec: PosteriorSpec):
    if spec.hj_joint is not None:
        wk = _marginal_grid(spec.hj_joint.week_marginal)
        it = _marginal_grid(spec.hj_joint.intensity_marginal)
        grids = (*wk, *it)
    else:
        grids = (0.0, 1.0, jnp.zeros(2), 0.0, 1.0, jnp.zeros(2))
    temp = -1.0 if spec.peak_temperature is None else float(spec.peak_temperature)
    return (
        jnp.asarray(spec.obs.counts),
        float(spec.config.population),
        float(spec.config.seed_scale),
        float(spec.omega),
        temp,
        grids,
    )


def log_prior(theta: ModelParams) -> float:
    """Sum of log prior densities; -inf outside any parameter support."""
    vec = jnp.asarray(theta.as_vector())
    return float(_log_prior_jnp(vec, 7 * theta.season_weeks))


def log_likelihood(theta: ModelParams, obs: HospSeries, config: ModelConfig) -> float:
    """Poisson log likelihood of observed weekly counts under the latent path."""
    if len(obs) > config.season_weeks:
        raise ValueError("observations extend past the configured season")
    weekly = weekly_hosps_jnp(
        jnp.asarray(theta.as_vector()),
        config.population,
        config.seed_scale,
        config.season_weeks,
        config.lag,
    )
    return float(_poisson_loglik_jnp(weekly, jnp.asarray(obs.counts)))


def log_posterior(spec: PosteriorSpec, theta: ModelParams) -> float:
    """Unnormalized log posterior density of `theta` under `spec`."""
    fns = _compiled(
        spec.config.season_weeks, spec.config.lag, len(spec.obs), spec.kind == "chimeric"
    )
    return float(fns["log_post"](jnp.asarray(theta.as_vector()), *_spec_args(spec)))


@dataclass(frozen=True, eq=False)
class Potential:
    """Negative unconstrained-space log density with fixed data closed over;
    the callables are jit-compiled and shared across samplers."""

    dim: int
    names: list[str]
    season_weeks: int
    value: Callable = field(repr=False)
    value_and_grad: Callable = field(repr=False)
    value_batch: Callable = field(repr=False)

    def constrain(self, u) -> ModelParams:
        return from_unconstrained(u, self.season_weeks)


def build_potential(spec: PosteriorSpec) -> Potential:
    """Compile the sampling target for a fit specification."""
    fns = _compiled(
        spec.config.season_weeks, spec.config.lag, len(spec.obs), spec.kind == "chimeric"
    )
    args = _spec_args(spec)
    w = spec.config.season_weeks

    def value(u):
        return float(fns["potential"](jnp.asarray(u), *args))

    def value_and_grad(u):
        v, g = fns["potential_grad"](jnp.asarray(u), *args)
        return float(v), np.asarray(g)

    def value_batch(U):
        return np.asarray(fns["potential_batch"](jnp.asarray(U), *args))

    return Potential(
        dim=N_SCALARS + w,
        names=ModelParams.names(w),
        season_weeks=w,
        value=value,
        value_and_grad=value_and_grad,
        value_batch=value_batch,
    )
