"""Deterministic susceptible/infected/hospitalized dynamics on a daily grid.

Each day susceptibles shrink by an escape factor exp(-lambda(t) * sum_j
i_{t-j} a(j)), new infections flow through a hospitalization-lag distribution,
and daily hospitalizations are summed to weeks. lambda(t) is a Gaussian bump
(height R, centre mu, width sigma, in days) plus a weekly Gaussian random
walk, clamped at zero. Both lag distributions are truncated, renormalized
Poisson pmfs.

The kernel is written in JAX so the posterior can differentiate through it;
the public functions accept and return numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp
import numpy as np
from jax.scipy.special import gammaln

from .epiweek import EpiWeek
from .errors import AlignmentError
from .series import HospSeries, weekly_from_daily

DEFAULT_LAG = 14

_SCALAR_NAMES = (
    "beta_g",
    "beta_e",
    "mu_infections",
    "mu_hosps",
    "alpha",
    "R",
    "mu",
    "sigma",
    "s",
)
N_SCALARS = len(_SCALAR_NAMES)


@dataclass(frozen=True)
class ModelConfig:
    """Static run shape: population, season length, and seeding constants."""

    population: float
    season_weeks: int
    lag: int = DEFAULT_LAG
    seed_scale: float = 1.0

    def __post_init__(self):
        if self.population <= 0 or self.season_weeks <= 0 or self.lag < 1:
            raise ValueError("population, season_weeks and lag must be positive")
        if self.seed_scale <= 0:
            raise ValueError("seed_scale must be positive")
        if self.lag > self.t_days:
            raise ValueError("lag cannot exceed the simulated window")

    @property
    def t_days(self) -> int:
        return 7 * self.season_weeks


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Parameter vector of the transmission model.

    beta_g and beta_e are the serial-interval and infection-to-hospitalization
    lag means (days); mu_infections / mu_hosps set the decay of the seeded
    pre-observation history; alpha is the initially susceptible fraction; R,
    mu, sigma shape the transmissibility bump; s scales the weekly random-walk
    increments rw_increments (one per season week, standard-normal a priori).
    """

    beta_g: float
    beta_e: float
    mu_infections: float
    mu_hosps: float
    alpha: float
    R: float
    mu: float
    sigma: float
    s: float
    rw_increments: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.array(self.rw_increments, dtype=float)
        z.setflags(write=False)
        object.__setattr__(self, "rw_increments", z)

    @property
    def season_weeks(self) -> int:
        return self.rw_increments.size

    def as_vector(self) -> np.ndarray:
        head = [getattr(self, name) for name in _SCALAR_NAMES]
        return np.concatenate([np.asarray(head, dtype=float), self.rw_increments])

    @classmethod
    def from_vector(cls, vec) -> "ModelParams":
        vec = np.asarray(vec, dtype=float)
        scalars = {name: float(vec[i]) for i, name in enumerate(_SCALAR_NAMES)}
        return cls(rw_increments=vec[N_SCALARS:], **scalars)

    @staticmethod
    def names(season_weeks: int) -> list[str]:
        return list(_SCALAR_NAMES) + [f"z_{w + 1}" for w in range(season_weeks)]


@dataclass(frozen=True, eq=False)
class LatentTrajectory:
    """Daily latent paths: susceptibles, incident infections, incident hosps."""

    S: np.ndarray
    infections: np.ndarray
    hosps: np.ndarray

    def __post_init__(self):
        if not (self.S.shape == self.infections.shape == self.hosps.shape):
            raise ValueError("trajectory components must share a length")


# --- jnp building blocks, shared with the posterior ---

def lag_pmf_jnp(beta, lag: int):
    j = jnp.arange(lag, dtype=jnp.float64)
    logp = j * jnp.log(beta) - beta - gammaln(j + 1.0)
    p = jnp.exp(logp)
    return p / p.sum()


def lambda_path_jnp(R, mu, sigma, s, z, t_days: int):
    t = jnp.arange(t_days, dtype=jnp.float64)
    bump = jnp.exp(-0.5 * ((t - mu) / sigma) ** 2)
    eps = jnp.repeat(jnp.cumsum(s * z), 7)[:t_days]
    return jnp.maximum(0.0, R * bump + eps)


def latent_daily_jnp(vec, population, seed_scale, season_weeks: int, lag: int):
    """Daily (S, infections, hosps) from a packed parameter vector."""
    beta_g, beta_e, mu_i, mu_h, alpha, R, mu, sigma, s = vec[:N_SCALARS]
    z = vec[N_SCALARS:]
    t_days = 7 * season_weeks
    a = lag_pmf_jnp(beta_g, lag)
    q = lag_pmf_jnp(beta_e, lag)
    lam = lambda_path_jnp(R, mu, sigma, s, z, t_days)

    k = jnp.arange(1, lag + 1, dtype=jnp.float64)
    hist_i = seed_scale * jnp.exp(-mu_i * k)  # i at days -1 .. -lag
    hist_h = seed_scale * jnp.exp(-mu_h * k)
    s0 = jnp.maximum(0.0, population * alpha - (hist_i.sum() + hist_h.sum()))

    a_old_first = a[::-1]

    def step(carry, lam_t):
        s_prev, window = carry  # window holds i_{t-lag} .. i_{t-1}
        force = lam_t * jnp.dot(window, a_old_first)
        foi = jnp.exp(-force)
        s_new = foi * s_prev
        i_new = -jnp.expm1(-force) * s_prev  # 1 - exp(-force), stable for tiny force
        window = jnp.concatenate([window[1:], i_new[None]])
        return (s_new, window), (s_new, i_new)

    (_, _), (S, infections) = jax.lax.scan(step, (s0, hist_i[::-1]), lam)
    with_history = jnp.concatenate([hist_i[::-1], infections])
    hosps = jnp.convolve(with_history, q, mode="valid")[1:]
    return S, infections, hosps


def weekly_hosps_jnp(vec, population, seed_scale, season_weeks: int, lag: int):
    _, _, hosps = latent_daily_jnp(vec, population, seed_scale, season_weeks, lag)
    return hosps.reshape(season_weeks, 7).sum(axis=1)


def soft_peak_jnp(weekly_h, temperature):
    """Softmax-weighted (peak week, peak intensity); weeks are 1-based.

    A vanishing index penalty breaks exact ties toward the earliest week in
    the zero-temperature limit.
    """
    weekly_h = jnp.asarray(weekly_h, dtype=jnp.float64)
    idx = jnp.arange(1, weekly_h.size + 1, dtype=jnp.float64)
    tie = 1e-9 * (1.0 + jnp.max(jnp.abs(weekly_h)))
    w = jax.nn.softmax((weekly_h - tie * idx) / temperature)
    return jnp.dot(idx, w), jnp.dot(weekly_h, w)


@lru_cache(maxsize=None)
def _latent_jit(season_weeks: int, lag: int):
    return jax.jit(
        lambda vec, population, seed_scale: latent_daily_jnp(
            vec, population, seed_scale, season_weeks, lag
        )
    )


# --- numpy-facing operations ---

def lag_pmf(beta: float, lag: int) -> np.ndarray:
    """Truncated Poisson lag distribution: entry j (1-based) carries the
    Poisson mass at j - 1 with mean `beta`, renormalized over 1..lag."""
    if beta <= 0 or lag < 1:
        raise ValueError("beta must be positive and lag at least 1")
    return np.asarray(lag_pmf_jnp(float(beta), int(lag)))


def lambda_path(R, mu, sigma, s, rw_increments, t_days: int) -> np.ndarray:
    """Daily transmissibility: Gaussian bump plus weekly random walk, clamped
    at zero. The bump equals R at t = mu."""
    z = np.asarray(rw_increments, dtype=float)
    if 7 * z.size < t_days:
        raise ValueError("need one random-walk increment per simulated week")
    return np.asarray(lambda_path_jnp(R, mu, sigma, s, jnp.asarray(z), int(t_days)))


def simulate_latent(params: ModelParams, config: ModelConfig) -> LatentTrajectory:
    """Run the daily dynamics; deterministic in (params, config)."""
    if params.season_weeks != config.season_weeks:
        raise ValueError(
            f"params carry {params.season_weeks} weekly increments, "
            f"config expects {config.season_weeks}"
        )
    fn = _latent_jit(config.season_weeks, config.lag)
    S, infections, hosps = fn(
        jnp.asarray(params.as_vector()), config.population, config.seed_scale
    )
    return LatentTrajectory(np.asarray(S), np.asarray(infections), np.asarray(hosps))


def weekly_hosps(
    traj: LatentTrajectory, config: ModelConfig, start: EpiWeek | None = None
) -> list[tuple[EpiWeek, float]]:
    """Aggregate the daily hospitalization path into epiweek totals."""
    start = start if start is not None else EpiWeek(2023, 40)
    return weekly_from_daily(traj.hosps, start)


def soft_peak(weekly_h, temperature: float) -> tuple[float, float]:
    """Smooth surrogate for (argmax week, max value) of a weekly curve.

    As temperature -> 0 this approaches the hard peak with the earliest week
    winning ties; weeks are indexed from 1.
    """
    weekly_h = np.asarray(weekly_h, dtype=float)
    if weekly_h.size == 0 or temperature <= 0:
        raise ValueError("need a non-empty vector and positive temperature")
    tau, rho = soft_peak_jnp(jnp.asarray(weekly_h), float(temperature))
    return float(tau), float(rho)


def simulate_observed(
    weekly_h, seed: int, location: str = "SYN", start: EpiWeek | None = None
) -> HospSeries:
    """Draw independent Poisson observations around a weekly latent path."""
    weekly_h = np.asarray(weekly_h, dtype=float)
    if np.any(weekly_h < 0):
        raise ValueError("weekly hospitalization means must be non-negative")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(weekly_h)
    start = start if start is not None else EpiWeek(2023, 40)
    return HospSeries(location, start, counts.astype(float))
