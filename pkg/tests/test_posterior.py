import numpy as np
import pytest
import scipy.stats

from chimera.densities import QuantileForecast, cdf_from_quantiles, joint_independence, pdf_from_cdf, uniform_density
from chimera.dynamics import ModelConfig, ModelParams, simulate_latent
from chimera.epiweek import EpiWeek
from chimera.posterior import (
    PosteriorSpec,
    build_potential,
    from_unconstrained,
    log_likelihood,
    log_posterior,
    log_prior,
    to_unconstrained,
    _poisson_loglik_jnp,
)
from chimera.series import HospSeries, weekly_from_daily

W = 6
CONFIG = ModelConfig(population=10_000, season_weeks=W, lag=10)
START = EpiWeek(2023, 40)


def make_params(rng=None, **overrides):
    rng = rng or np.random.default_rng(0)
    base = dict(
        beta_g=rng.uniform(1, 5),
        beta_e=rng.uniform(1, 6),
        mu_infections=rng.uniform(0.2, 0.8),
        mu_hosps=rng.uniform(0.2, 0.8),
        alpha=rng.uniform(0.2, 0.6),
        R=rng.uniform(1e-4, 1e-3),
        mu=rng.uniform(5, 7 * W - 5),
        sigma=rng.uniform(5, 20),
        s=rng.uniform(0.01, 0.3),
        rw_increments=rng.normal(0, 0.3, size=W),
    )
    base.update(overrides)
    return ModelParams(**base)


def make_obs(rng):
    return HospSeries("PA", START, rng.integers(0, 80, size=W).astype(float))


def prior_oracle(p):
    """Independent evaluation with scipy distributions."""
    t_days = 7 * p.season_weeks
    parts = [
        scipy.stats.gamma(1, scale=1).logpdf(p.beta_g),
        scipy.stats.gamma(1, scale=1).logpdf(p.beta_e),
        scipy.stats.gamma(1, scale=1).logpdf(p.R),
        scipy.stats.beta(0.5, 0.5).logpdf(p.mu_infections),
        scipy.stats.beta(0.5, 0.5).logpdf(p.mu_hosps),
        scipy.stats.beta(0.5, 0.5).logpdf(p.alpha),
        scipy.stats.uniform(0, t_days).logpdf(p.mu),
        scipy.stats.uniform(0, t_days).logpdf(p.sigma),
        scipy.stats.halfcauchy(scale=1).logpdf(p.s),
    ]
    parts += list(scipy.stats.norm(0, 1).logpdf(p.rw_increments))
    return float(sum(parts))


def test_log_prior_matches_scipy_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = make_params(rng)
        assert log_prior(p) == pytest.approx(prior_oracle(p), abs=1e-9)


def test_log_prior_component_values():
    # Gamma(1,1) at x=2 contributes -2; Beta(.5,.5) at 0.5 contributes log(2/pi)
    p0 = make_params(np.random.default_rng(2))
    p_shift = ModelParams(**{**p0.__dict__, "beta_g": 2.0}, )
    p_base = ModelParams(**{**p0.__dict__, "beta_g": 1.0})
    assert log_prior(p_shift) - log_prior(p_base) == pytest.approx(-1.0, abs=1e-12)
    q_half = ModelParams(**{**p0.__dict__, "alpha": 0.5})
    q_qtr = ModelParams(**{**p0.__dict__, "alpha": 0.25})
    expected = scipy.stats.beta(0.5, 0.5).logpdf(0.5) - scipy.stats.beta(0.5, 0.5).logpdf(0.25)
    assert log_prior(q_half) - log_prior(q_qtr) == pytest.approx(expected, abs=1e-12)
    assert scipy.stats.beta(0.5, 0.5).logpdf(0.5) == pytest.approx(np.log(2 / np.pi))


def test_log_prior_outside_support():
    p = make_params(np.random.default_rng(3))
    assert log_prior(ModelParams(**{**p.__dict__, "alpha": 1.2})) == -np.inf
    assert log_prior(ModelParams(**{**p.__dict__, "beta_g": -0.5})) == -np.inf
    assert log_prior(ModelParams(**{**p.__dict__, "mu": 7 * W + 1.0})) == -np.inf


def test_poisson_kernel_hand_values():
    assert float(_poisson_loglik_jnp(np.array([1.0]), np.array([0.0]))) == pytest.approx(-1.0)
    expected = 2 * np.log(2) - 2 - np.log(2)
    assert float(_poisson_loglik_jnp(np.array([2.0]), np.array([2.0]))) == pytest.approx(
        expected, abs=1e-12
    )


def test_poisson_kernel_matches_scipy_on_random_pairs():
    rng = np.random.default_rng(4)
    o = rng.integers(0, 200, size=100).astype(float)
    h = rng.uniform(0.1, 200, size=100)
    mine = float(_poisson_loglik_jnp(h, o))
    oracle = scipy.stats.poisson(h).logpmf(o).sum()
    assert mine == pytest.approx(oracle, abs=1e-10)


def test_log_likelihood_matches_external_composition():
    rng = np.random.default_rng(5)
    p = make_params(rng)
    obs = make_obs(rng)
    traj = simulate_latent(p, CONFIG)
    weekly = np.array([v for _, v in weekly_from_daily(traj.hosps, START)])
    oracle = scipy.stats.poisson(np.maximum(weekly, 1e-10)).logpmf(obs.counts).sum()
    assert log_likelihood(p, obs, CONFIG) == pytest.approx(oracle, abs=1e-8)


def test_control_posterior_is_prior_plus_likelihood():
    rng = np.random.default_rng(6)
    obs = make_obs(rng)
    spec = PosteriorSpec(kind="control", obs=obs, config=CONFIG)
    for _ in range(50):
        p = make_params(rng)
        lp = log_posterior(spec, p)
        assert lp == pytest.approx(log_prior(p) + log_likelihood(p, obs, CONFIG), rel=1e-12)


def flat_joint(week_hi, intensity_hi):
    return joint_independence(
        uniform_density(0.0, week_hi), uniform_density(0.0, intensity_hi)
    )


def test_flat_human_judgment_shifts_posterior_by_constant():
    rng = np.random.default_rng(7)
    obs = make_obs(rng)
    joint = flat_joint(week_hi=W + 1.0, intensity_hi=1e7)
    control = PosteriorSpec(kind="control", obs=obs, config=CONFIG)
    chimeric = PosteriorSpec(kind="chimeric", obs=obs, config=CONFIG, hj_joint=joint)
    expected_const = 1.0 + np.log(1.0 / (W + 1.0)) + np.log(1.0 / 1e7)
    for _ in range(50):
        p = make_params(rng)
        diff = log_posterior(chimeric, p) - log_posterior(control, p)
        assert diff == pytest.approx(expected_const, abs=1e-9)


def test_distant_point_mass_joint_kills_density():
    rng = np.random.default_rng(8)
    obs = make_obs(rng)
    narrow = pdf_from_cdf(
        cdf_from_quantiles(QuantileForecast([0.4, 0.6], [1e6, 1e6 + 1.0]))
    )
    week = pdf_from_cdf(cdf_from_quantiles(QuantileForecast([0.4, 0.6], [2.0, 3.0])))
    spec = PosteriorSpec(
        kind="chimeric", obs=obs, config=CONFIG, hj_joint=joint_independence(week, narrow)
    )
    assert log_posterior(spec, make_params(rng)) == -np.inf


def test_spec_validation():
    rng = np.random.default_rng(9)
    obs = make_obs(rng)
    with pytest.raises(ValueError):
        PosteriorSpec(kind="chimeric", obs=obs, config=CONFIG)
    with pytest.raises(ValueError):
        PosteriorSpec(kind="control", obs=obs, config=CONFIG, hj_joint=flat_joint(9.0, 10.0))
    with pytest.raises(ValueError):
        PosteriorSpec(kind="nope", obs=obs, config=CONFIG)


def test_unconstrained_roundtrip():
    rng = np.random.default_rng(10)
    p = make_params(rng)
    back = from_unconstrained(to_unconstrained(p), W)
    assert np.allclose(back.as_vector(), p.as_vector(), rtol=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    obs = make_obs(rng)
    spec = PosteriorSpec(kind="control", obs=obs, config=CONFIG)
    pot = build_potential(spec)
    step = 1e-5
    for _ in range(20):
        p = make_params(rng, s=rng.uniform(0.002, 0.01), rw_increments=rng.normal(0, 0.1, W))
        u = to_unconstrained(p)
        _, grad = pot.value_and_grad(u)
        fd = np.empty_like(grad)
        for k in range(u.size):
            up, dn = u.copy(), u.copy()
            up[k] += step
            dn[k] -= step
            fd[k] = (pot.value(up) - pot.value(dn)) / (2 * step)
        scale = np.maximum(np.abs(grad), np.abs(fd))
        rel = np.abs(grad - fd) / np.maximum(scale, 1e-3)
        assert rel.max() < 1e-4


def test_potential_batch_agrees_with_scalar():
    rng = np.random.default_rng(12)
    obs = make_obs(rng)
    pot = build_potential(PosteriorSpec(kind="control", obs=obs, config=CONFIG))
    U = np.stack([to_unconstrained(make_params(rng)) for _ in range(8)])
    batch = pot.value_batch(U)
    singles = np.array([pot.value(u) for u in U])
    assert np.allclose(batch, singles, rtol=1e-12)
