import numpy as np
import pytest
import scipy.stats

from chimera.errors import InitializationError
from chimera.nuts import (
    NutsResult,
    SamplerConfig,
    effective_sample_size,
    sample_nuts,
    split_rhat,
)


def std_normal_target(dim):
    def value_and_grad(q):
        return 0.5 * float(q @ q), q.copy()

    return value_and_grad


def test_recovers_standard_normal():
    dim = 5
    cfg = SamplerConfig(chains=4, warmup=1000, draws=1000, seed=0)
    res = sample_nuts(std_normal_target(dim), np.zeros((1, dim)), cfg)
    flat = res.draws.reshape(-1, dim)
    assert np.all(np.abs(flat.mean(axis=0)) < 0.05)
    assert np.all(np.abs(flat.var(axis=0) - 1.0) < 0.1)
    assert np.all(split_rhat(res.draws) < 1.05)
    assert np.all(effective_sample_size(res.draws) > 400)
    assert res.divergences == 0


def test_same_seed_reproduces_draws():
    cfg = SamplerConfig(chains=2, warmup=200, draws=200, seed=42)
    a = sample_nuts(std_normal_target(3), np.zeros((1, 3)), cfg)
    b = sample_nuts(std_normal_target(3), np.zeros((1, 3)), cfg)
    assert np.array_equal(a.draws, b.draws)
    c = sample_nuts(std_normal_target(3), np.zeros((1, 3)), SamplerConfig(chains=2, warmup=200, draws=200, seed=43))
    assert not np.array_equal(a.draws, c.draws)


def test_init_outside_support_raises():
    def value_and_grad(q):
        if q[0] <= 0:
            return np.inf, np.zeros_like(q)
        return float(q[0]), np.ones_like(q)

    with pytest.raises(InitializationError):
        sample_nuts(value_and_grad, np.array([[-1.0]]), SamplerConfig(chains=1, warmup=10, draws=10))


def test_poisson_gamma_conjugate_posterior():
    rng = np.random.default_rng(5)
    y = rng.poisson(4.0, size=30).astype(float)
    a, b = 2.0, 1.0
    post = scipy.stats.gamma(a + y.sum(), scale=1.0 / (b + y.size))

    sum_y, n = y.sum(), y.size

    def value_and_grad(u):
        # rate lam = exp(u); potential = -(log posterior + log jacobian)
        lam = np.exp(u[0])
        logp = (a + sum_y) * u[0] - (b + n) * lam  # includes the jacobian term
        grad = -np.array([(a + sum_y) - (b + n) * lam])
        return -logp, grad

    cfg = SamplerConfig(chains=4, warmup=500, draws=1000, seed=7)
    res = sample_nuts(value_and_grad, np.zeros((1, 1)), cfg)
    lam_draws = np.exp(res.draws.reshape(-1))
    assert abs(lam_draws.mean() - post.mean()) / post.mean() < 0.02
    assert abs(lam_draws.std() - post.std()) / post.std() < 0.15


def test_correlated_gaussian_target():
    cov = np.array([[2.0, 1.2], [1.2, 1.0]])
    prec = np.linalg.inv(cov)

    def value_and_grad(q):
        return 0.5 * float(q @ prec @ q), prec @ q

    cfg = SamplerConfig(chains=4, warmup=800, draws=800, seed=9)
    res = sample_nuts(value_and_grad, np.zeros((1, 2)), cfg)
    flat = res.draws.reshape(-1, 2)
    assert np.allclose(flat.mean(axis=0), 0.0, atol=0.1)
    assert np.allclose(np.cov(flat.T), cov, atol=0.25)
    assert np.all(split_rhat(res.draws) < 1.05)


def test_diagnostics_on_iid_draws():
    rng = np.random.default_rng(1)
    fake = rng.standard_normal((4, 500, 3))
    assert np.all(split_rhat(fake) < 1.02)
    ess = effective_sample_size(fake)
    assert np.all(ess > 1200)  # near the nominal 2000 for iid input


def test_rhat_detects_disagreeing_chains():
    rng = np.random.default_rng(2)
    fake = rng.standard_normal((4, 500, 1))
    fake[0] += 3.0
    assert split_rhat(fake)[0] > 1.5
