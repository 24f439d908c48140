"""No-U-Turn sampler over a differentiable negative log density.

Multinomial trajectory sampling with biased progressive doubling, dual
averaging of the step size toward a target acceptance rate, and windowed
diagonal mass-matrix adaptation during warmup. The sampler only needs a
`value_and_grad` callable, so any target (JAX-compiled or plain numpy)
can be plugged in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InitializationError

MAX_ENERGY_CHANGE = 1000.0  # energy error treated as a divergence


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    warmup: int = 1000
    draws: int = 1000
    seed: int = 0
    target_accept: float = 0.8
    max_depth: int = 10

    def __post_init__(self):
        if min(self.chains, self.warmup, self.draws, self.max_depth) < 1:
            raise ValueError("chains, warmup, draws and max_depth must be positive")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must lie in (0, 1)")


@dataclass(eq=False)
class NutsResult:
    draws: np.ndarray  # (chains, draws, dim), unconstrained
    accept_rate: float
    divergences: int
    divergence_rate: float
    step_sizes: np.ndarray
    flags: list[str] = field(default_factory=list)


class _Tree:
    __slots__ = (
        "q_minus", "p_minus", "g_minus", "q_plus", "p_plus", "g_plus",
        "proposal", "proposal_u", "log_weight", "sum_accept", "n_steps",
        "divergent", "turning",
    )

    def __init__(self, q, p, g, u, log_weight, accept, divergent):
        self.q_minus = self.q_plus = q
        self.p_minus = self.p_plus = p
        self.g_minus = self.g_plus = g
        self.proposal = q
        self.proposal_u = u
        self.log_weight = log_weight
        self.sum_accept = accept
        self.n_steps = 1
        self.divergent = divergent
        self.turning = False


def _leapfrog(value_and_grad, q, p, grad, eps, inv_mass):
    p_half = p - 0.5 * eps * grad
    q_new = q + eps * inv_mass * p_half
    u_new, grad_new = value_and_grad(q_new)
    p_new = p_half - 0.5 * eps * grad_new
    return q_new, p_new, grad_new, u_new


def _is_turning(q_minus, p_minus, q_plus, p_plus, inv_mass):
    dq = q_plus - q_minus
    return (dq @ (inv_mass * p_minus) < 0) or (dq @ (inv_mass * p_plus) < 0)


def _kinetic(p, inv_mass):
    return 0.5 * float(p @ (inv_mass * p))


class _ChainState:
    """One chain's position plus the warmup adaptation machinery."""

    def __init__(self, value_and_grad, q0, config, rng):
        self.f = value_and_grad
        self.rng = rng
        self.config = config
        self.q = np.array(q0, dtype=float)
        self.u, self.grad = value_and_grad(self.q)
        if not np.isfinite(self.u):
            raise InitializationError("initial point has non-finite log density")
        self.inv_mass = np.ones_like(self.q)
        self.eps = self._initial_step_size()
        # dual averaging state
        self.mu = math.log(10.0 * self.eps)
        self.log_eps_bar = 0.0
        self.h_bar = 0.0
        self.da_count = 0

    def _initial_step_size(self):
        eps = 1.0
        p = self.rng.standard_normal(self.q.size)
        h0 = self.u + _kinetic(p, self.inv_mass)
        _, p1, _, u1 = _leapfrog(self.f, self.q, p, self.grad, eps, self.inv_mass)
        h1 = u1 + _kinetic(p1, self.inv_mass) if np.isfinite(u1) else np.inf
        direction = 1.0 if (h0 - h1) > math.log(0.5) else -1.0
        for _ in range(100):
            eps_try = eps * 2.0**direction
            _, p1, _, u1 = _leapfrog(self.f, self.q, p, self.grad, eps_try, self.inv_mass)
            h1 = u1 + _kinetic(p1, self.inv_mass) if np.isfinite(u1) else np.inf
            if direction * (h0 - h1) < direction * math.log(0.5):
                break
            eps = eps_try
        return eps

    def _build_tree(self, q, p, grad, depth, direction, eps, h0):
        if depth == 0:
            q1, p1, g1, u1 = _leapfrog(self.f, q, p, grad, direction * eps, self.inv_mass)
            if np.isfinite(u1):
                energy_error = (u1 + _kinetic(p1, self.inv_mass)) - h0
            else:
                energy_error = np.inf
            divergent = energy_error > MAX_ENERGY_CHANGE
            accept = math.exp(-energy_error) if energy_error > 0 else 1.0
            log_weight = -energy_error if np.isfinite(energy_error) else -np.inf
            return _Tree(q1, p1, g1, u1, log_weight, min(accept, 1.0), divergent)

        first = self._build_tree(q, p, grad, depth - 1, direction, eps, h0)
        if first.divergent or first.turning:
            return first
        if direction == 1:
            tip_q, tip_p, tip_g = first.q_plus, first.p_plus, first.g_plus
        else:
            tip_q, tip_p, tip_g = first.q_minus, first.p_minus, first.g_minus
        second = self._build_tree(tip_q, tip_p, tip_g, depth - 1, direction, eps, h0)

        total = np.logaddexp(first.log_weight, second.log_weight)
        if np.isfinite(second.log_weight) and math.log(self.rng.random() + 1e-300) < (
            second.log_weight - total
        ):
            first.proposal = second.proposal
            first.proposal_u = second.proposal_u
        first.log_weight = total
        first.sum_accept += second.sum_accept
        first.n_steps += second.n_steps
        first.divergent = second.divergent
        if direction == 1:
            first.q_plus, first.p_plus, first.g_plus = second.q_plus, second.p_plus, second.g_plus
        else:
            first.q_minus, first.p_minus, first.g_minus = (
                second.q_minus, second.p_minus, second.g_minus,
            )
        first.turning = second.turning or _is_turning(
            first.q_minus, first.p_minus, first.q_plus, first.p_plus, self.inv_mass
        )
        return first

    def step(self):
        """One NUTS transition; returns (divergent, accept_mean)."""
        p0 = self.rng.standard_normal(self.q.size) / np.sqrt(self.inv_mass)
        h0 = self.u + _kinetic(p0, self.inv_mass)
        tree = _Tree(self.q, p0, self.grad, self.u, 0.0, 0.0, False)
        tree.n_steps = 0  # the seed point is not a leapfrog step
        divergent = False
        for depth in range(self.config.max_depth):
            direction = 1 if self.rng.random() < 0.5 else -1
            if direction == 1:
                sub = self._build_tree(
                    tree.q_plus, tree.p_plus, tree.g_plus, depth, 1, self.eps, h0
                )
            else:
                sub = self._build_tree(
                    tree.q_minus, tree.p_minus, tree.g_minus, depth, -1, self.eps, h0
                )
            tree.sum_accept += sub.sum_accept
            tree.n_steps += sub.n_steps
            if sub.divergent or sub.turning:
                divergent = sub.divergent
                break
            # biased progressive sampling favours the newer half
            if math.log(self.rng.random() + 1e-300) < sub.log_weight - tree.log_weight:
                tree.proposal = sub.proposal
                tree.proposal_u = sub.proposal_u
            tree.log_weight = np.logaddexp(tree.log_weight, sub.log_weight)
            if direction == 1:
                tree.q_plus, tree.p_plus, tree.g_plus = sub.q_plus, sub.p_plus, sub.g_plus
            else:
                tree.q_minus, tree.p_minus, tree.g_minus = sub.q_minus, sub.p_minus, sub.g_minus
            if _is_turning(tree.q_minus, tree.p_minus, tree.q_plus, tree.p_plus, self.inv_mass):
                break

        if not np.array_equal(tree.proposal, self.q):
            self.q = tree.proposal
            self.u = tree.proposal_u
            _, self.grad = self.f(self.q)
        return divergent, tree.sum_accept / max(tree.n_steps, 1)

    def adapt_step_size(self, accept_mean):
        self.da_count += 1
        m = self.da_count
        t0, gamma, kappa = 10.0, 0.05, 0.75
        frac = 1.0 / (m + t0)
        self.h_bar = (1 - frac) * self.h_bar + frac * (self.config.target_accept - accept_mean)
        log_eps = self.mu - math.sqrt(m) / gamma * self.h_bar
        eta = m**-kappa
        self.log_eps_bar = eta * log_eps + (1 - eta) * self.log_eps_bar
        self.eps = math.exp(log_eps)

    def freeze_step_size(self):
        self.eps = math.exp(self.log_eps_bar)

    def restart_step_size_adaptation(self):
        self.mu = math.log(10.0 * self.eps)
        self.h_bar = 0.0
        self.log_eps_bar = math.log(self.eps)
        self.da_count = 0

    def update_mass(self, variance, n):
        # light regularization toward unit scale, as in windowed adaptation
        self.inv_mass = (n / (n + 5.0)) * variance + 1e-3 * (5.0 / (n + 5.0))


def _mass_windows(warmup):
    """(start, end) slow windows for variance estimation."""
    if warmup < 150:
        third = warmup // 3
        return [(third, max(third + 1, 2 * third))]
    start, term = 75, 50
    windows = []
    size = 25
    pos = start
    while pos + size < warmup - term:
        nxt = pos + size
        if nxt + 2 * size >= warmup - term:
            nxt = warmup - term  # extend the final window to the buffer edge
        windows.append((pos, nxt))
        pos = nxt
        size *= 2
    return windows or [(start, warmup - term)]


def sample_nuts(value_and_grad, init, config: SamplerConfig) -> NutsResult:
    """Run `config.chains` independent chains from `init`; returns draws in
    the unconstrained space with adaptation info. Deterministic per seed."""
    init = np.atleast_2d(np.asarray(init, dtype=float))
    dim = init.shape[1]
    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)
    all_draws = np.empty((config.chains, config.draws, dim))
    step_sizes = np.empty(config.chains)
    divergences = 0
    accept_accum = []

    for c in range(config.chains):
        rng = np.random.default_rng(seeds[c])
        q0 = init[c % init.shape[0]]
        state = _ChainState(value_and_grad, q0, config, rng)
        windows = _mass_windows(config.warmup)
        welford_n, welford_mean, welford_m2 = 0, np.zeros(dim), np.zeros(dim)
        w_idx = 0

        for m in range(config.warmup):
            _, accept_mean = state.step()
            state.adapt_step_size(accept_mean)
            if w_idx < len(windows):
                lo, hi = windows[w_idx]
                if lo <= m < hi:
                    welford_n += 1
                    delta = state.q - welford_mean
                    welford_mean += delta / welford_n
                    welford_m2 += delta * (state.q - welford_mean)
                if m == hi - 1:
                    if welford_n > 1:
                        state.update_mass(welford_m2 / (welford_n - 1), welford_n)
                        state.restart_step_size_adaptation()
                    welford_n, welford_mean, welford_m2 = 0, np.zeros(dim), np.zeros(dim)
                    w_idx += 1
        state.freeze_step_size()

        for m in range(config.draws):
            divergent, accept_mean = state.step()
            divergences += int(divergent)
            accept_accum.append(accept_mean)
            all_draws[c, m] = state.q
        step_sizes[c] = state.eps

    total_kept = config.chains * config.draws
    divergence_rate = divergences / total_kept
    flags = []
    if divergence_rate > 0.10:
        flags.append(f"divergence rate {divergence_rate:.1%} exceeds 10%")
    return NutsResult(
        draws=all_draws,
        accept_rate=float(np.mean(accept_accum)),
        divergences=divergences,
        divergence_rate=divergence_rate,
        step_sizes=step_sizes,
        flags=flags,
    )


# --- convergence diagnostics ---

def split_rhat(draws: np.ndarray) -> np.ndarray:
    """Split-chain potential scale reduction factor per parameter.

    `draws` has shape (chains, n, dim); each chain is split in half so
    within-chain trends inflate the statistic.
    """
    chains, n, dim = draws.shape
    half = n // 2
    seq = draws[:, : 2 * half].reshape(chains * 2, half, dim)
    means = seq.mean(axis=1)
    variances = seq.var(axis=1, ddof=1)
    w = variances.mean(axis=0)
    b = half * means.var(axis=0, ddof=1)
    var_plus = (half - 1) / half * w + b / half
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt(var_plus / w)
    return np.where(w > 0, out, 1.0)


def effective_sample_size(draws: np.ndarray) -> np.ndarray:
    """Bulk effective sample size per parameter (Geyer initial monotone
    sequence over chain-averaged autocorrelations)."""
    chains, n, dim = draws.shape
    out = np.empty(dim)
    for k in range(dim):
        x = draws[:, :, k]
        chain_var = x.var(axis=1, ddof=1)
        w = chain_var.mean()
        b = x.mean(axis=1).var(ddof=1) * n if chains > 1 else 0.0
        var_plus = (n - 1) / n * w + b / n
        if var_plus <= 0:
            out[k] = float(chains * n)
            continue
        acov = np.zeros(n)
        for c in range(chains):
            xc = x[c] - x[c].mean()
            f = np.fft.rfft(xc, 2 * n)
            acf = np.fft.irfft(f * np.conjugate(f))[:n] / n
            acov += acf
        acov /= chains
        rho = 1.0 - (w - acov) / var_plus
        # Geyer: sum consecutive pairs while they stay positive and decreasing
        tau = 1.0
        prev_pair = np.inf
        t = 1
        while t + 1 < n:
            pair = rho[t] + rho[t + 1]
            if pair < 0:
                break
            pair = min(pair, prev_pair)
            tau += 2.0 * pair
            prev_pair = pair
            t += 2
        out[k] = chains * n / tau
    return out
