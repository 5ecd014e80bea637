import numpy as np
import pytest
from scipy.optimize import brentq
from hypothesis import given, settings, strategies as st

from oracles import commuting_sandwiched, gamma_grid, kl
from udisc import divergences as dv
from udisc.instances import random_channel, random_state
from udisc.linalg import DomainError

LN2 = np.log(2)
ZERO = np.diag([1.0, 0.0])
HALF = np.eye(2) / 2
ONE = np.diag([0.0, 1.0])
PLUS = np.full((2, 2), 0.5)
seeds = st.integers(0, 2**31 - 1)


def pair(seed, d=2):
    rng = np.random.default_rng(seed)
    return random_state(d, seed=rng), random_state(d, seed=rng)


# -- hypothesis testing ---------------------------------------------------------


def test_gamma_self_and_orthogonal():
    rho = random_state(3, seed=1)
    assert abs(dv.gamma_eps(rho, rho, 0.3) - 0.3) < 1e-7
    assert dv.gamma_eps(ZERO, ONE, 0.1) == pytest.approx(1.0, abs=1e-9)
    assert dv.hypothesis_testing_divergence(ZERO, ONE, 0.1) == np.inf
    assert abs(dv.hypothesis_testing_divergence(rho, rho, 0.3) + np.log(0.7)) < 1e-6


@pytest.mark.parametrize("p, q, eps", [([1, 0], [0.5, 0.5], 0.1), ([0.7, 0.3], [0.2, 0.8], 0.25)])
def test_gamma_matches_diagonal_grid(p, q, eps):
    got = dv.gamma_eps(np.diag(p), np.diag(q), eps)
    assert abs(got - gamma_grid(p, q, eps)) < 1e-4


@settings(max_examples=10, deadline=None)
@given(seeds, st.sampled_from([0.1, 0.4]))
def test_gamma_is_one_minus_beta(seed, eps):
    rho, sigma = pair(seed)
    assert abs(dv.gamma_eps(rho, sigma, eps) - (1 - dv.beta_eps(rho, sigma, eps))) < 1e-6


def test_optimal_test_is_a_test():
    rho, sigma = pair(4, 3)
    g, q = dv.optimal_test(rho, sigma, 0.2)
    lam = np.linalg.eigvalsh(q)
    assert lam[0] > -1e-7 and lam[-1] < 1 + 1e-7
    assert np.trace(q @ rho).real <= 0.2 + 1e-7
    assert abs(np.trace(q @ sigma).real - g) < 1e-6


# -- closed forms --------------------------------------------------------------


def test_commuting_values_are_ln2():
    assert abs(dv.sandwiched_renyi(ZERO, HALF, 2) - LN2) < 1e-12
    assert abs(dv.geometric_renyi(ZERO, HALF, 2) - LN2) < 1e-12
    assert abs(dv.umegaki(ZERO, HALF) - LN2) < 1e-12
    assert abs(dv.belavkin_staszewski(ZERO, HALF) - LN2) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.05, 1), min_size=3, max_size=3), st.lists(st.floats(0.05, 1), min_size=3, max_size=3),
       st.sampled_from([1.25, 1.5, 2.0]))
def test_commuting_reduces_to_classical(p, q, alpha):
    p, q = np.array(p) / sum(p), np.array(q) / sum(q)
    ref = commuting_sandwiched(p, q, alpha)
    assert abs(dv.sandwiched_renyi(np.diag(p), np.diag(q), alpha) - ref) < 1e-10
    assert abs(dv.geometric_renyi(np.diag(p), np.diag(q), alpha) - ref) < 1e-10
    assert abs(dv.umegaki(np.diag(p), np.diag(q)) - kl(p, q)) < 1e-10
    assert abs(dv.belavkin_staszewski(np.diag(p), np.diag(q)) - kl(p, q)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_self_divergence_is_zero(seed):
    rho = random_state(3, rank=2, seed=seed)
    for kind in dv.DIVERGENCES:
        assert abs(dv.divergence(kind, rho, rho, 1.5)) < 1e-9


def test_support_violation_is_infinite():
    for kind in dv.DIVERGENCES:
        assert dv.divergence(kind, PLUS, ZERO, 2.0) == np.inf


def test_alpha_ranges():
    with pytest.raises(DomainError):
        dv.geometric_renyi(ZERO, HALF, 2.5)
    with pytest.raises(DomainError):
        dv.sandwiched_renyi(ZERO, HALF, 1.0)


def test_sandwiched_accepts_hermitian_first_argument():
    beta = np.array([[1.2, 0.1], [0.1, -0.2]])
    val = dv.sandwiched_renyi(beta, HALF, 2)
    lam = np.linalg.eigvalsh(beta)
    assert abs(val - np.log(np.sum((2 * lam) ** 2) / 2)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([1.25, 1.5, 2.0]))
def test_ordering(seed, alpha):
    rho, sigma = pair(seed, 3)
    d = dv.umegaki(rho, sigma)
    s = dv.sandwiched_renyi(rho, sigma, alpha)
    g = dv.geometric_renyi(rho, sigma, alpha)
    assert d <= s + 1e-8 and s <= g + 1e-8
    assert d <= dv.belavkin_staszewski(rho, sigma) + 1e-8


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_data_processing(seed):
    rho, sigma = pair(seed)
    ch = random_channel(2, 3, rank=2, seed=seed + 1)
    for kind in dv.DIVERGENCES:
        assert dv.divergence(kind, ch(rho), ch(sigma), 1.5) <= dv.divergence(kind, rho, sigma, 1.5) + 1e-8


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_monotone_in_alpha(seed):
    rho, sigma = pair(seed, 3)
    s = [dv.sandwiched_renyi(rho, sigma, a) for a in (1.1, 1.5, 2, 4)]
    g = [dv.geometric_renyi(rho, sigma, a) for a in (1.25, 1.5, 2)]
    assert all(b >= a - 1e-8 for a, b in zip(s, s[1:]))
    assert all(b >= a - 1e-8 for a, b in zip(g, g[1:]))


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([1.5, 2.0]))
def test_geometric_additive(seed, alpha):
    r1, s1 = pair(seed)
    r2, s2 = pair(seed + 7)
    lhs = dv.geometric_renyi(np.kron(r1, r2), np.kron(s1, s2), alpha)
    assert abs(lhs - dv.geometric_renyi(r1, s1, alpha) - dv.geometric_renyi(r2, s2, alpha)) < 1e-8


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([1.5, 2.0]))
def test_geometric_direct_sum(seed, alpha):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
    pairs = [pair(seed + i) for i in range(2)]
    big_r = np.zeros((4, 4), complex)
    big_s = np.zeros((4, 4), complex)
    for x, (r, s) in enumerate(pairs):
        big_r[2 * x : 2 * x + 2, 2 * x : 2 * x + 2] = p[x] * r
        big_s[2 * x : 2 * x + 2, 2 * x : 2 * x + 2] = q[x] * s
    quasi = lambda r, s: np.exp((alpha - 1) * dv.geometric_renyi(r, s, alpha))
    rhs = sum(p[x] ** alpha * q[x] ** (1 - alpha) * quasi(r, s) for x, (r, s) in enumerate(pairs))
    assert abs(quasi(big_r, big_s) - rhs) < 1e-8 * max(1, rhs)


@settings(max_examples=8, deadline=None)
@given(seeds, st.sampled_from([1.5, 2.0]), st.sampled_from([0.1, 0.5]))
def test_hypothesis_testing_below_sandwiched(seed, alpha, eps):
    rho, sigma = pair(seed)
    lhs = dv.hypothesis_testing_divergence(rho, sigma, eps)
    assert lhs <= dv.sandwiched_renyi(rho, sigma, alpha) - alpha / (alpha - 1) * np.log(1 - eps) + 1e-8


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_joint_quasi_convexity(seed):
    rng = np.random.default_rng(seed)
    rs = [random_state(2, seed=rng) for _ in range(3)]
    ss = [random_state(2, seed=rng) for _ in range(3)]
    w = rng.dirichlet(np.ones(3))
    lhs = dv.sandwiched_renyi(sum(a * r for a, r in zip(w, rs)), sum(a * s for a, s in zip(w, ss)), 2)
    assert lhs <= max(dv.sandwiched_renyi(r, s, 2) for r, s in zip(rs, ss)) + 1e-8


# -- cascade SDP ---------------------------------------------------------------------


@pytest.mark.parametrize("l", [0, 1, 2])
def test_cascade_matches_closed_form(l):
    alpha = 1 + 2.0**-l
    for seed in range(3):
        rho, sigma = pair(seed + 20, 3)
        assert abs(dv.geometric_renyi_sdp(rho, sigma, l) - dv.geometric_renyi(rho, sigma, alpha)) < 1e-5
    assert abs(dv.geometric_renyi_sdp(ZERO, HALF, l) - commuting_sandwiched([1, 0], [0.5, 0.5], alpha)) < 1e-6
    rho = random_state(2, seed=2)
    assert abs(dv.geometric_renyi_sdp(rho, rho, l)) < 1e-6


def test_cascade_level():
    assert dv.cascade_level(1.5) == 1
    assert dv.cascade_level(1.125) == 3
    with pytest.raises(DomainError):
        dv.cascade_level(1.3)


# -- gradients and radius ------------------------------------------------------------


@pytest.mark.parametrize("kind", ["sandwiched", "geometric", "umegaki", "bs"])
def test_gradient_finite_difference(kind):
    for seed in range(5):
        rng = np.random.default_rng(seed)
        tau, sigma = random_state(3, seed=rng), random_state(3, seed=rng)
        h = random_state(3, seed=rng) - np.eye(3) / 3
        val, g = dv.divergence_gradient(kind, tau, sigma, 1.5)
        step = 1e-6
        up = dv.divergence_gradient(kind, tau + step * h, sigma, 1.5)[0]
        down = dv.divergence_gradient(kind, tau - step * h, sigma, 1.5)[0]
        fd = (up - down) / (2 * step)
        an = np.trace(g @ h).real
        assert abs(fd - an) <= 1e-4 * max(abs(an), 1e-3)


def test_radius_examples():
    rho = random_state(3, seed=5)
    assert dv.radius([rho, rho], "sandwiched", 2).value == 0
    assert dv.radius([ZERO, ONE], "umegaki").value == np.inf
    with pytest.raises(dv.SupportEmpty):
        dv.radius([ZERO, ONE], "umegaki", on_empty="raise")
    res = dv.radius([np.diag([0.75, 0.25]), np.diag([0.25, 0.75])], "umegaki")
    assert abs(res.value - 0.5 * np.log(4 / 3)) < 1e-7
    assert np.allclose(res.optimizer_tau, HALF, atol=1e-4)


def test_radius_crossing_oracle():
    # for two commuting states the optimal center equalizes both divergences
    states = [np.diag([0.9, 0.1]), np.diag([0.3, 0.7])]
    ps = [np.diag(s).real for s in states]
    for kind, f in [("umegaki", kl), ("sandwiched", lambda p, q: commuting_sandwiched(p, q, 2))]:
        t = brentq(lambda t: f([t, 1 - t], ps[0]) - f([t, 1 - t], ps[1]), 0.3, 0.9, xtol=1e-14)
        ref = f([t, 1 - t], ps[0])
        res = dv.radius(states, kind, 2.0 if kind == "sandwiched" else None)
        assert abs(res.value - ref) < 1e-8
        assert abs(res.optimizer_tau[0, 0].real - t) < 1e-5


@pytest.mark.parametrize("kind, alpha", [("sandwiched", 2.0), ("geometric", 1.5), ("geometric", 1.3), ("bs", None)])
def test_radius_is_max_of_reported_divergences(kind, alpha):
    rng = np.random.default_rng(11)
    states = [random_state(2, seed=rng) for _ in range(3)]
    res = dv.radius(states, kind, alpha)
    assert abs(res.value - max(res.per_state_divergences)) < 1e-8
    tau = res.optimizer_tau
    direct = max(dv.divergence(kind, tau, r, alpha) for r in states)
    assert abs(direct - res.value) < 1e-6
    # no sampled state does better
    for _ in range(20):
        t = random_state(2, seed=rng)
        assert max(dv.divergence(kind, t, r, alpha) for r in states) >= res.value - 1e-7


def test_geometric_radius_sdp_agrees_with_iterative():
    rng = np.random.default_rng(3)
    states = [random_state(2, seed=rng) for _ in range(2)]
    exact = dv.radius(states, "geometric", 1.5).value
    tau = dv.radius(states, "geometric", 1.5).optimizer_tau
    assert abs(max(dv.geometric_renyi(tau, r, 1.5) for r in states) - exact) < 1e-6


def test_radius_on_rank_deficient_family():
    a = np.diag([0.5, 0.5, 0.0])
    b = np.diag([0.2, 0.8, 0.0])
    res = dv.radius([a, b], "umegaki")
    two = dv.radius([a[:2, :2], b[:2, :2]], "umegaki")
    assert abs(res.value - two.value) < 1e-8
