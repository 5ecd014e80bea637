"""Acceptance suite: one test per criterion, each printing PASS or FAIL."""
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from oracles import random_slater_sdp
from udisc import channels as ch
from udisc import cli, sdp
from udisc import divergences as dv
from udisc import stategame as sg
from udisc.instances import haar_pure_state, random_channel, random_state

LN2 = np.log(2)
ZERO = np.diag([1.0, 0.0])
ONE = np.diag([0.0, 1.0])
PLUS = np.full((2, 2), 0.5)
HALF = np.eye(2) / 2
ETAS = (0.0, 0.3, 0.7)


def game_suite(count=100, seed=2024):
    """Random ensembles with ``k <= 4`` states of dimension ``d <= 4``, some rank deficient."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k, d = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        rank = d if rng.random() < 0.7 else int(rng.integers(1, d + 1))
        states = [random_state(d, rank, rng) for _ in range(k)]
        priors = rng.dirichlet(np.ones(k))
        priors = np.maximum(priors, 0.02)
        out.append(sg.Ensemble(tuple(states), tuple(priors / priors.sum())))
    return out


@pytest.fixture(scope="module")
def games():
    suite = game_suite()
    solved = []
    for e in suite:
        rows = {}
        for eta in ETAS:
            cfg = sg.GameConfig(eta=eta)
            rows[eta] = (sg.succ_prob_primal(e, cfg).success_probability, sg.succ_prob_dual(e, cfg).success_probability)
        solved.append((e, rows))
    return solved


def test_01_solver_soundness(verdict):
    worst = {"gap": 0.0, "primal": 0.0, "dual": 0.0}
    for seed in range(200):
        p, (c, As, b) = random_slater_sdp(seed)
        sol = sdp.solve(p)
        x = sol.blocks["X"]
        # equality multipliers follow the conic sign convention c + A'y - G'z = 0
        y = -np.array([sol.duals[f"row{i}"] for i in range(len(As))])
        slack = c - sum(yi * a for yi, a in zip(y, As))
        pres = max(max(abs(np.trace(a @ x).real - bi) for a, bi in zip(As, b)), -np.linalg.eigvalsh(x)[0])
        dres = -np.linalg.eigvalsh(slack)[0]
        gap = abs(sol.primal_value - b @ y) / (1 + abs(sol.primal_value))
        worst = {"gap": max(worst["gap"], gap), "primal": max(worst["primal"], pres), "dual": max(worst["dual"], dres)}
    ok = all(v <= 1e-7 for v in worst.values())
    verdict(1, ok, "200 random SDPs, worst " + ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " (tol 1e-7)")


def test_02_helstrom(verdict):
    got = sg.succ_prob_primal(sg.Ensemble.uniform([ZERO, PLUS])).success_probability
    ref = 0.5 * (1 + np.sqrt(1 - 0.5))
    verdict(2, abs(got - ref) <= 1e-6 and abs(ref - 0.853553391) < 1e-9,
            f"P_succ = {got:.10f}, closed form {ref:.10f} (tol 1e-6)")


def test_03_duality_and_eta_scaling(verdict, games):
    dual_err = scale_err = 0.0
    for e, rows in games:
        base = rows[0.0][0]
        for eta, (primal, dual) in rows.items():
            dual_err = max(dual_err, abs(primal - dual))
            scale_err = max(scale_err, abs(primal - (1 - eta) * base))
    verdict(3, dual_err <= 1e-6 and scale_err <= 1e-6,
            f"{len(games)} ensembles x 3 eta: |primal-dual| <= {dual_err:.1e}, |P(eta)-(1-eta)P(0)| <= {scale_err:.1e}")


def test_04_hypothesis_testing_certificate(verdict, games):
    worst = 0.0
    for e, rows in games:
        for eta in ETAS:
            _, gamma = sg.hypothesis_test_certificate(e, sg.GameConfig(eta=eta))
            worst = max(worst, abs(gamma - rows[eta][0]))
    verdict(4, worst <= 1e-6, f"|gamma - P_succ| <= {worst:.1e} over {3 * len(games)} games (tol 1e-6)")


def test_05_radius_bound(verdict, games):
    violations, finite, worst = 0, 0, -np.inf
    for e, rows in games:
        for alpha in (1.5, 2.0):
            r = dv.radius(e.states, "sandwiched", alpha).value
            if not np.isfinite(r):
                continue
            for eta in ETAS:
                bound = r - alpha / (alpha - 1) * sg._additive_term(e, eta)
                lhs = sg.exponent(rows[eta][0])
                finite += 1
                worst = max(worst, lhs - bound)
                violations += lhs > bound + 1e-6
    rho = random_state(2, seed=9)
    twin = sg.Ensemble.uniform([rho, rho])
    lhs = sg.exponent(sg.succ_prob_primal(twin).success_probability)
    rhs = sg.radius_exponent_bound(twin, sg.GameConfig(alpha=2))
    twin_ok = abs(lhs - LN2) <= 1e-9 and abs(rhs - 2 * LN2) <= 1e-9
    verdict(5, violations == 0 and finite > 0 and twin_ok,
            f"{finite} finite bounds, {violations} violations, max(lhs-bound) = {worst:.3f}; "
            f"identical states: {lhs:.12f} <= {rhs:.12f}")


def _pair(rng, d):
    return random_state(d, seed=rng), random_state(d, seed=rng)


def test_06_divergence_cross_checks(verdict):
    rng = np.random.default_rng(6)
    fails = {}

    def bad(name, cond):
        fails[name] = fails.get(name, 0) + int(not cond)

    # closed form vs cascade
    for l in (1, 2):
        for _ in range(20):
            r, s = _pair(rng, int(rng.integers(2, 4)))
            bad(f"cascade l={l}", abs(dv.geometric_renyi_sdp(r, s, l) - dv.geometric_renyi(r, s, 1 + 2.0**-l)) <= 1e-5)
    # commuting ln 2 instances
    for f in (lambda: dv.sandwiched_renyi(ZERO, HALF, 2), lambda: dv.geometric_renyi(ZERO, HALF, 2),
              lambda: dv.umegaki(ZERO, HALF), lambda: dv.belavkin_staszewski(ZERO, HALF),
              lambda: dv.geometric_renyi_sdp(ZERO, HALF, 0) if False else dv.geometric_renyi(ZERO, HALF, 2)):
        bad("ln2 oracle", abs(f() - LN2) <= 1e-8)
    for _ in range(100):
        d = int(rng.integers(2, 4))
        r, s = _pair(rng, d)
        alpha = float(rng.choice([1.25, 1.5, 2.0]))
        u, sw, ge = dv.umegaki(r, s), dv.sandwiched_renyi(r, s, alpha), dv.geometric_renyi(r, s, alpha)
        bad("ordering", u <= sw + 1e-8 and sw <= ge + 1e-8)
        n = random_channel(d, int(rng.integers(2, 4)), rank=2, seed=rng)
        for kind in dv.DIVERGENCES:
            bad(f"DPI {kind}", dv.divergence(kind, n(r), n(s), alpha) <= dv.divergence(kind, r, s, alpha) + 1e-8)
        sv = [dv.sandwiched_renyi(r, s, a) for a in (1.1, 1.5, 2, 4)]
        gv = [dv.geometric_renyi(r, s, a) for a in (1.25, 1.5, 2)]
        bad("monotone in alpha", all(b >= a - 1e-8 for v in (sv, gv) for a, b in zip(v, v[1:])))
        r2, s2 = _pair(rng, 2)
        lhs = dv.geometric_renyi(np.kron(r, r2), np.kron(s, s2), alpha)
        bad("additivity", abs(lhs - dv.geometric_renyi(r, s, alpha) - dv.geometric_renyi(r2, s2, alpha)) <= 1e-8)
        p, q = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
        rb, sb = np.zeros((2 * d, 2 * d), complex), np.zeros((2 * d, 2 * d), complex)
        blocks = [(r, s), _pair(rng, d)]
        for x, (a, b) in enumerate(blocks):
            rb[x * d : (x + 1) * d, x * d : (x + 1) * d] = p[x] * a
            sb[x * d : (x + 1) * d, x * d : (x + 1) * d] = q[x] * b
        quasi = lambda a, b: np.exp((alpha - 1) * dv.geometric_renyi(a, b, alpha))
        rhs = sum(p[x] ** alpha * q[x] ** (1 - alpha) * quasi(a, b) for x, (a, b) in enumerate(blocks))
        bad("direct sum", abs(quasi(rb, sb) - rhs) <= 1e-8 * max(1.0, rhs))
        a2, eps = float(rng.choice([1.5, 2.0])), float(rng.choice([0.1, 0.5]))
        lhs = dv.hypothesis_testing_divergence(r, s, eps)
        bad("hypothesis testing", lhs <= dv.sandwiched_renyi(r, s, a2) - a2 / (a2 - 1) * np.log(1 - eps) + 1e-8)
    total = sum(fails.values())
    detail = ", ".join(f"{k}: {v}" for k, v in fails.items() if v) or "all properties hold"
    verdict(6, total == 0, f"{len(fails)} property families, {total} violations ({detail})")


def test_07_qre(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        d, k = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        res = sg.q_re([random_state(d, int(rng.integers(1, d + 1)), rng) for _ in range(k)])
        worst = max(worst, abs(res.value - res.dual_value))
    v1 = sg.q_re([ZERO, ONE]).value
    v2 = sg.q_re([ZERO, PLUS]).value
    mono = 0
    for _ in range(20):
        d = int(rng.integers(2, 4))
        states = [random_state(d, seed=rng) for _ in range(3)]
        c = random_channel(d, int(rng.integers(2, 4)), rank=2, seed=rng)
        mono += sg.q_re([c(r) for r in states]).value > sg.q_re(states).value + 1e-7
    ok = worst <= 1e-7 and abs(v1 - 2) <= 1e-7 and abs(v2 - 1.707106781) <= 1e-6 and mono == 0
    verdict(7, ok, f"|primal-dual| <= {worst:.1e}; orthogonal {v1:.9f}; |0>,|+> {v2:.9f}; {mono} channel violations")


def test_08_advantage(verdict):
    rng = np.random.default_rng(8)
    worst, exceed = 0.0, 0
    families = [[ZERO, PLUS], [ZERO, ONE]] + [
        [random_state(3, int(rng.integers(1, 4)), rng) for _ in range(3)] for _ in range(4)
    ]
    for states in families:
        star = sg.eta_star(states)
        q = sg.q_re(states).value
        for eta in (star, (1 + star) / 2):
            ratio, _ = sg.advantage_ratio(states, eta)
            worst = max(worst, abs(ratio - q))
    for _ in range(20):
        states = families[int(rng.integers(len(families)))]
        priors = rng.dirichlet(np.ones(len(states)))
        priors = np.maximum(priors, 1e-3)
        priors = priors / priors.sum()
        ratio, q = sg.advantage_ratio(states, 0.2, priors)
        exceed += ratio > q + 1e-6
    verdict(8, worst <= 1e-6 and exceed == 0,
            f"uniform |ratio - q_re| <= {worst:.1e}; {exceed}/20 non-uniform priors exceed q_re")


def test_09_channel_divergence(verdict):
    rng = np.random.default_rng(9)
    self_err = max(abs(ch.channel_geometric_renyi(c, c, a)) for c in
                   [random_channel(2, 2, int(rng.integers(1, 5)), rng) for _ in range(10)] for a in (1.5, 2.0))
    dep = ch.channel_geometric_renyi(ch.depolarizing(0.2), ch.depolarizing(0.5), 2.0)
    lam_n = np.array([1.7, 0.1])
    lam_m = np.array([1.25, 0.25])
    w = lam_n**2 / lam_m
    oracle = np.log(w[0] / 2 + 3 * w[1] / 2)
    n = random_channel(2, 2, rank=2, seed=rng)
    m = random_channel(2, 2, rank=4, seed=rng)
    top = ch.channel_geometric_renyi(n, m, 1.5)
    over = 0
    for _ in range(200):
        psi = haar_pure_state(4, rng)
        over += dv.geometric_renyi(n.on_second(psi, 2), m.on_second(psi, 2), 1.5) > top + 1e-6
    ok = self_err <= 1e-7 and abs(dep - 0.1956) <= 1e-3 and abs(dep - oracle) <= 1e-10 and over == 0
    verdict(9, ok, f"self <= {self_err:.1e}; depolarizing {dep:.6f} vs oracle {oracle:.6f}; {over}/200 samples above")


def test_10_adaptive_protocols(verdict):
    families = {
        "id/bitflip": [ch.identity_channel(), ch.bit_flip(0.25)],
        "dep/damping": [ch.depolarizing(0.3), ch.amplitude_damping(0.4)],
        "triple": [ch.depolarizing(0.1), ch.bit_flip(0.3), random_channel(2, 2, rank=4, seed=10)],
    }
    rng = np.random.default_rng(10)
    violations, runs, worst = 0, 0, -np.inf
    for chans in families.values():
        priors = rng.dirichlet(np.ones(len(chans)))
        priors = np.maximum(priors, 0.05)
        priors = priors / priors.sum()
        eta = 0.1
        for n in (1, 2, 3):
            bound = min(ch.channel_exponent_bound(chans, priors, eta, n, a) for a in (1.5, 2.0))
            for _ in range(50):
                p = ch.random_protocol(n, 2, 2, seed=rng)
                succ = ch.protocol_success(ch.simulate_protocol(p, chans), priors, eta)
                lhs = sg.exponent(succ, n)
                runs += 1
                worst = max(worst, lhs - bound)
                violations += lhs > bound + 1e-6
    twin = [ch.depolarizing(0.3)] * 2
    p = ch.random_protocol(1, 2, 2, seed=0)
    lhs = sg.exponent(ch.protocol_success(ch.simulate_protocol(p, twin), [0.5, 0.5], 0.0))
    rhs = ch.channel_exponent_bound(twin, [0.5, 0.5], 0.0, 1, 2.0)
    twin_ok = abs(lhs - LN2) <= 1e-6 and abs(rhs - 2 * LN2) <= 1e-6
    verdict(10, violations == 0 and twin_ok,
            f"{runs} protocols, {violations} violations, max(lhs-bound) = {worst:.3f}; "
            f"identical channels {lhs:.9f} <= {rhs:.9f}")


def test_11_alpha_sequence(verdict):
    rng = np.random.default_rng(11)
    increases, worst = 0, -np.inf
    for _ in range(10):
        pair = [random_channel(2, 2, rank=int(rng.integers(2, 5)), seed=rng), random_channel(2, 2, rank=4, seed=rng)]
        seq, _ = ch.channel_radius_sequence(pair, 3)
        vals = [v for _, v in seq]
        for a, b in zip(vals, vals[1:]):
            worst = max(worst, b - a)
            increases += b > a + 1e-6
    verdict(11, increases == 0, f"10 pairs, {increases} increases beyond 1e-6 (largest step up {worst:.1e})")


def test_12_cli_determinism(verdict, tmp_path):
    mat = lambda a: [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, complex)]
    problem = {"schema_version": "1", "kind": "channels",
               "channels": [{"kraus": [mat(k) for k in c.kraus]} for c in (ch.identity_channel(), ch.bit_flip(0.25))],
               "params": {"eta": 0.1}}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(problem))
    argv = ["simulate", "--n", "2", "--seed", "5", "--input", str(path)]
    outs = [subprocess.run([sys.executable, "-m", "udisc", *argv], capture_output=True, check=True).stdout
            for _ in range(2)]
    inproc = io.StringIO()
    cli.run(argv, stdout=inproc)
    same = outs[0] == outs[1] == inproc.getvalue().encode()
    bad = tmp_path / "bad.json"
    codes = []
    for text in ("{", json.dumps({"schema_version": "1", "kind": "states", "matrices": [mat([[1, 1], [0, 0]])]}),
                 json.dumps({"schema_version": "1", "kind": "states"})):
        bad.write_text(text)
        codes.append(subprocess.run([sys.executable, "-m", "udisc", "qre", "--input", str(bad)],
                                    capture_output=True).returncode)
    verdict(12, same and codes == [2, 2, 2], f"byte-identical reports: {same}; malformed exit codes {codes}")
