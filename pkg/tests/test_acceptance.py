"""Acceptance suite: each test checks one criterion and records a PASS/FAIL line.

The lines are printed in the pytest session summary (and to stdout with ``-s``).
"""

import numpy as np
import pytest

from aekit._jsonio import dumps
from aekit.economy import TabulatedPreferenceMap
from aekit.equilibrium import ne_oracle, ne_via_gap
from aekit.generate import (EPSILONS, random_economy, random_gnep, random_regular_family,
                            random_slmfg)
from aekit.profiles import (ProfileFamily, check_regularity, estimate_alpha, estimate_tau,
                            limit_profile, lsc_probe, rho, stability_experiment)
from aekit.reductions import enumerate_eps_equilibria, from_gnep
from aekit.setval import FiniteCloud, hausdorff
from aekit.slmfg import solve_slmfg
from acceptance_log import RESULTS
from oracles import brute_hausdorff, brute_slmfg, eta_hausdorff

N_ECONOMIES = 200
N_TRIPLES = 1000
N_GNEPS = 200
N_PLANTED = 100
N_FAMILIES = 50
N_SLMFG = 100
THREADS = (1, 2, 8)
EPS_GRID = (1.0, 0.5, 0.25, 0.125, 0.0625)
DEDUP = 1e-12


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[n] = line
    print(line)
    return ok


def economies():
    rng = np.random.default_rng(20261015)
    return [random_economy(rng, dim=1 + int(rng.random() < 0.3)) for _ in range(N_ECONOMIES)]


@pytest.fixture(scope="module")
def economy_cases():
    return economies()


@pytest.fixture(scope="module")
def regular_families():
    rng = np.random.default_rng(7)
    return [random_regular_family(rng, count=25, ratio=0.5) for _ in range(N_FAMILIES)]


@pytest.fixture(scope="module")
def slmfg_cases():
    rng = np.random.default_rng(99)
    return [random_slmfg(rng, max_leader=5, max_actions=4) for _ in range(N_SLMFG)]


def test_criterion_1_gap_zeros_are_equilibria(economy_cases):
    assert all(2 <= g.n_players <= 3 and all(2 <= n <= 6 for n in g.shape) for g in economy_cases)
    assert all(g.tolerances.gap_zero == 1e-9 for g in economy_cases)
    mismatches = sum(ne_via_gap(g).equilibria != ne_oracle(g).equilibria for g in economy_cases)
    nonempty = sum(len(ne_oracle(g)) > 0 for g in economy_cases)
    assert record(1, mismatches == 0, f"{len(economy_cases)} economies, {nonempty} with equilibria, "
                                      f"{mismatches} mismatches")


def _triples():
    rng = np.random.default_rng(1)
    for i in range(N_TRIPLES):
        dim = int(rng.integers(1, 4))
        clouds = [rng.normal(size=(int(rng.integers(1, 31)), dim)) for _ in range(3)]
        if i % 10 == 0:  # near-copies exercise identity up to dedup
            clouds[1] = clouds[0] + rng.uniform(-1e-13, 1e-13, size=clouds[0].shape)
        yield tuple(FiniteCloud(c, dim=dim) for c in clouds)


def test_criterion_2_hausdorff_kernel():
    failures, worst = 0, 0.0
    for a, b, c in _triples():
        hab, hba = hausdorff(a, b), hausdorff(b, a)
        ok = hab == hba
        ok &= hausdorff(a, a) == 0.0
        ok &= (hab == 0.0) == (brute_hausdorff(a.points, b.points) <= DEDUP)
        ok &= hausdorff(a, c) <= hab + hausdorff(b, c) + 1e-12
        gap = abs(hab - eta_hausdorff(a.points, b.points))
        worst = max(worst, gap)
        ok &= gap <= 1e-9
        failures += not ok
    assert record(2, failures == 0, f"{N_TRIPLES} triples, {failures} failures, "
                                    f"max |sup-inf - eta| = {worst:.2e}")


def test_criterion_3_gnep_reduction(pd):
    rng = np.random.default_rng(3)
    mismatches = monotone_failures = 0
    for _ in range(N_GNEPS):
        spec = random_gnep(rng)
        previous = set()
        for eps in EPSILONS:
            s = spec.with_epsilon(eps)
            eqs = ne_oracle(from_gnep(s)).equilibria
            mismatches += eqs != enumerate_eps_equilibria(s).equilibria
            monotone_failures += not previous <= set(eqs)
            previous = set(eqs)
    c, d = (0.0,), (1.0,)
    fixture_ok = (ne_oracle(from_gnep(pd)).equilibria == ((d, d),)
                  and ne_oracle(from_gnep(pd.with_epsilon(1.0))).equilibria
                  == ((c, c), (c, d), (d, c), (d, d)))
    ok = mismatches == 0 and monotone_failures == 0 and fixture_ok
    assert record(3, ok, f"{N_GNEPS} games x {len(EPSILONS)} eps, {mismatches} mismatches, "
                         f"{monotone_failures} monotonicity failures, fixture {'ok' if fixture_ok else 'wrong'}")


def _plant_violation(rng, gamma):
    """Make one feasible grid action preferred at its own profile; return the expected witness."""
    feasible = [(idx, k) for idx in gamma.grid_indices() for k in range(gamma.n_players)
                if gamma.point_at(idx)[k] in set(gamma.constraint_value(k, idx).points)]
    idx, k = feasible[int(rng.integers(len(feasible)))]
    own = np.asarray(gamma.point_at(idx)[k])
    nudge = rng.uniform(-1, 1, size=own.shape) * 5e-13 if rng.random() < 0.5 else 0.0
    planted = gamma.preference_value(k, idx).union(FiniteCloud([own + nudge], dim=own.size))
    table = dict(gamma.preferences[k].table)
    table[idx] = planted
    prefs = list(gamma.preferences)
    prefs[k] = TabulatedPreferenceMap(gamma.players[k].player_id, table)
    bad = type(gamma)(gamma.players, gamma.constraints, tuple(prefs), gamma.tolerances)
    return bad, (gamma.players[k].player_id, gamma.point_at(idx))


def test_criterion_4_regularity(e1, economy_cases, regular_families):
    tau_e1 = estimate_tau(e1).tau
    alphas = [estimate_alpha(ProfileFamily.constant(g), EPS_GRID).alpha for g in economy_cases[:100]]
    alphas += [check_regularity(c.family, EPS_GRID).alpha_hat for c in regular_families]
    alpha_ok = all(a >= 1.0 for a in alphas)
    rng = np.random.default_rng(4)
    detected = 0
    for g in economy_cases[:N_PLANTED]:
        assert estimate_tau(g).tau > 0
        bad, witness = _plant_violation(rng, g)
        est = estimate_tau(bad)
        cert = check_regularity(ProfileFamily.constant(bad), EPS_GRID)
        detected += (est.tau == 0.0 and est.witness == witness and not cert.passed
                     and cert.tau_witness == witness)
    ok = abs(tau_e1 - 1.0) <= 1e-12 and alpha_ok and detected == N_PLANTED
    assert record(4, ok, f"tau on the one-player fixture = {tau_e1}, {len(alphas)} alpha estimates >= 1: {alpha_ok}, "
                         f"{detected}/{N_PLANTED} planted violations detected")


def test_criterion_5_stability(regular_families):
    bound_failures = recovery_failures = 0
    worst_recovery = 0.0
    for case in regular_families:
        report = stability_experiment(case.family)
        feas = case.limit.tolerances.feas
        tail = range(len(report.indices) // 2, len(report.indices))
        bound_failures += any(report.excess_trace[i] > feas + report.rho_trace[i] for i in tail)
        bound_failures += report.verdict != "PASS"
        recovered = rho(limit_profile(case.family).profile, case.limit)
        worst_recovery = max(worst_recovery, recovered)
        recovery_failures += not recovered <= 2.0 ** -20
    ok = bound_failures == 0 and recovery_failures == 0
    assert record(5, ok, f"{len(regular_families)} families, {bound_failures} bound failures, "
                         f"worst limit recovery {worst_recovery:.2e} (<= 2^-20 required)")


def test_criterion_6_gap_lower_semicontinuity(regular_families):
    probes = failures = 0
    for case in regular_families:
        for idx in case.limit.grid_indices():
            x = case.limit.point_at(idx)
            report = lsc_probe(case.family, x, x)
            probes += 1
            failures += not report.passed
    assert record(6, failures == 0, f"{len(regular_families)} families, {probes} probes, "
                                    f"{failures} failures")


def test_criterion_7_slmfg(slmfg_cases):
    mismatches = empty = 0
    for prob in slmfg_cases:
        for mode in ("optimistic", "pessimistic"):
            expected, size = brute_slmfg(prob, mode)
            sol = solve_slmfg(prob, mode)
            got = (sol.w_star, sol.x_star, sol.value) if sol.found else None
            mismatches += got != expected or sol.graph_size != size
            mismatches += sol.found != (size > 0)
        empty += brute_slmfg(prob)[1] == 0
    assert record(7, mismatches == 0, f"{len(slmfg_cases)} problems x 2 modes, {empty} empty graphs, "
                                      f"{mismatches} mismatches")


def test_criterion_8_determinism(economy_cases, regular_families, slmfg_cases):
    def reports(threads):
        parts = [dumps(ne_via_gap(g, threads).to_json()) for g in economy_cases]
        parts += [dumps(stability_experiment(c.family, threads=threads).to_json())
                  for c in regular_families]
        parts += [dumps(solve_slmfg(p, mode, threads).to_json())
                  for p in slmfg_cases for mode in ("optimistic", "pessimistic")]
        return "".join(parts)

    outputs = {t: reports(t) for t in THREADS}
    ok = len(set(outputs.values())) == 1
    assert record(8, ok, f"threads {THREADS}, {len(outputs[1])} bytes per run, "
                         f"{'identical' if ok else 'different'}")
