"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see every line. All
experiments use fixed master seeds; nothing here is tuned per run.
"""
from __future__ import annotations

import filecmp
import math

import numpy as np
import pytest

from patientbandits.cli import run_preset, PRESET_NAMES
from patientbandits.distributions import Bernoulli, ParetoCeil, assumption1_margin
from patientbandits.environment import BanditInstance
from patientbandits.estimators import (
    AdaptParams,
    UcbParams,
    alpha_hat,
    bias_bound_oracle,
    confidence_radius,
    mu_hat,
    window_pair,
)
from patientbandits.harness import monte_carlo, simulate, split_seed
from patientbandits.policies import PatientBandits, VanillaUcb
from patientbandits.theory import make_coupled_pair, make_lower_bound_pair

MASTER = 20250601

FIGURE5_INSTANCE = BanditInstance(
    [(Bernoulli(0.6), ParetoCeil(1.0)), (Bernoulli(0.8), ParetoCeil(0.3))],
    horizon=3000,
)
INCREMENT_CHECKPOINTS = (600, 1200, 1800, 2400, 3000)


def _report(name: str, ok: bool, detail: str) -> bool:
    print(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


def _pareto_draws(rng, alpha, shape):
    return np.ceil((1.0 - rng.random(shape)) ** (-1.0 / alpha))


@pytest.fixture(scope="module")
def figure5_results():
    """Shared 100-run curves on the heterogeneous-delay instance (A4/A5/A9)."""
    specs = {
        "patient": {"kind": "patient", "alpha": 0.3},
        "ducb": {"kind": "ducb", "m": 50, "cdf": {"kind": "pareto_ceil", "alpha": 0.7}},
        "ucb": {"kind": "ucb"},
        "adapt": {"kind": "adapt", "c": 1.0, "alpha_floor": 0.2, "mu_floor": 0.5},
    }
    return {
        name: monte_carlo(
            FIGURE5_INSTANCE,
            spec,
            runs=100,
            master_seed=MASTER,
            checkpoints=INCREMENT_CHECKPOINTS,
            n_jobs=2,
        )
        for name, spec in specs.items()
    }


def _increments(mean):
    # Regret gained over the middle 20% of rounds vs the last 20%.
    mid = mean[2] - mean[1]  # (0.4T, 0.6T]
    last = mean[4] - mean[3]  # (0.8T, T]
    return mid, last


def test_a1_confidence_radius_coverage():
    # Single arm, Bernoulli(0.5), pulled every round; the radius at
    # delta = 0.05 must cover the estimate error in >= 95% of 2000 runs.
    runs, horizon, mu = 2000, 1000, 0.5
    rng = np.random.default_rng(split_seed(MASTER, 1))
    lines = []
    ok = True
    for alpha in (0.3, 1.0):
        rewards = (rng.random((runs, horizon)) < mu).astype(np.float64)
        delays = _pareto_draws(rng, alpha, (runs, horizon))
        params = UcbParams(alpha=alpha, K=1, T=horizon, delta=0.05)
        for t in (100, 1000):
            rounds = np.arange(1, t + 1)
            visible = delays[:, :t] <= (t - rounds)
            sums = (rewards[:, :t] * visible).sum(axis=1)
            estimates = np.array([mu_hat(s, t) for s in sums])
            radius = confidence_radius(t, params)
            coverage = float(np.mean(np.abs(estimates - mu) <= radius))
            lines.append(f"alpha={alpha} t={t} coverage={coverage:.4f}")
            ok &= coverage >= 0.95
    assert _report("A1", ok, "; ".join(lines))


def test_a2_bias_never_exceeds_bound():
    # Exhaustive prefixes/suffixes of [1..T] for every T <= 300, evaluated
    # at t = T; exact inequality, no tolerance.
    checked = 0
    worst = math.inf
    for alpha in (0.2, 0.5, 0.8, 1.5):
        law = ParetoCeil(alpha)
        for T in range(2, 301):
            for n in range(1, T + 1):
                for schedule in (range(1, n + 1), range(T - n + 1, T + 1)):
                    exact, bound = bias_bound_oracle(schedule, T, law, mu=1.0)
                    assert exact <= bound, (alpha, T, list(schedule))
                    worst = min(worst, bound - exact)
                    checked += 2
    assert _report("A2", True, f"{checked} schedules, min slack {worst:.4f}")


def test_a3_assumed_index_sweet_spot():
    # Mean final regret at the matched index 0.3 must beat both a too-small
    # and a too-large assumed index, by > 2 combined standard errors.
    instance = BanditInstance(
        [(Bernoulli(0.5), ParetoCeil(1.0)), (Bernoulli(0.55), ParetoCeil(0.3))],
        horizon=3000,
    )
    results = {
        abar: monte_carlo(
            instance,
            {"kind": "patient", "alpha": abar},
            runs=100,
            master_seed=MASTER,
            checkpoints=[3000],
            n_jobs=2,
        )
        for abar in (0.02, 0.3, 0.5)
    }
    mid = results[0.3]
    lines = [
        f"alpha={a}: {r.final_mean:.2f}+-{r.final_stderr:.2f}"
        for a, r in results.items()
    ]
    ok = True
    for other in (0.02, 0.5):
        gap = results[other].final_mean - mid.final_mean
        need = 2.0 * math.hypot(results[other].final_stderr, mid.final_stderr)
        lines.append(f"gap(0.3 vs {other})={gap:.2f} need>{need:.2f}")
        ok &= gap > need
    assert _report("A3", ok, "; ".join(lines))


def test_a4_threshold_baseline_breaks_under_heterogeneous_delays(figure5_results):
    patient = figure5_results["patient"]
    ducb = figure5_results["ducb"]
    ratio = ducb.final_mean / patient.final_mean
    d_mid, d_last = _increments(ducb.mean)
    p_mid, p_last = _increments(patient.mean)
    ducb_linear = abs(d_last - d_mid) <= 0.25 * d_mid
    patient_sublinear = p_last < 0.5 * p_mid
    detail = (
        f"ducb={ducb.final_mean:.1f} patient={patient.final_mean:.1f} "
        f"ratio={ratio:.2f} (need>2); ducb increments mid={d_mid:.1f} "
        f"last={d_last:.1f} (within 25%: {ducb_linear}); patient increments "
        f"mid={p_mid:.1f} last={p_last:.1f} ratio={p_last / p_mid:.2f} (need<0.5)"
    )
    ok = ratio > 2.0 and ducb_linear and patient_sublinear
    assert _report("A4", ok, detail)


def test_a5_plain_ucb_pays_for_ignoring_delays(figure5_results):
    patient = figure5_results["patient"]
    ucb = figure5_results["ucb"]
    ratio = ucb.final_mean / patient.final_mean
    ok = ratio >= 1.5
    assert _report(
        "A5",
        ok,
        f"ucb={ucb.final_mean:.1f} patient={patient.final_mean:.1f} "
        f"ratio={ratio:.2f} (need>=1.5)",
    )


def test_a6_tail_index_estimate_band():
    # |alpha_hat - alpha ^ 1/2| <= 10 / ln(pulls) in >= 95% of 500 runs.
    runs, horizon, mu = 500, 10**4, 0.9
    rng = np.random.default_rng(split_seed(MASTER, 6))
    lines = []
    ok = True
    for alpha in (0.3, 0.5):
        params = AdaptParams(c=1.0, alpha_floor=alpha, mu_floor=mu, K=1, T=horizon)
        rewards = (rng.random((runs, horizon)) < mu).astype(np.float64)
        delays = _pareto_draws(rng, alpha, (runs, horizon))
        for t in (10**3, 10**4):
            long_wait, short_wait = window_pair(t, params)
            estimates = np.empty(runs)
            for r in range(runs):
                means = []
                for wait in (long_wait, short_wait):
                    upto = t - wait
                    visible = delays[r, :upto] <= wait
                    means.append(float((rewards[r, :upto] * visible).sum()) / upto)
                estimates[r] = alpha_hat(means[0] - means[1], t)
            band = 10.0 / math.log(t)
            frac = float(np.mean(np.abs(estimates - min(alpha, 0.5)) <= band))
            err = float(np.mean(np.abs(estimates - min(alpha, 0.5))))
            lines.append(
                f"alpha={alpha} pulls={t}: band={band:.3f} hit={frac:.3f} "
                f"mean|err|={err:.3f}"
            )
            ok &= frac >= 0.95
    assert _report("A6", ok, "; ".join(lines))


def test_a7_regret_increments_shrink_with_horizon():
    # R(2T) - R(T) <= 1.5 (R(T) - R(T/2)) + 2 stderr across T in {2k,4k,8k}.
    means, ses = {}, {}
    for horizon in (2000, 4000, 8000):
        instance = BanditInstance(
            [(Bernoulli(0.5), ParetoCeil(0.8)), (Bernoulli(0.7), ParetoCeil(0.8))],
            horizon=horizon,
        )
        res = monte_carlo(
            instance,
            {"kind": "patient", "alpha": 0.8},
            runs=200,
            master_seed=MASTER,
            checkpoints=[horizon],
            n_jobs=2,
        )
        means[horizon], ses[horizon] = res.final_mean, res.final_stderr
    upper_inc = means[8000] - means[4000]
    lower_inc = means[4000] - means[2000]
    # stderr of (upper_inc - 1.5 * lower_inc) over independent run sets.
    spread = math.sqrt(
        ses[8000] ** 2 + (2.5 * ses[4000]) ** 2 + (1.5 * ses[2000]) ** 2
    )
    bound = 1.5 * lower_inc + 2.0 * spread
    ok = upper_inc <= bound
    assert _report(
        "A7",
        ok,
        f"R={means[2000]:.1f}/{means[4000]:.1f}/{means[8000]:.1f}; "
        f"increment {upper_inc:.1f} <= {bound:.1f}",
    )


def test_a8_hard_pair_identities_and_indistinguishability():
    checks = 0
    for T in (4, 16, 100, 10**4):
        for alpha in (0.25, 0.5, 1.0):
            pair = make_lower_bound_pair(T, alpha)
            assert abs((0.5 + pair.q) * (1 - pair.p) - (0.5 - pair.q)) <= 1e-12
            assert pair.q >= pair.p / 4.0
            assert assumption1_margin(
                pair.problem_b.delay_law(1), alpha, m_max=T - 1 if T > 2 else 1
            ) >= 0.0
            checks += 1
    coupled_a, coupled_b = make_coupled_pair(200, alpha=0.5)
    for k in range(50):
        seed = split_seed(MASTER, 800 + k)
        for policy_factory in (lambda: PatientBandits(alpha=0.5), VanillaUcb):
            env_a, _ = simulate(coupled_a, policy_factory(), np.random.default_rng(seed))
            env_b, _ = simulate(coupled_b, policy_factory(), np.random.default_rng(seed))
            assert [r.arm for r in env_a.pull_records()] == [
                r.arm for r in env_b.pull_records()
            ]
    assert _report(
        "A8", True, f"{checks} parameter pairs exact; 50 coupled seeds trace-equal"
    )


def test_a9_adaptive_variant_tracks_the_tuned_policy(figure5_results):
    patient = figure5_results["patient"]
    adapt = figure5_results["adapt"]
    ratio = adapt.final_mean / patient.final_mean
    a_mid, a_last = _increments(adapt.mean)
    sublinear = a_last < 0.5 * a_mid
    ok = ratio <= 3.0 and sublinear
    assert _report(
        "A9",
        ok,
        f"adapt={adapt.final_mean:.1f} patient={patient.final_mean:.1f} "
        f"ratio={ratio:.2f} (need<=3); increments mid={a_mid:.1f} last={a_last:.1f} "
        f"ratio={a_last / a_mid:.2f} (need<0.5)",
    )


def test_a10_preset_determinism_serial_vs_parallel(tmp_path):
    # Two invocations per preset at scale 0.1, same master seed, one serial
    # and one parallel: CSV bodies must be byte-identical.
    seed = MASTER
    mismatches = []
    for name in PRESET_NAMES:
        first = run_preset(name, scale=0.1, out_dir=str(tmp_path / "serial"),
                           master_seed=seed, n_jobs=1)
        second = run_preset(name, scale=0.1, out_dir=str(tmp_path / "parallel"),
                            master_seed=seed, n_jobs=2)
        if not filecmp.cmp(first, second, shallow=False):
            mismatches.append(name)
    ok = not mismatches
    assert _report(
        "A10",
        ok,
        "all presets byte-identical under serial and parallel execution"
        if ok
        else f"mismatched presets: {mismatches}",
    )
