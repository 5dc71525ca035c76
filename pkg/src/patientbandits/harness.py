"""Episode execution and Monte Carlo replication with deterministic seeding.

Reproducibility contract: run ``i`` of a batch uses the generator seeded
with ``split_seed(master_seed, i)`` (a splitmix64 counter hash), and within
a run the draw order is fixed — any policy randomness first, then one
reward and one delay per pull. Replications are independent, so they can
run in worker processes; results are reduced in run-index order and are
bitwise identical to a serial pass.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .environment import BanditInstance, DelayedBanditEnv
from .policies import Policy, make_policy

_MASK64 = (1 << 64) - 1


def split_seed(master_seed: int, run_index: int) -> int:
    """Derive the seed of run ``run_index`` from the master seed (splitmix64)."""
    if run_index < 0:
        raise ValueError(f"run_index must be nonnegative, got {run_index}")
    z = (master_seed + (run_index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def default_checkpoints(horizon: int, n: int = 100) -> Tuple[int, ...]:
    """Geometrically spaced recording rounds, densest early, always ending at T."""
    points = np.unique(np.geomspace(1, horizon, num=n).round().astype(int))
    return tuple(int(p) for p in points)


@dataclass
class RegretTrace:
    """One episode's pseudo-regret curve sampled at fixed checkpoints."""

    checkpoints: Tuple[int, ...]
    regret: np.ndarray
    pull_counts: Tuple[int, ...]
    diagnostics: dict = field(default_factory=dict)


@dataclass
class MonteCarloResult:
    """Replicated regret curves: per-checkpoint mean and standard error.

    ``regrets`` keeps the full run-by-checkpoint matrix (row = run index)
    so downstream statistics never need a re-simulation.
    """

    checkpoints: Tuple[int, ...]
    mean: np.ndarray
    stderr: np.ndarray
    runs: int
    master_seed: int
    regrets: np.ndarray

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1])


def _validated_checkpoints(checkpoints, horizon) -> Tuple[int, ...]:
    if checkpoints is None:
        return default_checkpoints(horizon)
    cps = tuple(int(c) for c in checkpoints)
    if not cps:
        raise ValueError("checkpoints must be nonempty")
    if any(c < 1 or c > horizon for c in cps):
        raise ValueError(f"checkpoints must lie in [1, {horizon}]")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    return cps


def simulate(
    instance: BanditInstance,
    policy: Policy,
    rng,
    checkpoints: Optional[Sequence[int]] = None,
) -> tuple[DelayedBanditEnv, RegretTrace]:
    """Play one full episode; returns the environment alongside the trace."""
    cps = _validated_checkpoints(checkpoints, instance.horizon)
    K, T = instance.n_arms, instance.horizon
    policy.reset(K, T)
    env = DelayedBanditEnv(instance)
    is_checkpoint = np.zeros(T + 1, dtype=bool)
    is_checkpoint[list(cps)] = True
    regret = np.empty(len(cps), dtype=np.float64)
    k = 0
    for t in range(1, T + 1):
        view = env.observe()
        arm = policy.select(view, rng)
        if not 0 <= arm < K:
            raise RuntimeError(
                f"policy {policy.label!r} selected arm {arm} out of range "
                f"[0, {K}) at round {t}"
            )
        env.pull(arm, rng)
        if is_checkpoint[t]:
            regret[k] = env.true_pseudo_regret()
            k += 1
    diagnostics = {}
    history = getattr(policy, "alpha_bar_history", None)
    if history:
        diagnostics["alpha_bar"] = np.asarray(history)
    trace = RegretTrace(
        checkpoints=cps,
        regret=regret,
        pull_counts=env.pull_counts,
        diagnostics=diagnostics,
    )
    return env, trace


def run_episode(
    instance: BanditInstance,
    policy: Policy,
    seed: int,
    checkpoints: Optional[Sequence[int]] = None,
) -> RegretTrace:
    """One episode under the seed-derived stream; deterministic end to end."""
    rng = np.random.default_rng(seed)
    _, trace = simulate(instance, policy, rng, checkpoints)
    return trace


def _replicate(args) -> np.ndarray:
    instance, policy_spec, seed, checkpoints = args
    trace = run_episode(instance, make_policy(policy_spec), seed, checkpoints)
    return trace.regret


def monte_carlo(
    instance: BanditInstance,
    policy_spec: Mapping,
    runs: int,
    master_seed: int,
    checkpoints: Optional[Sequence[int]] = None,
    n_jobs: int = 1,
) -> MonteCarloResult:
    """Replicate an experiment ``runs`` times and aggregate the regret curves.

    ``policy_spec`` is a config-style mapping (a fresh policy is built per
    run, which keeps replications independent across worker processes).
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    cps = _validated_checkpoints(checkpoints, instance.horizon)
    payloads = [
        (instance, policy_spec, split_seed(master_seed, i), cps) for i in range(runs)
    ]
    if n_jobs == 1:
        rows = [_replicate(p) for p in payloads]
    else:
        workers = None if n_jobs in (0, -1) else n_jobs
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, runs // (8 * (workers or 8)))
            rows = list(pool.map(_replicate, payloads, chunksize=chunk))
    regrets = np.vstack(rows)
    mean = regrets.mean(axis=0)
    if runs > 1:
        stderr = regrets.std(axis=0, ddof=1) / np.sqrt(runs)
    else:
        stderr = np.zeros_like(mean)
    return MonteCarloResult(
        checkpoints=cps,
        mean=mean,
        stderr=stderr,
        runs=runs,
        master_seed=master_seed,
        regrets=regrets,
    )
