"""Interaction protocol for bandits whose rewards arrive after random delays.

One round works like this: arrivals scheduled for the round are delivered,
the policy inspects an :class:`ObservationView`, picks an arm, and the
environment draws a (reward, delay) pair and schedules the reward's future
arrival. A reward pulled at round ``s`` with delay ``d`` becomes visible at
round ``s + max(d, 1)``: observations only cover strictly past pulls, so
even a zero-delay conversion is first seen one round later. Arrivals past
the horizon are generated but censored.

The view never lets a policy distinguish "reward was 0" from "reward has
not arrived yet" — both contribute 0 to every sum it can ask for.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .distributions import DelayLaw, RewardLaw


class EpisodeComplete(RuntimeError):
    """Raised when interacting with an environment past its horizon."""


@dataclass(frozen=True)
class PullRecord:
    """One pull of one arm: what happened and when it becomes visible.

    ``arrival_round`` is ``round + max(delay, 1)``, or ``None`` when that
    lands past the horizon (the reward is censored and never observed).
    """

    arm: int
    round: int
    reward: float
    delay: int
    arrival_round: Optional[int]

    @property
    def censored(self) -> bool:
        return self.arrival_round is None


class WindowedSum(NamedTuple):
    """Raw ingredients of a waited sample mean over one arm.

    ``count`` pulls happened early enough for a wait of ``D`` rounds to
    have elapsed; ``total`` sums their rewards that arrived within the
    wait. ``empty`` flags a window that extends past the known history
    (wait of the full round count or more), where no pull can qualify.
    """

    count: int
    total: float
    empty: bool


class BanditInstance:
    """A bandit problem: per-arm (reward law, delay law) pairs and a horizon."""

    def __init__(self, arms: Sequence[Tuple[RewardLaw, DelayLaw]], horizon: int):
        arms = tuple((r, d) for r, d in arms)
        if len(arms) < 1:
            raise ValueError("instance needs at least one arm")
        if horizon < len(arms):
            raise ValueError(
                f"horizon {horizon} is smaller than the number of arms {len(arms)}"
            )
        self.arms = arms
        self.horizon = int(horizon)
        self.means = tuple(r.mean() for r, _ in arms)
        self.best_mean = max(self.means)
        self.gaps = tuple(self.best_mean - mu for mu in self.means)
        # Bound methods cached once; pulls are the innermost hot path.
        self._reward_samplers = [r.sample for r, _ in arms]
        self._delay_samplers = [d.sample for _, d in arms]

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def reward_law(self, arm: int) -> RewardLaw:
        return self.arms[arm][0]

    def delay_law(self, arm: int) -> DelayLaw:
        return self.arms[arm][1]

    def draw(self, arm: int, rng) -> Tuple[float, int]:
        """Draw one independent (reward, delay) pair for ``arm``.

        Order is pinned: reward first, delay second, two stream values per
        pull. Reproducibility of whole episodes hangs on this.
        """
        return self._reward_samplers[arm](rng), self._delay_samplers[arm](rng)

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_reward_samplers"], state["_delay_samplers"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._reward_samplers = [r.sample for r, _ in self.arms]
        self._delay_samplers = [d.sample for _, d in self.arms]


class ObservationView:
    """Read-only query handle over everything legally visible at round ``t``.

    Counts and arrived sums are snapshotted at creation, so a stored view
    keeps answering for its own round even after the episode moves on.
    """

    __slots__ = ("_env", "t", "_counts", "_sums", "_fills")

    def __init__(self, env, t, counts, sums, fills):
        self._env = env
        self.t = t
        self._counts = counts
        self._sums = sums
        self._fills = fills

    @property
    def n_arms(self) -> int:
        return len(self._counts)

    def pull_count(self, arm: int) -> int:
        """Number of pulls of ``arm`` over rounds 1..t-1."""
        return self._counts[arm]

    def arrived_sum(self, arm: int) -> float:
        """Sum of ``arm``'s rewards whose arrival round is <= t."""
        return self._sums[arm]

    def windowed(self, arm: int, wait: int) -> WindowedSum:
        """Count and reward sum for pulls old enough to have waited ``wait`` rounds.

        Includes pulls at rounds s <= t - wait; each contributes its reward
        iff its delay is <= wait. Every contributing reward arrived by
        round s + wait <= t, so nothing unobserved leaks out.
        """
        t = self.t
        if wait >= t:
            return WindowedSum(0, 0.0, True)
        if wait < 0:
            raise ValueError(f"wait must be nonnegative, got {wait}")
        n = self._fills[arm]
        rounds = self._env._arm_rounds[arm]
        count = int(np.searchsorted(rounds[:n], t - wait, side="right"))
        if count == 0:
            return WindowedSum(0, 0.0, False)
        delays = self._env._arm_delays[arm][:count]
        rewards = self._env._arm_rewards[arm][:count]
        total = float(rewards[delays <= wait].sum())
        return WindowedSum(count, total, False)


class DelayedBanditEnv:
    """Single-episode simulator enforcing the delayed-visibility rules."""

    def __init__(self, instance: BanditInstance):
        self.instance = instance
        K, T = instance.n_arms, instance.horizon
        self._round = 1
        self._delivered_through = 0
        self._pulls_made = 0
        self._counts = [0] * K
        self._sums = [0.0] * K
        self._calendar = [[] for _ in range(T + 2)]
        self._censored = 0
        # Global chronological log (pull p happened at round p + 1).
        self._log_arm = np.empty(T, dtype=np.int64)
        self._log_reward = np.empty(T, dtype=np.float64)
        self._log_delay = []  # exact ints; heavy tails overflow fixed width
        self._log_arrival = np.empty(T, dtype=np.int64)  # -1 once censored
        # Per-arm chronological logs backing windowed queries.
        self._arm_rounds = [np.empty(T, dtype=np.int64) for _ in range(K)]
        self._arm_delays = [np.empty(T, dtype=np.int64) for _ in range(K)]
        self._arm_rewards = [np.empty(T, dtype=np.float64) for _ in range(K)]
        self._arm_fill = [0] * K

    @property
    def round(self) -> int:
        return self._round

    @property
    def horizon(self) -> int:
        return self.instance.horizon

    @property
    def done(self) -> bool:
        return self._round > self.instance.horizon

    @property
    def pull_counts(self) -> Tuple[int, ...]:
        return tuple(self._counts)

    @property
    def censored_count(self) -> int:
        return self._censored

    def observe(self) -> ObservationView:
        """Deliver arrivals due by the current round and expose the view."""
        t = self._round
        if t > self.instance.horizon:
            raise EpisodeComplete(f"episode over: round {t} > horizon")
        sums = self._sums
        while self._delivered_through < t:
            self._delivered_through += 1
            for arm, reward in self._calendar[self._delivered_through]:
                sums[arm] += reward
        return ObservationView(
            self, t, list(self._counts), list(sums), list(self._arm_fill)
        )

    def pull(self, arm: int, rng) -> None:
        """Pull ``arm`` at the current round and schedule its reward arrival."""
        s = self._round
        T = self.instance.horizon
        if s > T:
            raise EpisodeComplete(f"episode over: cannot pull at round {s} > horizon {T}")
        reward, delay = self.instance.draw(arm, rng)
        delay = int(delay)
        arrival = s + (delay if delay >= 1 else 1)
        p = self._pulls_made
        self._log_arm[p] = arm
        self._log_reward[p] = reward
        self._log_delay.append(delay)
        if arrival <= T:
            self._log_arrival[p] = arrival
            self._calendar[arrival].append((arm, reward))
        else:
            self._log_arrival[p] = -1
            self._censored += 1
        f = self._arm_fill[arm]
        self._arm_rounds[arm][f] = s
        # Clamp: any delay past the horizon behaves identically in-window.
        self._arm_delays[arm][f] = delay if delay <= T else T + 1
        self._arm_rewards[arm][f] = reward
        self._arm_fill[arm] = f + 1
        self._counts[arm] += 1
        self._pulls_made += 1
        self._round += 1

    def true_pseudo_regret(self, t: Optional[int] = None) -> float:
        """Gap-weighted suboptimal pull count after ``t`` completed rounds.

        Environment-side accounting only; uses the true gaps, which no
        policy ever sees.
        """
        if t is None:
            t = self._pulls_made
        if t > self._pulls_made:
            raise ValueError(f"round {t} not yet played (at {self._pulls_made})")
        gaps = self.instance.gaps
        if t == self._pulls_made:
            return float(sum(g * c for g, c in zip(gaps, self._counts)))
        counts = np.bincount(self._log_arm[:t], minlength=self.instance.n_arms)
        return float(np.dot(np.asarray(gaps), counts))

    def pull_records(self) -> list[PullRecord]:
        """Chronological log of every pull made so far."""
        out = []
        for p in range(self._pulls_made):
            arrival = int(self._log_arrival[p])
            out.append(
                PullRecord(
                    arm=int(self._log_arm[p]),
                    round=p + 1,
                    reward=float(self._log_reward[p]),
                    delay=self._log_delay[p],
                    arrival_round=None if arrival < 0 else arrival,
                )
            )
        return out
