"""Decision rules: the delay-patient index policies and reference baselines.

Every policy sees the world only through an :class:`ObservationView`; true
means, raw delays, and unarrived rewards are structurally out of reach.
Ties in any argmax break toward the lowest arm index so that episodes are
bit-for-bit reproducible.

Config tags: ``patient``, ``adapt``, ``ducb``, ``ucb``, ``uniform``
(see :func:`make_policy`).
"""
from __future__ import annotations

import math
from typing import Mapping, Optional

import numpy as np

from . import estimators
from .distributions import DelayLaw, delay_law_from_spec
from .environment import ObservationView
from .estimators import AdaptParams, UcbParams, mu_hat


class Policy:
    """Contract: ``reset(n_arms, horizon)`` once, then ``select`` each round."""

    label = "policy"

    def reset(self, n_arms: int, horizon: int) -> None:
        raise NotImplementedError

    def select(self, view: ObservationView, rng) -> int:
        raise NotImplementedError


def _argmax_lowest(indices) -> int:
    best, best_value = 0, indices[0]
    for i in range(1, len(indices)):
        if indices[i] > best_value:
            best, best_value = i, indices[i]
    return best


class PatientBandits(Policy):
    """Optimistic index policy with a bias bonus for in-flight conversions.

    Pulls every arm once, then maximizes ``arrived mean + radius`` where
    the radius carries the extra ``2 * n ** -(min(alpha, 0.5))`` term that
    keeps underestimated, slow-converting arms in the running. ``alpha``
    is the assumed tail-decay exponent: a float, the string ``"loglog"``
    for the horizon-free schedule, or any callable of the round.
    """

    def __init__(self, alpha, delta: Optional[float] = None):
        if alpha == "loglog":
            alpha = estimators.log_log_schedule
        self.alpha = alpha
        self.delta = delta
        if callable(alpha):
            self.label = "patient(alpha=loglog)"
        else:
            self.label = f"patient(alpha={alpha:g})"

    def reset(self, n_arms: int, horizon: int) -> None:
        self.params = UcbParams(alpha=self.alpha, K=n_arms, T=horizon, delta=self.delta)
        self._radius_table = None
        if not callable(self.alpha):
            n = np.arange(1, horizon + 1, dtype=np.float64)
            dev = np.sqrt(2.0 * math.log(2.0 / self.params.delta) / n)
            self._radius_table = dev + 2.0 * n ** -min(self.alpha, 0.5)

    def select(self, view: ObservationView, rng) -> int:
        K = view.n_arms
        for i in range(K):
            if view.pull_count(i) == 0:
                return i
        table = self._radius_table
        best, best_index = 0, -math.inf
        for i in range(K):
            n = view.pull_count(i)
            if table is not None:
                radius = table[n - 1]
            else:
                radius = estimators.confidence_radius(n, self.params, round_=view.t)
            index = mu_hat(view.arrived_sum(i), n) + radius
            if index > best_index:
                best, best_index = i, index
        return best


class AdaptPatientBandits(Policy):
    """Patient index policy that estimates the tail exponent as it goes.

    Pulls every arm twice, then each round probes the most-pulled arm with
    a long and a short wait, turns the waited-mean difference into a
    tail-index estimate, lower-bounds it for confidence, and plugs that
    bound into the patient radius. Needs only coarse structural floors
    (``c``, ``alpha_floor``, ``mu_floor``), not the index itself.
    """

    def __init__(
        self,
        c: float,
        alpha_floor: float,
        mu_floor: float,
        delta: Optional[float] = None,
    ):
        self.c = c
        self.alpha_floor = alpha_floor
        self.mu_floor = mu_floor
        self.delta = delta
        # No commas: labels end up in CSV cells.
        self.label = f"adapt(c={c:g};alpha_floor={alpha_floor:g};mu_floor={mu_floor:g})"
        self.alpha_bar_history: list[float] = []

    def reset(self, n_arms: int, horizon: int) -> None:
        self.params = AdaptParams(
            c=self.c,
            alpha_floor=self.alpha_floor,
            mu_floor=self.mu_floor,
            K=n_arms,
            T=horizon,
        )
        self._delta = self.delta if self.delta is not None else 1.0 / (n_arms * horizon**3)
        self._two_log = 2.0 * math.log(2.0 / self._delta)
        self.alpha_bar_history = []

    def current_alpha_bar(self, view: ObservationView) -> float:
        """Tail-index lower bound computable from this round's view."""
        K = view.n_arms
        leader, leader_pulls = 0, view.pull_count(0)
        for i in range(1, K):
            n = view.pull_count(i)
            if n > leader_pulls:
                leader, leader_pulls = i, n
        long_wait, short_wait = estimators.window_pair(leader_pulls, self.params)
        w_long = view.windowed(leader, long_wait)
        w_short = view.windowed(leader, short_wait)
        if w_long.count > 0 and w_short.count > 0:
            diff = w_long.total / w_long.count - w_short.total / w_short.count
        else:
            diff = 0.0  # no usable window yet; same discounting as a null signal
        ahat = estimators.alpha_hat(diff, leader_pulls)
        return estimators.alpha_bar(ahat, leader_pulls, self.params, self._delta)

    def select(self, view: ObservationView, rng) -> int:
        K = view.n_arms
        # Initialisation: two round-robin sweeps, fewest pulls first.
        init_arm, init_count = -1, 2
        for i in range(K):
            n = view.pull_count(i)
            if n < init_count:
                init_arm, init_count = i, n
        if init_arm >= 0:
            return init_arm
        abar = self.current_alpha_bar(view)
        self.alpha_bar_history.append(abar)
        best, best_index = 0, -math.inf
        for i in range(K):
            n = view.pull_count(i)
            radius = math.sqrt(self._two_log / n) + 2.0 * n ** -min(abar, 0.5)
            index = mu_hat(view.arrived_sum(i), n) + radius
            if index > best_index:
                best, best_index = i, index
        return best


def ducb_index(windowed_total: float, windowed_count: int, tau_m: float, t: int) -> float:
    """Threshold-window index: de-censored mean plus its deviation term."""
    scale = tau_m * windowed_count
    return windowed_total / scale + math.sqrt(2.0 * math.log(t) / scale)


class DUcb(Policy):
    """Delay-thresholded UCB baseline.

    Waits ``m`` rounds before counting any pull's feedback, de-biases the
    windowed mean by the supplied delay CDF evaluated at ``m``, and plays
    round-robin until round ``m + K``. The CDF is a modelling input, not
    ground truth: handing it a wrong one is exactly the failure mode worth
    studying.
    """

    def __init__(self, m: int, cdf: DelayLaw):
        if m < 1 or int(m) != m:
            raise ValueError(f"threshold m must be a positive integer, got {m}")
        self.m = int(m)
        self.cdf = cdf
        self.tau_m = float(cdf.cdf(self.m))
        if self.tau_m <= 0.0:
            raise ValueError(
                f"assumed delay CDF is 0 at the threshold m={m}; the index is undefined"
            )
        self.label = f"ducb(m={m})"

    def reset(self, n_arms: int, horizon: int) -> None:
        self._K = n_arms

    def select(self, view: ObservationView, rng) -> int:
        t = view.t
        K = view.n_arms
        if t < self.m + K:
            return t % K
        best, best_index = 0, -math.inf
        for i in range(K):
            w = view.windowed(i, self.m)
            index = math.inf if w.count == 0 else ducb_index(w.total, w.count, self.tau_m, t)
            if index > best_index:
                best, best_index = i, index
        return best


class VanillaUcb(Policy):
    """Classical UCB, blind to delays: arrived mean plus deviation term only."""

    label = "ucb"

    def __init__(self, delta: Optional[float] = None):
        self.delta = delta

    def reset(self, n_arms: int, horizon: int) -> None:
        delta = self.delta if self.delta is not None else 1.0 / (n_arms * horizon**3)
        n = np.arange(1, horizon + 1, dtype=np.float64)
        self._radius_table = np.sqrt(2.0 * math.log(2.0 / delta) / n)

    def select(self, view: ObservationView, rng) -> int:
        K = view.n_arms
        for i in range(K):
            if view.pull_count(i) == 0:
                return i
        best, best_index = 0, -math.inf
        for i in range(K):
            n = view.pull_count(i)
            index = mu_hat(view.arrived_sum(i), n) + self._radius_table[n - 1]
            if index > best_index:
                best, best_index = i, index
        return best


class UniformRandom(Policy):
    """Pulls a uniformly random arm every round; the no-learning floor."""

    label = "uniform"

    def reset(self, n_arms: int, horizon: int) -> None:
        pass

    def select(self, view: ObservationView, rng) -> int:
        return int(rng.integers(view.n_arms))


def make_policy(spec: Mapping) -> Policy:
    """Build a policy from a ``{"kind": tag, ...params}`` mapping."""
    kind = spec.get("kind")
    if kind == "patient":
        return PatientBandits(alpha=spec["alpha"], delta=spec.get("delta"))
    if kind == "adapt":
        return AdaptPatientBandits(
            c=float(spec["c"]),
            alpha_floor=float(spec["alpha_floor"]),
            mu_floor=float(spec["mu_floor"]),
            delta=spec.get("delta"),
        )
    if kind == "ducb":
        return DUcb(m=int(spec["m"]), cdf=delay_law_from_spec(spec["cdf"]))
    if kind == "ucb":
        return VanillaUcb(delta=spec.get("delta"))
    if kind == "uniform":
        return UniformRandom()
    raise ValueError(
        f"unknown policy kind {kind!r}; expected one of "
        "['patient', 'adapt', 'ducb', 'ucb', 'uniform']"
    )
