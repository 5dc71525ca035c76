"""Statistical machinery: censored means, confidence radii, tail-index estimates.

All logarithms are natural. The confidence radius on an arm pulled ``n``
times is::

    sqrt(2 * log(2 / delta) / n)  +  2 * n ** -(min(alpha, 0.5))

The first term is the usual sampling deviation; the second compensates for
conversions that have not arrived yet, assuming delay tails decay at least
as fast as ``m ** -alpha``. The default confidence level is
``delta = 1 / (K * T**3)``, which folds the union bound over arms, rounds
and sample sizes into the radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .distributions import DelayLaw


class UndefinedEstimatorError(ValueError):
    """Mean estimate requested for an arm with zero pulls."""


class InsufficientDataError(ValueError):
    """Tail-index estimate requested before the leader has two pulls."""


AlphaInput = Union[float, Callable[[int], float]]


def log_log_schedule(t: int) -> float:
    """Round-dependent tail-index input ``log(log t) / log t``.

    Lets the index-aware policy run without a tail bound at the price of a
    constant factor, asymptotically. Clamped below so early rounds (where
    ``log log t`` is negative or undefined) still produce a positive value.
    """
    log_t = math.log(t)
    return max(math.log(log_t) if log_t > 0 else 0.0, 1e-6) / log_t


@dataclass(frozen=True)
class UcbParams:
    """Inputs of the delay-corrected confidence radius.

    ``alpha`` may be a positive float or a per-round schedule
    ``t -> alpha_t`` (e.g. :func:`log_log_schedule`). ``delta`` defaults to
    ``1 / (K * T**3)``.
    """

    alpha: AlphaInput
    K: int
    T: int
    delta: Optional[float] = None

    def __post_init__(self):
        if self.K < 1 or self.T < 1:
            raise ValueError(f"need K >= 1 and T >= 1, got K={self.K}, T={self.T}")
        if not callable(self.alpha) and self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.delta is None:
            object.__setattr__(self, "delta", 1.0 / (self.K * self.T**3))
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")

    def alpha_at(self, round_: Optional[int] = None) -> float:
        if callable(self.alpha):
            if round_ is None:
                raise ValueError("alpha is a schedule; the current round is required")
            return self.alpha(round_)
        return self.alpha


@dataclass(frozen=True)
class AdaptParams:
    """Global tail-shape knowledge the self-tuning policy is allowed to use.

    ``c`` lower-bounds the tail relative to ``m ** -alpha``, ``alpha_floor``
    lower-bounds the unknown index, and ``mu_floor`` lower-bounds every
    arm mean.
    """

    c: float
    alpha_floor: float
    mu_floor: float
    K: int
    T: int

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise ValueError(f"c must be in (0, 1], got {self.c}")
        if self.alpha_floor <= 0.0:
            raise ValueError(f"alpha_floor must be positive, got {self.alpha_floor}")
        if self.mu_floor <= 0.0:
            raise ValueError(f"mu_floor must be positive, got {self.mu_floor}")
        if self.K < 1 or self.T < 1:
            raise ValueError(f"need K >= 1 and T >= 1, got K={self.K}, T={self.T}")


def mu_hat(sum_arrived: float, pulls: int) -> float:
    """Arrived-reward mean: total arrived reward over total pulls.

    Biased low while conversions are still in flight; the radius's bias
    term is sized to cover exactly that.
    """
    if pulls < 1:
        raise UndefinedEstimatorError("mean estimator undefined with zero pulls")
    return sum_arrived / pulls


def confidence_radius(pulls: int, params: UcbParams, round_: Optional[int] = None) -> float:
    """Deviation plus delay-bias radius for an arm pulled ``pulls`` times."""
    if pulls < 1:
        raise UndefinedEstimatorError("confidence radius undefined with zero pulls")
    alpha = params.alpha_at(round_)
    dev = math.sqrt(2.0 * math.log(2.0 / params.delta) / pulls)
    return dev + 2.0 * pulls ** -min(alpha, 0.5)


class BiasBound(NamedTuple):
    exact: float
    bound: float


def bias_bound_oracle(
    pull_rounds: Sequence[int],
    t: int,
    law: DelayLaw,
    mu: float,
    alpha: Optional[float] = None,
) -> BiasBound:
    """Exact censoring bias of the arrived mean next to its closed-form bound.

    For pulls at the given rounds evaluated at round ``t``, the arrived
    mean under-shoots ``mu`` by ``(mu / n) * sum_s (1 - cdf(t - s))``. The
    claimed cover is ``2 * n ** -(min(alpha, 0.5))``. Both sides are
    returned so tests can assert the inequality directly. ``alpha``
    defaults to the law's own tail index when it has one.
    """
    rounds = np.asarray(pull_rounds, dtype=np.int64)
    if rounds.size == 0:
        raise ValueError("pull_rounds must be nonempty")
    if rounds.min() < 1 or rounds.max() > t:
        raise ValueError(f"pull rounds must lie in [1, {t}]")
    if alpha is None:
        alpha = getattr(law, "alpha", None)
        if alpha is None:
            raise ValueError("law has no tail index attribute; pass alpha explicitly")
    exact = mu * float(np.mean(law.tail(t - rounds)))
    bound = 2.0 * rounds.size ** -min(alpha, 0.5)
    return BiasBound(exact, bound)


def alpha_hat(diff: float, pulls_of_leader: int) -> float:
    """Tail-index estimate from a waited-mean difference on the leader arm.

    ``diff`` is the gap between the long-wait and short-wait sample means;
    under a polynomial tail it scales like ``pulls ** -alpha``, so its log
    against ``log(pulls)`` recovers the index, capped at 1/2 (beyond which
    the index stops mattering to the radius). A nonpositive ``diff`` means
    noise swamped the signal; the estimate returns its cap, matching the
    ``diff -> 0+`` limit, and the confidence correction discounts it.
    """
    if pulls_of_leader < 2:
        raise InsufficientDataError(
            f"need at least 2 pulls of the leader, got {pulls_of_leader}"
        )
    if diff <= 0.0:
        return 0.5
    return min(-math.log(diff) / math.log(pulls_of_leader), 0.5)


def alpha_bar(
    ahat: float, pulls_of_leader: int, params: AdaptParams, delta: float
) -> float:
    """High-probability lower confidence bound on the tail index.

    Shifts the point estimate down by the estimation-noise allowance and
    clips at zero; feeding the radius a too-small index is safe (more
    patience), a too-large one is not.
    """
    if pulls_of_leader < 2:
        raise InsufficientDataError(
            f"need at least 2 pulls of the leader, got {pulls_of_leader}"
        )
    b = math.sqrt(2.0 * math.log(2.0 / delta))
    correction = math.log(2.0**3.5 * b / (params.c * params.mu_floor)) / math.log(
        pulls_of_leader
    )
    return max(ahat - correction, 0.0)


def window_pair(pulls_of_leader: int, params: AdaptParams) -> tuple[int, int]:
    """Long and short waits (D, d) used to probe the leader's delay tail.

    D is half the leader's pull count; d shrinks it by the factor
    ``(c / 2) ** (1 / alpha_floor)`` that makes the waited-mean difference
    provably positive in expectation. Both are clamped to at least 1: a
    zero wait would only cover conversions that are never visible under
    the one-round observation lag.
    """
    if pulls_of_leader < 2:
        raise InsufficientDataError(
            f"need at least 2 pulls of the leader, got {pulls_of_leader}"
        )
    long_wait = pulls_of_leader // 2
    factor = (params.c / 2.0) ** (1.0 / params.alpha_floor)
    short_wait = max(1, math.floor(factor * long_wait))
    return long_wait, short_wait
