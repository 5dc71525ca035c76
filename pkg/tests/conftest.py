"""Shared test helpers: canned observation views and scripted instances."""
from __future__ import annotations

from patientbandits.environment import BanditInstance, WindowedSum


class FakeView:
    """Observation stub answering from fixed tables.

    ``windows`` maps (arm, wait) -> (count, total); unlisted queries return
    an empty non-flagged window.
    """

    def __init__(self, counts, sums, t, windows=None):
        self.counts = list(counts)
        self.sums = list(sums)
        self.t = t
        self.windows = dict(windows or {})
        self.queried_windows = []

    @property
    def n_arms(self):
        return len(self.counts)

    def pull_count(self, arm):
        return self.counts[arm]

    def arrived_sum(self, arm):
        return self.sums[arm]

    def windowed(self, arm, wait):
        self.queried_windows.append((arm, wait))
        if wait >= self.t:
            return WindowedSum(0, 0.0, True)
        count, total = self.windows.get((arm, wait), (0, 0.0))
        return WindowedSum(count, total, False)


class ScriptedInstance(BanditInstance):
    """Instance whose draws replay a fixed per-arm script of (reward, delay)."""

    def __init__(self, arms, horizon, script):
        super().__init__(arms, horizon)
        self._script = {arm: list(draws) for arm, draws in script.items()}

    def draw(self, arm, rng):
        rng.random()
        rng.random()
        return self._script[arm].pop(0)
