"""Exercise clock: compressed, pausable scenario time shared by all clients."""
from __future__ import annotations

import time
from typing import Callable


class ExerciseClock:
    """Maps wall time onto scenario seconds at a fixed compression ratio
    (scenario seconds per wall second). Scenario time is monotone
    non-decreasing while unpaused and frozen while paused."""

    def __init__(
        self,
        compression: float = 1.0,
        start_scenario_time: float = 0.0,
        time_fn: Callable[[], float] = time.monotonic,
    ):
        if compression <= 0:
            raise ValueError("compression must be > 0")
        self.compression = float(compression)
        self._time_fn = time_fn
        self._scenario_base = float(start_scenario_time)
        self._wall_anchor: float | None = None
        self.paused = False
        self.started = False

    def start(self) -> None:
        if not self.started:
            self.started = True
            self._wall_anchor = self._time_fn()

    @property
    def scenario_now(self) -> float:
        if not self.started or self.paused:
            return self._scenario_base
        return self._scenario_base + (self._time_fn() - self._wall_anchor) * self.compression

    def pause(self) -> None:
        if not self.paused:
            self._scenario_base = self.scenario_now
            self.paused = True

    def resume(self) -> None:
        if self.paused:
            self.paused = False
            self._wall_anchor = self._time_fn()

    def wall_seconds_until(self, scenario_t: float) -> float:
        """Wall seconds to sleep before scenario_t arrives; inf while paused."""
        if self.paused or not self.started:
            return float("inf")
        remaining = scenario_t - self.scenario_now
        return max(0.0, remaining / self.compression)

    def to_dict(self) -> dict:
        return {
            "scenario_time": self.scenario_now,
            "compression": self.compression,
            "paused": self.paused,
        }
