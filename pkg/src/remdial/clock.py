"""Injectable time: wall clock and a deterministic event-driven virtual clock.

The virtual clock is the backbone of the simulation harness: sleeping
advances virtual time and runs any events that fall due inside the slept
window, so polling loops keep their cadence while a pipeline stage blocks.
Ties break by scheduling order, which makes runs fully deterministic.
"""

from __future__ import annotations

import heapq
import time
from typing import Callable, Protocol


class DeadlockError(RuntimeError):
    """run_until exhausted its time bound without the predicate turning true."""


class Clock(Protocol):
    def now(self) -> float: ...
    def sleep(self, duration: float) -> None: ...


class WallClock:
    """Monotonic real time; origin at construction."""

    def __init__(self) -> None:
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0

    def sleep(self, duration: float) -> None:
        if duration > 0:
            time.sleep(duration)


class VirtualClock:
    """Discrete-event virtual time with a scheduling queue.

    ``sleep`` runs due events inline (callbacks may observe and mutate state
    mid-sleep, exactly like concurrent actors would), then lands on the
    target instant. Callbacks must not themselves sleep unboundedly; in this
    codebase only the host pipeline sleeps and scheduled callbacks are
    instantaneous.
    """

    def __init__(self, origin: float = 0.0) -> None:
        self._now = origin
        self._seq = 0
        self._queue: list[tuple[float, int, Callable[[], None]]] = []
        self._cancelled: set[int] = set()

    def now(self) -> float:
        return self._now

    def schedule(self, delay: float, fn: Callable[[], None]) -> int:
        return self.schedule_at(self._now + max(0.0, delay), fn)

    def schedule_at(self, at: float, fn: Callable[[], None]) -> int:
        if at < self._now:
            raise ValueError(f"cannot schedule at {at} before now {self._now}")
        self._seq += 1
        heapq.heappush(self._queue, (at, self._seq, fn))
        return self._seq

    def cancel(self, handle: int) -> None:
        self._cancelled.add(handle)

    def _pop_due(self, limit: float) -> Callable[[], None] | None:
        while self._queue and self._queue[0][0] <= limit:
            at, seq, fn = heapq.heappop(self._queue)
            if seq in self._cancelled:
                self._cancelled.discard(seq)
                continue
            self._now = max(self._now, at)
            return fn
        return None

    def sleep(self, duration: float) -> None:
        target = self._now + max(0.0, duration)
        while True:
            fn = self._pop_due(target)
            if fn is None:
                break
            fn()
        self._now = target

    def step(self) -> bool:
        """Run the single earliest event; False when the queue is empty."""
        fn = self._pop_due(float("inf"))
        if fn is None:
            return False
        fn()
        return True

    def run_until(self, predicate: Callable[[], bool], *, deadline: float) -> None:
        """Step events until ``predicate`` holds; raise past ``deadline``."""
        while not predicate():
            if self._now > deadline:
                raise DeadlockError(f"virtual time {self._now:.3f}s exceeded bound {deadline:.3f}s")
            if not self._queue:
                raise DeadlockError(f"event queue drained at {self._now:.3f}s before condition held")
            if self._queue[0][0] > deadline:
                raise DeadlockError(
                    f"next event at {self._queue[0][0]:.3f}s lies beyond bound {deadline:.3f}s"
                )
            self.step()
