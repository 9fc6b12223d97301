"""Clocks shared by the traversal and background workers.

``SimClock`` only moves when :meth:`SimClock.advance` is called. Worker
threads register with :meth:`attach`; ``advance`` returns only after every
attached worker that became due has either finished or gone back to sleep,
which makes runs with background work reproducible.
"""

import threading
import time


class _Attachment:
    def __init__(self, clock):
        self._clock = clock
        self._released = False

    def release(self):
        # idempotent: both the worker and an abandoning halt may call it
        with self._clock._cond:
            if self._released:
                return
            self._released = True
            self._clock._active -= 1
            self._clock._cond.notify_all()


class SimClock:
    simulated = True

    def __init__(self, start=0.0, settle_timeout=5.0):
        self._now = float(start)
        self._cond = threading.Condition()
        self._active = 0
        self._sleepers = {}
        self.settle_timeout = settle_timeout

    def now(self) -> float:
        with self._cond:
            return self._now

    def attach(self) -> _Attachment:
        with self._cond:
            self._active += 1
        return _Attachment(self)

    def sleep(self, seconds, cancel=None) -> bool:
        """Block until simulated time moves ``seconds`` ahead.

        Returns False if ``cancel`` was set first.
        """
        token = object()
        with self._cond:
            wake_at = self._now + seconds
            self._sleepers[token] = wake_at
            self._active -= 1
            self._cond.notify_all()
            try:
                while token in self._sleepers:
                    if cancel is not None and cancel.is_set():
                        del self._sleepers[token]
                        self._active += 1
                        return False
                    self._cond.wait()
            except BaseException:
                if self._sleepers.pop(token, None) is not None:
                    self._active += 1
                raise
        return True

    def advance(self, seconds):
        with self._cond:
            self._now += seconds
            due = [t for t, at in self._sleepers.items() if at <= self._now + 1e-12]
            for token in due:
                del self._sleepers[token]
                # counted active on the sleeper's behalf so settle cannot miss it
                self._active += 1
            self._cond.notify_all()
            self._cond.wait_for(lambda: self._active <= 0, timeout=self.settle_timeout)

    def wake(self):
        """Re-check cancellation flags of sleeping workers."""
        with self._cond:
            self._cond.notify_all()


class RealClock:
    simulated = False

    def __init__(self):
        self._origin = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._origin

    def attach(self):
        return _NullAttachment()

    def sleep(self, seconds, cancel=None) -> bool:
        if cancel is None:
            time.sleep(seconds)
            return True
        return not cancel.wait(seconds)

    def advance(self, seconds):
        if seconds > 0:
            time.sleep(seconds)

    def wake(self):
        pass


class _NullAttachment:
    def release(self):
        pass


def make_clock(mode):
    if mode in ("sim", "simulated"):
        return SimClock()
    if mode == "real":
        return RealClock()
    raise ValueError(f"unknown clock mode {mode!r}")
