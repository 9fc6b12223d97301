"""Condition nodes and the three action execution models.

* :class:`SyncAction` runs up to ``budget`` steps of work inside each tick.
* :class:`AsyncAction` starts its work on a worker thread at the first tick;
  later ticks only read the synchronized status cell.
* :class:`CoroAction` runs a generator body on the traversal; each ``yield``
  is a checkpoint where the action reports Running and hands control back.
  Halting while suspended closes the generator, so ``finally`` blocks (or an
  ``except GeneratorExit`` handler) act as the cleanup routine.
"""

import inspect
import threading

from . import trace as tr
from .core import Node
from .errors import EngineError, HaltTimeout, KeyNotFound, PredicateError
from .status import FAILURE, IDLE, RUNNING, SUCCESS, as_status


class LeafNode(Node):
    kind = "action"

    def __init__(self, name="", ports=None):
        super().__init__(name)
        if ports is not None:
            self.ports = tuple(ports)

    def annotate(self, ctx, reason):
        ctx.emit(self.path, tr.STATUS_CHANGE, f"Failure:{reason}")


class Condition(LeafNode):
    kind = "condition"

    def __init__(self, name="", predicate=None, ports=None):
        super().__init__(name, ports)
        self._predicate = predicate

    def check(self) -> bool:
        return self._predicate(self)

    def _tick(self, ctx):
        try:
            ok = self.check()
        except (PredicateError, KeyNotFound) as exc:
            raise PredicateError(f"{self.path}: {exc}") from exc
        except EngineError:
            raise
        except Exception as exc:
            raise PredicateError(f"{self.path}: {exc!r}") from exc
        return SUCCESS if ok else FAILURE


class SyncAction(LeafNode):
    def __init__(self, name="", step=None, on_halt=None, budget=1, ports=None):
        super().__init__(name, ports)
        if budget < 1:
            raise ValueError("step budget must be >= 1")
        self.budget = budget
        self._step = step
        self._on_halt = on_halt

    def step(self):
        """One piece of work; return RUNNING to continue, else the outcome."""
        return self._step(self)

    def on_halt(self):
        if self._on_halt is not None:
            self._on_halt(self)

    def _tick(self, ctx):
        for _ in range(self.budget):
            try:
                result = self.step()
            except EngineError:
                raise
            except Exception as exc:
                self.annotate(ctx, f"step error {exc!r}")
                return FAILURE
            if result is not RUNNING:
                return as_status(result)
        return RUNNING

    def _halt(self, ctx):
        self.on_halt()


_ALLOWED = {
    IDLE: {RUNNING},
    RUNNING: {SUCCESS, FAILURE, IDLE},
    SUCCESS: {IDLE},
    FAILURE: {IDLE},
}


class ActionHandle:
    """Status cell, halt signal and worker token of one async episode."""

    def __init__(self, clock):
        self.clock = clock
        self.halt_signal = threading.Event()
        self.worker = None
        self.attachment = None
        self.error = None
        self.abandoned = False
        self._status = IDLE
        self._lock = threading.Lock()

    @property
    def status(self):
        with self._lock:
            return self._status

    def _move(self, new):
        if new not in _ALLOWED[self._status]:
            raise EngineError(f"illegal action status transition {self._status} -> {new}")
        self._status = new

    def set_status(self, new):
        with self._lock:
            self._move(new)

    def finish(self, result):
        # a result arriving after halt was requested is dropped
        with self._lock:
            if not self.halt_signal.is_set() and self._status is RUNNING:
                self._move(result)

    @property
    def halted(self) -> bool:
        return self.halt_signal.is_set()

    def sleep(self, seconds) -> bool:
        """Sleep on the tree clock; False means a halt interrupted the wait."""
        return self.clock.sleep(seconds, cancel=self.halt_signal)


class AsyncAction(LeafNode):
    def __init__(self, name="", work=None, abort=None, ports=None):
        super().__init__(name, ports)
        self._work = work
        self._abort = abort
        self.handle = None
        self.abort_count = 0

    def work(self, handle):
        """Body executed on the worker thread; return the outcome."""
        return self._work(self, handle)

    def abort(self):
        """Safe abort routine, run on the traversal when halted mid-work."""
        if self._abort is not None:
            self._abort(self)

    def _run(self, handle):
        try:
            result = as_status(self.work(handle))
            if result is RUNNING or result is IDLE:
                raise EngineError(f"async work returned {result}")
        except Exception as exc:
            handle.error = exc
            result = FAILURE
        try:
            handle.finish(result)
        finally:
            handle.attachment.release()

    def _tick(self, ctx):
        handle = self.handle
        if handle is None or handle.status is IDLE:
            handle = self.handle = ActionHandle(ctx.clock)
            handle.set_status(RUNNING)
            handle.attachment = ctx.clock.attach()
            handle.worker = threading.Thread(
                target=self._run, args=(handle,), name=f"action:{self.path}", daemon=True
            )
            handle.worker.start()
            return RUNNING
        status = handle.status
        if status is RUNNING:
            return RUNNING
        handle.worker.join()
        if handle.error is not None:
            self.annotate(ctx, f"worker error {handle.error!r}")
        return status

    def _halt(self, ctx):
        handle = self.handle
        if handle is None:
            return
        with handle._lock:
            was_running = handle._status is RUNNING
            handle.halt_signal.set()
        ctx.clock.wake()
        if was_running:
            self.abort_count += 1
            self.abort()
        handle.worker.join(ctx.halt_timeout)
        if handle.worker.is_alive():
            handle.abandoned = True
            handle.attachment.release()
            with handle._lock:
                handle._status = IDLE
            self.handle = None
            raise HaltTimeout(self.path, ctx.halt_timeout)
        with handle._lock:
            handle._status = IDLE
        self.handle = None

    def _clear(self):
        handle = self.handle
        if handle is not None and handle.status in (SUCCESS, FAILURE):
            handle.set_status(IDLE)
            self.handle = None


class CoroAction(LeafNode):
    def __init__(self, name="", body=None, ports=None):
        super().__init__(name, ports)
        self._body = body
        self._gen = None
        self.checkpoint = None

    def body(self):
        """Generator (or plain function) implementing the action."""
        return self._body(self)

    def _tick(self, ctx):
        if self._gen is None:
            try:
                result = self.body()
            except EngineError:
                raise
            except Exception as exc:
                self.annotate(ctx, f"body error {exc!r}")
                return FAILURE
            if not inspect.isgenerator(result):
                return as_status(result)
            self._gen = result
        try:
            self.checkpoint = next(self._gen)
        except StopIteration as stop:
            self._gen = None
            return as_status(stop.value)
        except EngineError:
            self._gen = None
            raise
        except Exception as exc:
            self._gen = None
            self.annotate(ctx, f"body error {exc!r}")
            return FAILURE
        return RUNNING

    def _halt(self, ctx):
        gen, self._gen = self._gen, None
        if gen is not None:
            gen.close()

    def _clear(self):
        if self._gen is not None:
            self._gen.close()
            self._gen = None
        self.checkpoint = None
