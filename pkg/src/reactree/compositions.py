"""Control-flow nodes: reactive and memory compositions, and decorators."""

from .core import Node
from .errors import ConfigError
from .status import FAILURE, IDLE, RUNNING, SUCCESS


class Composition(Node):
    kind = "composition"

    def __init__(self, children, name=""):
        super().__init__(name, children)
        if not self.children:
            raise ConfigError(f"{type(self).__name__} needs at least one child")


class _Reactive(Composition):
    """Re-ticks every child from the left on each tick.

    ``continue_on`` is the status that moves on to the next child; any
    other child status is returned immediately after halting whatever is
    still running further right.
    """

    continue_on = None

    def _tick(self, ctx):
        for i, child in enumerate(self.children):
            status = child.tick(ctx)
            if status is not self.continue_on:
                self.halt_children(ctx, i + 1)
                if status is not RUNNING:
                    self.consume_children(ctx)
                return status
        self.consume_children(ctx)
        return self.continue_on


class Sequence(_Reactive):
    continue_on = SUCCESS


class Fallback(_Reactive):
    continue_on = FAILURE


class _Memory(Composition):
    """Ticks only the current child, advancing past children that finished
    with ``continue_on`` in the same tick call."""

    continue_on = None

    def __init__(self, children, name=""):
        super().__init__(children, name)
        self.index = 0

    def _tick(self, ctx):
        last = len(self.children) - 1
        while True:
            status = self.children[self.index].tick(ctx)
            if status is RUNNING:
                return RUNNING
            if status is self.continue_on and self.index < last:
                self.index += 1
                continue
            self.index = 0
            self.consume_children(ctx)
            return status

    def _clear(self):
        self.index = 0

    def memory(self):
        return (self.index,)

    def restore_memory(self, memory):
        (self.index,) = memory


class SequenceMemory(_Memory):
    continue_on = SUCCESS


class FallbackMemory(_Memory):
    continue_on = FAILURE


def check_threshold(success_threshold, n_children):
    if not 1 <= success_threshold <= n_children:
        raise ConfigError(
            f"parallel success threshold {success_threshold} outside [1, {n_children}]"
        )


def parallel_outcome(statuses, success_threshold):
    """Success once ``success_threshold`` children succeeded (tested first),
    Failure once more than N - M failed, Running otherwise."""
    n = len(statuses)
    successes = sum(1 for s in statuses if s is SUCCESS)
    failures = sum(1 for s in statuses if s is FAILURE)
    if successes >= success_threshold:
        return SUCCESS
    if failures > n - success_threshold:
        return FAILURE
    return RUNNING


class Parallel(Composition):
    def __init__(self, children, success_threshold, name=""):
        super().__init__(children, name)
        check_threshold(success_threshold, len(self.children))
        self.success_threshold = success_threshold

    def _tick(self, ctx):
        statuses = [child.tick(ctx) for child in self.children]
        result = parallel_outcome(statuses, self.success_threshold)
        if result is not RUNNING:
            self.halt_children(ctx)
            self.consume_children(ctx)
        return result


class ParallelMemory(Composition):
    def __init__(self, children, success_threshold, name=""):
        super().__init__(children, name)
        check_threshold(success_threshold, len(self.children))
        self.success_threshold = success_threshold
        self._clear()

    def _tick(self, ctx):
        for i, child in enumerate(self.children):
            if self.done[i]:
                continue
            self.recorded[i] = child.tick(ctx)
            if self.recorded[i] is not RUNNING:
                self.done[i] = True
        # recorded statuses of finished children keep counting across ticks
        result = parallel_outcome(self.recorded, self.success_threshold)
        if result is not RUNNING:
            self.halt_children(ctx)
            self.consume_children(ctx)
            self._clear()
        return result

    def _clear(self):
        n = len(self.children)
        self.done = [False] * n
        self.recorded = [IDLE] * n

    def memory(self):
        return tuple(self.done), tuple(self.recorded)

    def restore_memory(self, memory):
        done, recorded = memory
        self.done, self.recorded = list(done), list(recorded)


class Decorator(Node):
    kind = "decorator"

    def __init__(self, child, name=""):
        super().__init__(name, [child])

    @property
    def child(self):
        return self.children[0]


class Inverter(Decorator):
    def _tick(self, ctx):
        status = self.child.tick(ctx)
        if status is RUNNING:
            return RUNNING
        self.consume_children(ctx)
        return status.swapped()


class Retry(Decorator):
    """Re-ticks a failed child on later ticks, reporting Running meanwhile."""

    def __init__(self, child, max_attempts, name=""):
        super().__init__(child, name)
        if max_attempts < 1:
            raise ConfigError(f"Retry needs max_attempts >= 1, got {max_attempts}")
        self.max_attempts = max_attempts
        self.attempts = 0

    def _tick(self, ctx):
        status = self.child.tick(ctx)
        if status is RUNNING:
            return RUNNING
        if status is FAILURE:
            self.attempts += 1
            if self.attempts < self.max_attempts:
                return RUNNING
        self.attempts = 0
        self.consume_children(ctx)
        return status

    def _clear(self):
        self.attempts = 0

    def memory(self):
        return (self.attempts,)

    def restore_memory(self, memory):
        (self.attempts,) = memory


class Timeout(Decorator):
    """Passes the child's status through until ``msec`` of clock time has
    elapsed since the episode's first tick, then halts it and fails."""

    def __init__(self, child, msec, name=""):
        super().__init__(child, name)
        if not msec > 0:
            raise ConfigError(f"Timeout needs a positive duration, got {msec}")
        self.msec = msec
        self.started = None

    def _tick(self, ctx):
        now = ctx.clock.now()
        if self.started is None:
            self.started = now
        elif (now - self.started) * 1000.0 > self.msec + 1e-6:
            self.halt_children(ctx)
            self.consume_children(ctx)
            self.started = None
            return FAILURE
        status = self.child.tick(ctx)
        if status is not RUNNING:
            self.started = None
            self.consume_children(ctx)
        return status

    def _clear(self):
        self.started = None

    def memory(self):
        return (self.started,)

    def restore_memory(self, memory):
        (self.started,) = memory
