"""Node contract, tick context and the instantiated tree."""

from dataclasses import dataclass, field

from . import trace as tr
from .blackboard import PortBinding, Scope, resolve_input, resolve_output
from .clock import SimClock
from .errors import EngineError, HaltTimeout, PortResolutionError
from .status import FAILURE, IDLE, RUNNING, SUCCESS, NodeStatus

DEFAULT_HALT_TIMEOUT = 1.0


@dataclass
class TickContext:
    sink: tr.TraceSink = field(default_factory=tr.TraceSink)
    clock: object = field(default_factory=SimClock)
    tick_no: int = 0
    halt_timeout: float = DEFAULT_HALT_TIMEOUT
    unhealthy: list = field(default_factory=list)

    def emit(self, path, kind, status=""):
        return self.sink.emit(path, kind, status)

    def flag_unhealthy(self, path, reason):
        self.unhealthy.append(f"{path}: {reason}")


class Node:
    """Base of every tree node.

    Subclasses implement ``_tick`` (and ``_halt`` when they hold running
    work). The public :meth:`tick` / :meth:`halt` wrappers keep the status,
    trace and episode bookkeeping uniform.
    """

    kind = "node"
    ports = ()

    def __init__(self, name="", children=()):
        self.name = name or type(self).__name__
        self.children = list(children)
        self.uid = -1
        self.path = self.name
        self.scope = None
        self.bindings = {}
        self.tick_count = 0
        self.ctx = None
        self._status = IDLE

    def __repr__(self):
        return f"<{type(self).__name__} {self.path} {self._status}>"

    def status(self) -> NodeStatus:
        return self._status

    def tick(self, ctx: TickContext) -> NodeStatus:
        if self._status.is_terminal:
            # the previous result was delivered; this tick opens a new episode
            self.reset(ctx, silent=True)
        self.ctx = ctx
        event = ctx.emit(self.path, tr.TICK)
        self.tick_count += 1
        status = self._tick(ctx)
        if not isinstance(status, NodeStatus) or status is IDLE:
            raise EngineError(f"{self.path} returned {status!r} from tick")
        event.status = str(status)
        self._status = status
        return status

    def _tick(self, ctx) -> NodeStatus:
        raise NotImplementedError

    def halt(self, ctx: TickContext):
        """Abort running work in this subtree and return it to Idle.

        Halting a node that is not Running only clears its state.
        """
        if self._status is not RUNNING:
            self.reset(ctx, silent=True)
            return
        timeouts = []
        try:
            self._halt(ctx)
        except HaltTimeout as exc:
            timeouts.append(exc)
        for child in self.children:
            child.reset(ctx, silent=True)
        self._clear()
        self._status = IDLE
        ctx.emit(self.path, tr.HALT, IDLE)
        if timeouts:
            raise timeouts[0]

    def _halt(self, ctx):
        self.halt_children(ctx)

    def halt_children(self, ctx, start=0):
        """Halt the Running children from index ``start`` on, right to left.

        Each child halts its own subtree before reporting, so HALT events come
        out deepest-first.
        """
        first_timeout = None
        for child in reversed(self.children[start:]):
            if child.status() is not RUNNING:
                continue
            try:
                child.halt(ctx)
            except HaltTimeout as exc:
                ctx.flag_unhealthy(child.path, str(exc))
                first_timeout = first_timeout or exc
        if first_timeout is not None:
            ctx.sink.emit(self.path, tr.STATUS_CHANGE, f"HaltTimeout:{first_timeout.path}")

    def reset(self, ctx=None, silent=False):
        """Consume a delivered status: clear state and go back to Idle."""
        for child in self.children:
            if child._status is RUNNING and ctx is not None:
                child.halt(ctx)
            else:
                child.reset(ctx, silent=True)
        self._clear()
        if self._status is not IDLE:
            self._status = IDLE
            if not silent and ctx is not None:
                ctx.emit(self.path, tr.STATUS_CHANGE, IDLE)

    def consume_children(self, ctx):
        for child in self.children:
            child.reset(ctx, silent=not child._status.is_terminal)

    def _clear(self):
        """Drop per-episode memory; overridden by stateful nodes."""

    # state capture used by exhaustive checkers; only for nodes without live workers
    def memory(self):
        return ()

    def restore_memory(self, memory):
        pass

    # ports ---------------------------------------------------------------
    def port_spec(self, name):
        for spec in self.ports:
            if spec.name == name:
                return spec
        raise PortResolutionError(f"{self.path} has no port {name!r}")

    def get_input(self, name):
        spec = self.port_spec(name)
        return resolve_input(spec, self.bindings.get(name), self.scope)

    def set_output(self, name, value):
        spec = self.port_spec(name)
        resolve_output(spec, self.bindings.get(name), self.scope)(value, writer=self.path)

    def bind(self, **attributes):
        """Bind ports from attribute strings (``"{key}"`` or a literal)."""
        for name, text in attributes.items():
            self.bindings[name] = PortBinding.from_attribute(self.port_spec(name), text)
        return self


class Tree:
    """An instantiated tree: nodes numbered depth-first, plus its context."""

    def __init__(self, root: Node, scope: Scope = None, ctx: TickContext = None):
        self.root = root
        self.ctx = ctx or TickContext()
        self.scope = scope or Scope()
        if self.scope.on_write is None:
            self._install_write_hook(self.scope)
        self.nodes = []
        self._number(root, "root", None)
        self.by_path = {n.path: n for n in self.nodes}

    def _install_write_hook(self, scope):
        def on_write(writer, scope_path, key, value):
            self.ctx.sink.emit(writer or scope_path, tr.BB_WRITE, f"{scope_path}:{key}={value}")

        for s in scope.walk():
            s.on_write = on_write

    def _number(self, node, prefix, parent):
        if node.uid != -1:
            raise EngineError(f"node {node!r} appears twice in the tree")
        node.uid = len(self.nodes)
        node.path = f"{prefix}/{node.name}"
        if node.scope is None:
            node.scope = parent.scope if parent is not None else self.scope
        self.nodes.append(node)
        seen = set()
        for index, child in enumerate(node.children):
            segment = child.name
            if segment in seen:
                segment = f"{segment}.{index}"
            seen.add(segment)
            child.name = segment
            self._number(child, node.path, node)

    @property
    def clock(self):
        return self.ctx.clock

    def tick_root(self) -> NodeStatus:
        ctx = self.ctx
        ctx.tick_no += 1
        ctx.sink.tick = ctx.tick_no
        if self.root.status().is_terminal:
            self.root.reset(ctx, silent=False)
        return self.root.tick(ctx)

    def halt(self):
        """Halt the whole tree; raises the first HaltTimeout after finishing."""
        before = len(self.ctx.unhealthy)
        try:
            self.root.halt(self.ctx)
        except HaltTimeout as exc:
            self.ctx.flag_unhealthy(exc.path, str(exc))
            raise
        if len(self.ctx.unhealthy) > before:
            raise HaltTimeout(self.root.path, self.ctx.halt_timeout)

    def running_nodes(self):
        return [n for n in self.nodes if n.status() is RUNNING]

    def snapshot(self):
        nodes = tuple((n._status, n.memory()) for n in self.nodes)
        scopes = tuple(tuple(sorted(s.entries.items(), key=lambda kv: kv[0])) for s in self.scope.walk())
        return nodes, scopes

    def restore(self, snap):
        nodes, scopes = snap
        for node, (status, memory) in zip(self.nodes, nodes):
            node._status = status
            node.restore_memory(memory)
        for scope, entries in zip(self.scope.walk(), scopes):
            scope.entries = dict(entries)


def walk(node):
    yield node
    for child in node.children:
        yield from walk(child)


__all__ = [
    "Node",
    "Tree",
    "TickContext",
    "walk",
    "SUCCESS",
    "FAILURE",
    "RUNNING",
    "IDLE",
]
