"""Root tick loop."""

import time
from collections import Counter
from dataclasses import dataclass, field

from .clock import make_clock
from .errors import ConfigError, HaltTimeout
from .status import RUNNING, NodeStatus


@dataclass
class RunConfig:
    tick_hz: float = 10.0
    halt_timeout_ms: float = 1000.0
    max_ticks: int = None
    clock: object = "simulated"
    loop: bool = False

    def __post_init__(self):
        if not self.tick_hz > 0:
            raise ConfigError(f"tick rate must be positive, got {self.tick_hz}")
        if not self.halt_timeout_ms > 0:
            raise ConfigError(f"halt timeout must be positive, got {self.halt_timeout_ms}")
        if self.max_ticks is not None and self.max_ticks < 1:
            raise ConfigError(f"max ticks must be >= 1, got {self.max_ticks}")

    @property
    def period(self) -> float:
        return 1.0 / self.tick_hz


@dataclass
class RunReport:
    final_status: NodeStatus
    ticks: int
    wall_seconds: float
    sim_seconds: float
    tick_counts: dict = field(default_factory=dict)
    unhealthy: list = field(default_factory=list)
    deadline_misses: int = 0
    statuses: list = field(default_factory=list)

    def format(self) -> str:
        lines = [
            f"final_status: {self.final_status}",
            f"ticks: {self.ticks}",
            f"clock_seconds: {self.sim_seconds:.3f}",
            f"deadline_misses: {self.deadline_misses}",
            f"unhealthy: {len(self.unhealthy)}",
        ]
        lines += [f"unhealthy.{i}: {reason}" for i, reason in enumerate(self.unhealthy)]
        lines += [f"ticks.{path}: {count}" for path, count in sorted(self.tick_counts.items())]
        return "\n".join(lines) + "\n"


def step(tree) -> NodeStatus:
    """One full root tick; trace events are flushed before returning."""
    try:
        return tree.tick_root()
    finally:
        tree.ctx.sink.flush()


def emit(sink, event):
    """Append an already-built event, preserving emission order."""
    return sink.emit(event.path, event.kind, event.status)


def run(tree, cfg: RunConfig = None, before_tick=None) -> RunReport:
    """Tick ``tree`` at ``cfg.tick_hz`` until it finishes or hits the cap.

    ``before_tick(tick_no)`` is called ahead of every root tick (used for
    scenario fault injection). If the loop ends with work still running,
    the whole tree is halted before returning.
    """
    cfg = cfg or RunConfig()
    ctx = tree.ctx
    if isinstance(cfg.clock, str):
        if getattr(ctx.clock, "simulated", True) != (cfg.clock in ("sim", "simulated")):
            ctx.clock = make_clock(cfg.clock)
    else:
        ctx.clock = cfg.clock
    ctx.halt_timeout = cfg.halt_timeout_ms / 1000.0
    clock = ctx.clock
    period = cfg.period
    start_wall = time.monotonic()
    start_clock = clock.now()
    statuses = []
    misses = 0
    status = tree.root.status()
    ticks = 0
    next_deadline = time.monotonic()
    try:
        while cfg.max_ticks is None or ticks < cfg.max_ticks:
            if ticks:
                if clock.simulated:
                    clock.advance(period)
                else:
                    remaining = next_deadline - time.monotonic()
                    if remaining > 0:
                        time.sleep(remaining)
                    else:
                        misses += 1
            next_deadline = time.monotonic() + period
            if before_tick is not None:
                before_tick(ctx.tick_no + 1)
            status = step(tree)
            ticks += 1
            statuses.append(status)
            if status is not RUNNING and not cfg.loop:
                break
    finally:
        if tree.running_nodes():
            try:
                tree.halt()
            except HaltTimeout:
                pass
            ctx.sink.flush()
    return RunReport(
        final_status=status,
        ticks=ticks,
        wall_seconds=time.monotonic() - start_wall,
        sim_seconds=clock.now() - start_clock,
        tick_counts=dict(Counter({n.path: n.tick_count for n in tree.nodes})),
        unhealthy=list(ctx.unhealthy),
        deadline_misses=misses,
        statuses=statuses,
    )
