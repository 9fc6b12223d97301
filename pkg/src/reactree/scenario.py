"""The fetch scenario: in-process world, skill server and mission tree."""

import random
from dataclasses import dataclass
from importlib import resources

from . import treefile
from .blackboard import Pose
from .clock import make_clock
from .core import TickContext
from .registry import builtin_registry
from .runtime import RunConfig, run
from .skillwire.client import LoopbackConnection, SocketConnection, register_skill_leaves
from .skillwire.server import SkillServer
from .skillwire.world import SimWorld
from .status import SUCCESS
from .trace import TraceSink

AT_COUNTER = 0.1
OBJECT_AT_COUNTER = 0.3


def tree_path(name):
    """Path of a tree file shipped with the package."""
    return str(resources.files("reactree") / "trees" / name)


def make_world(seed=0):
    rng = random.Random(seed)
    obj = Pose(1.0 + rng.uniform(-0.3, 0.3), 0.5 + rng.uniform(-0.3, 0.3), 0.0)
    return SimWorld(object=obj)


@dataclass
class FetchOutcome:
    exit_code: int
    report: object
    world: SimWorld = None
    server: SkillServer = None
    dropped_at: int = None

    def format(self):
        text = self.report.format()
        if self.world is not None:
            text += "".join(f"world.{k}: {v}\n" for k, v in self.world.snapshot().items())
        if self.dropped_at is not None:
            text += f"dropped_at_tick: {self.dropped_at}\n"
        return text


def mission_done(world: SimWorld) -> bool:
    with world.lock:
        return (
            not world.holding
            and world.robot.distance_to(world.counter) <= AT_COUNTER
            and world.object.distance_to(world.counter) <= OBJECT_AT_COUNTER
        )


def simulate_fetch(tree=None, seed=0, fail_nav=False, drop_at=None, tick_hz=10.0, max_ticks=600,
                   trace=None, endpoint=None, clock="sim", halt_timeout_ms=1000.0):
    """Run the fetch mission to completion and judge the end state.

    ``drop_at=K`` makes the robot lose the object at the first tick >= K
    before which it has held the object for a whole tick, so the trace
    shows ObjectGrasped going from Success to Failure. With ``endpoint`` the skills are served by an
    external process and only the root status is judged.
    """
    sink = trace if isinstance(trace, TraceSink) else TraceSink(trace)
    ctx = TickContext(sink=sink, clock=make_clock(clock))
    world = server = None
    if endpoint:
        conn = SocketConnection.from_endpoint(endpoint)
    else:
        world = make_world(seed)
        world.nav_blocked = fail_nav
        server = SkillServer(world, clock=ctx.clock, step_period=1.0 / tick_hz)
        conn = LoopbackConnection(server)
    registry = register_skill_leaves(builtin_registry(), conn)
    bt = treefile.load(tree or tree_path("fetch_mission.xml"), registry, ctx=ctx)
    outcome = FetchOutcome(1, None, world, server)
    held_from = []

    def inject(tick_no):
        if drop_at is None or outcome.dropped_at is not None or world is None:
            return
        if not world.holding:
            held_from.clear()
        elif not held_from:
            held_from.append(tick_no)
        elif tick_no >= drop_at:
            world.drop()
            outcome.dropped_at = tick_no

    try:
        cfg = RunConfig(tick_hz=tick_hz, max_ticks=max_ticks, clock=ctx.clock, halt_timeout_ms=halt_timeout_ms)
        report = run(bt, cfg, before_tick=inject)
    finally:
        if server is not None:
            server.shutdown()
        conn.close()
        sink.close()
    outcome.report = report
    ok = report.final_status is SUCCESS and (world is None or mission_done(world))
    outcome.exit_code = 0 if ok else 1
    return outcome
