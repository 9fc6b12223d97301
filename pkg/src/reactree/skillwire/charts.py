"""State-chart skills acting on :class:`SimWorld`.

A chart step calls the active state's ``on_step(world, args, outputs, dt)``,
which returns an event name; ``"stay"`` keeps the state. Terminal states
carry an ``outcome`` (success, failure or aborted). Every non-terminal state
must accept ``stop``.
"""

from dataclasses import dataclass, field

from ..blackboard import Pose

STOP = "stop"
STAY = "stay"


@dataclass(frozen=True)
class ChartState:
    name: str
    on_step: object = None
    outcome: str = None
    may_stay: bool = False

    @property
    def terminal(self):
        return self.outcome is not None


@dataclass
class StateChart:
    name: str
    initial: str
    states: dict
    transitions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError(f"{self.name}: unknown initial state {self.initial!r}")
        for (src, event), dst in self.transitions.items():
            if src not in self.states or dst not in self.states:
                raise ValueError(f"{self.name}: transition {src} -{event}-> {dst} names an unknown state")

    def target(self, state, event):
        try:
            return self.transitions[(state, event)]
        except KeyError:
            raise ValueError(f"{self.name}: no transition from {state!r} on {event!r}") from None


def stop_bound(chart: StateChart) -> int:
    """Longest number of steps from a ``stop`` to a terminal state.

    Raises ValueError when some non-terminal state ignores ``stop`` or the
    stop path can loop.
    """
    def settle(state, seen):
        spec = chart.states[state]
        if spec.terminal:
            return 0
        if spec.may_stay or state in seen:
            raise ValueError(f"{chart.name}: stop path through {state!r} is unbounded")
        nexts = [dst for (src, ev), dst in chart.transitions.items() if src == state and ev != STOP]
        if not nexts:
            raise ValueError(f"{chart.name}: stop path dead-ends in {state!r}")
        return 1 + max(settle(n, seen | {state}) for n in nexts)

    worst = 0
    for name, spec in chart.states.items():
        if spec.terminal:
            continue
        if (name, STOP) not in chart.transitions:
            raise ValueError(f"{chart.name}: state {name!r} cannot be stopped")
        worst = max(worst, settle(chart.transitions[(name, STOP)], frozenset()))
    return worst


class ChartRun:
    """One episode of a chart. Callers serialize steps on ``world.lock``."""

    def __init__(self, chart: StateChart, world, args, dt):
        self.chart = chart
        self.world = world
        self.args = dict(args)
        self.dt = dt
        self.state = chart.initial
        self.outputs = {}
        self.visited = [chart.initial]

    @property
    def outcome(self):
        return self.chart.states[self.state].outcome

    def _enter(self, state):
        self.state = state
        self.visited.append(state)

    def step(self):
        if self.outcome is not None:
            return
        with self.world.lock:
            spec = self.chart.states[self.state]
            event = spec.on_step(self.world, self.args, self.outputs, self.dt)
            if event != STAY:
                self._enter(self.chart.target(self.state, event))
            self.world.check()

    def stop(self):
        if self.outcome is not None:
            return
        with self.world.lock:
            self._enter(self.chart.target(self.state, STOP))
            for _ in range(len(self.chart.states) + 1):
                if self.outcome is not None:
                    break
                spec = self.chart.states[self.state]
                self._enter(self.chart.target(self.state, spec.on_step(self.world, self.args, self.outputs, self.dt)))
                self.world.check()


def _terminal(name, outcome):
    return ChartState(name, outcome=outcome)


# GotoPose --------------------------------------------------------------

def _plan(world, args, outputs, dt):
    goal = Pose.parse(args["goal"])
    if world.nav_blocked or not world.in_bounds(goal):
        return "no_path"
    return "planned"


def _move(world, args, outputs, dt):
    return "arrived" if world.move_robot_towards(Pose.parse(args["goal"]), dt) else STAY


def _brake(world, args, outputs, dt):
    return "done"


GOTO_POSE = StateChart(
    "GotoPose",
    "planning",
    {
        "planning": ChartState("planning", _plan),
        "moving": ChartState("moving", _move, may_stay=True),
        "braking": ChartState("braking", _brake),
        "success": _terminal("success", "success"),
        "failure": _terminal("failure", "failure"),
        "aborted": _terminal("aborted", "aborted"),
    },
    {
        ("planning", "planned"): "moving",
        ("planning", "no_path"): "failure",
        ("planning", STOP): "aborted",
        ("moving", "arrived"): "success",
        ("moving", STOP): "braking",
        ("braking", "done"): "aborted",
        ("braking", STOP): "braking",
    },
)


# DetectObject ----------------------------------------------------------

def _detect(world, args, outputs, dt):
    outputs["pose"] = str(world.object)
    return "found"


DETECT_OBJECT = StateChart(
    "DetectObject",
    "detecting",
    {
        "detecting": ChartState("detecting", _detect),
        "success": _terminal("success", "success"),
        "aborted": _terminal("aborted", "aborted"),
    },
    {("detecting", "found"): "success", ("detecting", STOP): "aborted"},
)


# Fetch: pre-grasp, then close the hand --------------------------------

def _pregrasp(world, args, outputs, dt):
    if world.robot.distance_to(world.object) > world.reach:
        return "unreachable"
    world.arm = "pregrasp"
    return "ready"


def _close_hand(world, args, outputs, dt):
    world.hand = "closed"
    if world.robot.distance_to(world.object) <= world.reach and args.get("hand", world.hand_side) == world.hand_side:
        world.holding = True
        world.object = Pose(world.robot.x, world.robot.y, world.object.theta)
        return "grasped"
    world.hand = "open"
    return "missed"


def _home_if_empty(world, args, outputs, dt):
    if not world.holding:
        world.arm = "home"
    return "done"


FETCH = StateChart(
    "Fetch",
    "pregrasp",
    {
        "pregrasp": ChartState("pregrasp", _pregrasp),
        "close_hand": ChartState("close_hand", _close_hand),
        "homing": ChartState("homing", _home_if_empty),
        "success": _terminal("success", "success"),
        "failure": _terminal("failure", "failure"),
        "aborted": _terminal("aborted", "aborted"),
    },
    {
        ("pregrasp", "ready"): "close_hand",
        ("pregrasp", "unreachable"): "failure",
        ("pregrasp", STOP): "homing",
        ("close_hand", "grasped"): "success",
        ("close_hand", "missed"): "failure",
        ("close_hand", STOP): "homing",
        ("homing", "done"): "aborted",
        ("homing", STOP): "homing",
    },
)


# Release: open the hand where the robot stands -------------------------

def _open_hand(world, args, outputs, dt):
    if not world.holding:
        return "empty"
    world.holding = False
    world.hand = "open"
    world.arm = "home"
    world.object = Pose(world.robot.x, world.robot.y, world.object.theta)
    return "released"


RELEASE = StateChart(
    "Release",
    "opening",
    {
        "opening": ChartState("opening", _open_hand),
        "success": _terminal("success", "success"),
        "failure": _terminal("failure", "failure"),
        "aborted": _terminal("aborted", "aborted"),
    },
    {("opening", "released"): "success", ("opening", "empty"): "failure", ("opening", STOP): "aborted"},
)

CHARTS = {chart.name: chart for chart in (GOTO_POSE, DETECT_OBJECT, FETCH, RELEASE)}


# Immediate (condition) skills -----------------------------------------

def object_grasped(world, args):
    return world.holding and args.get("hand", world.hand_side) == world.hand_side


def close_to_pose(world, args):
    return world.robot.distance_to(Pose.parse(args["position"])) < float(args["threshold"])


def object_at_pose(world, args):
    return not world.holding and world.object.distance_to(Pose.parse(args["position"])) < float(args["threshold"])


CONDITIONS = {
    "ObjectGrasped": object_grasped,
    "CloseToPose": close_to_pose,
    "ObjectAtPose": object_at_pose,
}
