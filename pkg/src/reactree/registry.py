"""Leaf registry consumed by tree-file instantiation, plus built-in leaves."""

from dataclasses import dataclass

from .blackboard import InputPort, OutputPort
from .errors import UnregisteredLeaf
from .leaves import Condition, CoroAction, SyncAction
from .status import FAILURE, SUCCESS


@dataclass(frozen=True)
class LeafType:
    name: str
    kind: str
    factory: object
    ports: tuple = ()

    def port(self, name):
        for spec in self.ports:
            if spec.name == name:
                return spec
        return None


class NodeRegistry:
    def __init__(self):
        self._types = {}

    def register(self, name, factory, kind="action", ports=()):
        """``factory(name)`` must return a fresh leaf node."""
        if kind not in ("action", "condition"):
            raise ValueError(f"leaf kind must be action or condition, got {kind!r}")
        self._types[name] = LeafType(name, kind, factory, tuple(ports))

    def condition(self, name, predicate, ports=()):
        self.register(name, lambda label: Condition(label, predicate), "condition", ports)

    def action(self, name, step, ports=(), on_halt=None, budget=1):
        self.register(name, lambda label: SyncAction(label, step, on_halt, budget), "action", ports)

    def get(self, name) -> LeafType:
        try:
            return self._types[name]
        except KeyError:
            raise UnregisteredLeaf(f"no leaf registered under {name!r}") from None

    def __contains__(self, name):
        return name in self._types

    def names(self):
        return sorted(self._types)

    def create(self, name, label=None):
        leaf_type = self.get(name)
        node = leaf_type.factory(label or name)
        node.ports = leaf_type.ports
        node.kind = leaf_type.kind
        return node

    def merged(self, other):
        out = NodeRegistry()
        out._types = {**self._types, **other._types}
        return out


def _set_index(node):
    node.set_output("index", node.get_input("value"))
    return SUCCESS


def _set_blackboard(node):
    node.set_output("output_key", node.get_input("value"))
    return SUCCESS


def _wait(node):
    clock = node.ctx.clock
    deadline = clock.now() + node.get_input("msec") / 1000.0
    while clock.now() < deadline - 1e-9:
        yield "waiting"
    return SUCCESS


def builtin_registry() -> NodeRegistry:
    reg = NodeRegistry()
    reg.action("AlwaysSuccess", lambda n: SUCCESS)
    reg.action("AlwaysFailure", lambda n: FAILURE)
    reg.condition("IsTrue", lambda n: True)
    reg.condition("IsFalse", lambda n: False)
    reg.condition(
        "IndexAtLeast",
        lambda n: n.get_input("index") >= n.get_input("value"),
        ports=(InputPort("index", "int", default=0), InputPort("value", "int")),
    )
    reg.action("SetIndex", _set_index, ports=(OutputPort("index", "int"), InputPort("value", "int")))
    reg.condition(
        "CheckBlackboard",
        lambda n: n.get_input("value") == n.get_input("expected"),
        ports=(InputPort("value"), InputPort("expected")),
    )
    reg.action("SetBlackboard", _set_blackboard, ports=(OutputPort("output_key"), InputPort("value")))
    reg.register("Wait", lambda label: CoroAction(label, _wait), "action", (InputPort("msec", "float"),))
    return reg
