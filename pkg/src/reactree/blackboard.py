"""Scoped blackboard and node ports.

Each subtree instance gets its own :class:`Scope`. A key is looked up
locally unless the scope remaps it, in which case the lookup (or write) is
forwarded to the parent under the remapped name. Nothing falls through
implicitly, so two subtrees that both use ``tmp`` never see each other's
value.
"""

import math
import warnings
from dataclasses import dataclass

from .errors import DuplicateRemapKey, KeyNotFound, ParseError, PortResolutionError


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        for field in (self.x, self.y, self.theta):
            if not math.isfinite(field):
                raise ValueError(f"pose fields must be finite, got {self}")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __str__(self):
        return f"{self.x!r};{self.y!r};{self.theta!r}"

    @classmethod
    def parse(cls, text: str) -> "Pose":
        parts = [p.strip() for p in text.split(";")]
        if len(parts) not in (2, 3):
            raise ParseError(f"pose literal needs 'x;y' or 'x;y;theta', got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as exc:
            raise ParseError(f"bad pose literal {text!r}: {exc}") from None


def normalize_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.fmod(theta, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2 * math.pi
    return wrapped


_TAGS = {str: "string", bool: "bool", int: "int", float: "float", Pose: "pose"}


def type_tag(value) -> str:
    try:
        return _TAGS[type(value)]
    except KeyError:
        raise TypeError(f"unsupported blackboard value {value!r}") from None


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def parse_literal(text: str, tag: str):
    """Parse a string literal into a value of the given type tag."""
    try:
        if tag == "string":
            return text
        if tag == "int":
            return int(text)
        if tag == "float":
            return float(text)
        if tag == "bool":
            lowered = text.strip().lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if tag == "pose":
            return Pose.parse(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as {tag}") from None
    raise ParseError(f"unknown port type {tag!r}")


class TypeChangedWarning(UserWarning):
    pass


class Scope:
    def __init__(self, parent=None, remaps=None, name="root", on_write=None):
        self.parent = parent
        self.remaps = dict(remaps or {})
        self.entries = {}
        self.children = []
        if parent is None:
            self.path = name
            self.on_write = on_write
        else:
            self.path = f"{parent.path}/{name}"
            self.on_write = parent.on_write if on_write is None else on_write
            parent.children.append(self)

    def _locate(self, key):
        scope = self
        while key in scope.remaps:
            key = scope.remaps[key]
            scope = scope.parent
        return scope, key

    def get(self, key, default=KeyNotFound):
        scope, target = self._locate(key)
        try:
            # values are immutable, so returning them is a copy
            return scope.entries[target]
        except KeyError:
            if default is KeyNotFound:
                raise KeyNotFound(key, self.path) from None
            return default

    def has(self, key) -> bool:
        scope, target = self._locate(key)
        return target in scope.entries

    def set(self, key, value, writer=""):
        tag = type_tag(value)
        scope, target = self._locate(key)
        old = scope.entries.get(target)
        if old is not None and type_tag(old) != tag:
            warnings.warn(
                f"{scope.path}:{target} changed type {type_tag(old)} -> {tag}",
                TypeChangedWarning,
                stacklevel=2,
            )
        scope.entries[target] = value
        if self.on_write is not None:
            self.on_write(writer, scope.path, target, value)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def dump(self) -> str:
        lines = []
        for scope in self.walk():
            for key, value in scope.entries.items():
                lines.append(f"{scope.path} {key} {type_tag(value)} {format_value(value)}")
        return "\n".join(sorted(lines)) + ("\n" if lines else "")


def create_scope(parent, remaps=(), name="scope"):
    """Make an isolated child scope; ``remaps`` is a mapping or (child, parent) pairs."""
    pairs = list(remaps.items()) if isinstance(remaps, dict) else list(remaps)
    seen = {}
    for child_key, parent_key in pairs:
        if child_key in seen:
            raise DuplicateRemapKey(
                f"child key {child_key!r} remapped to both {seen[child_key]!r} and {parent_key!r}"
            )
        seen[child_key] = parent_key
    return Scope(parent, seen, name=name)


@dataclass(frozen=True)
class PortSpec:
    name: str
    direction: str = "in"
    type: str = "string"
    default: object = None

    def __post_init__(self):
        if self.direction not in ("in", "out"):
            raise ValueError(f"port direction must be 'in' or 'out', not {self.direction!r}")


def InputPort(name, type="string", default=None):
    return PortSpec(name, "in", type, default)


def OutputPort(name, type="string"):
    return PortSpec(name, "out", type)


@dataclass(frozen=True)
class PortBinding:
    name: str
    direction: str
    literal: str = None
    key: str = None

    @classmethod
    def from_attribute(cls, spec: PortSpec, text: str) -> "PortBinding":
        key = blackboard_key(text)
        if key is None:
            if spec.direction == "out":
                raise PortResolutionError(f"output port {spec.name!r} must bind a blackboard key, got literal {text!r}")
            return cls(spec.name, spec.direction, literal=text)
        return cls(spec.name, spec.direction, key=key)


def blackboard_key(text: str):
    """Return ``key`` for ``"{key}"`` attribute syntax, else None."""
    text = text.strip()
    if len(text) > 2 and text[0] == "{" and text[-1] == "}":
        return text[1:-1].strip()
    return None


def coerce(value, tag):
    if tag == "string" and not isinstance(value, str):
        return format_value(value)
    if isinstance(value, str) and tag != "string":
        return parse_literal(value, tag)
    if tag == "float" and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if type_tag(value) != tag:
        raise PortResolutionError(f"expected {tag}, blackboard holds {type_tag(value)} {value!r}")
    return value


def resolve_input(spec: PortSpec, binding, scope):
    if binding is None:
        if spec.default is not None:
            return coerce(spec.default, spec.type)
        raise KeyNotFound(spec.name, "<unbound input port>")
    if binding.literal is not None:
        return parse_literal(binding.literal, spec.type)
    if spec.default is not None:
        value = scope.get(binding.key, None)
        if value is None:
            return coerce(spec.default, spec.type)
        return coerce(value, spec.type)
    return coerce(scope.get(binding.key), spec.type)


def resolve_output(spec: PortSpec, binding, scope):
    """Return a ``write(value)`` callable targeting the bound entry."""
    if binding is None or binding.key is None:
        raise PortResolutionError(f"output port {spec.name!r} is not bound to a blackboard key")

    def write(value, writer=""):
        scope.set(binding.key, coerce(value, spec.type), writer=writer)

    return write
