"""Declarative tree files.

Format (XML)::

    <root main_tree_to_execute="Main">
      <BehaviorTree ID="Main">
        <Sequence label="mission">
          <Condition name="ObjectGrasped" hand="left"/>
          <SubTree ID="Fetch" target="{object_pose}" hand="left"/>
        </Sequence>
      </BehaviorTree>
      <BehaviorTree ID="Fetch" ports="target,hand"> ... </BehaviorTree>
    </root>

Leaf attributes other than ``name``/``label`` bind ports: ``"{key}"`` binds
a blackboard entry, anything else is a literal. On ``SubTree``, ``"{key}"``
remaps the subtree's key onto the caller's ``key`` and a literal presets
the subtree's local entry.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.parsers import expat

from . import compositions as comp
from .blackboard import PortBinding, Scope, blackboard_key, create_scope
from .core import TickContext, Tree
from .errors import (
    ConfigError,
    InvalidTree,
    MissingAttribute,
    PortMismatch,
    PortResolutionError,
    TreeSyntaxError,
    UnknownElement,
)

COMPOSITIONS = ("Sequence", "Fallback", "Parallel", "SequenceMemory", "FallbackMemory", "ParallelMemory")
DECORATORS = ("Inverter", "Retry", "Timeout")
LEAVES = ("Action", "Condition")
VOCABULARY = COMPOSITIONS + DECORATORS + LEAVES + ("SubTree",)

REQUIRED = {
    "Parallel": ("success_threshold",),
    "ParallelMemory": ("success_threshold",),
    "Retry": ("num_attempts",),
    "Timeout": ("msec",),
    "Action": ("name",),
    "Condition": ("name",),
    "SubTree": ("ID",),
}
# attributes that are not port bindings / remaps
RESERVED = {"name", "label", "ID"}


@dataclass
class Element:
    tag: str
    attrs: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    line: int = field(default=None, compare=False)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    @property
    def label(self):
        return self.attrs.get("label")

    def bindings(self):
        return {k: v for k, v in self.attrs.items() if k not in RESERVED}


@dataclass
class TreeDef:
    id: str
    children: list = field(default_factory=list)
    attrs: dict = field(default_factory=dict)
    line: int = field(default=None, compare=False)

    @property
    def body(self):
        return self.children[0] if len(self.children) == 1 else None

    @property
    def ports(self):
        declared = self.attrs.get("ports")
        if declared is None:
            return None
        return [p.strip() for p in declared.split(",") if p.strip()]


@dataclass
class TreeModel:
    main: str
    trees: list = field(default_factory=list)

    def tree(self, tree_id):
        for tree_def in self.trees:
            if tree_def.id == tree_id:
                return tree_def
        return None

    @property
    def root(self):
        main = self.tree(self.main)
        return main.body if main else None

    def elements(self):
        for tree_def in self.trees:
            for child in tree_def.children:
                yield from child.walk()


def count_elements(element) -> int:
    return sum(1 for _ in element.walk())


# parsing ----------------------------------------------------------------

def parse(text) -> TreeModel:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if not text.strip():
        raise TreeSyntaxError("empty document", line=1)
    parser = expat.ParserCreate()
    top, stack = [], []

    def start(tag, attrs):
        element = Element(tag, dict(attrs), [], parser.CurrentLineNumber)
        (stack[-1].children if stack else top).append(element)
        stack.append(element)

    def end(tag):
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise TreeSyntaxError(expat.errors.messages[exc.code], line=exc.lineno) from None
    return _build_model(top[0])


def parse_file(path) -> TreeModel:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _build_model(doc) -> TreeModel:
    if doc.tag != "root":
        raise UnknownElement(f"document element must be <root>, got <{doc.tag}>", doc.line)
    trees = []
    for element in doc.children:
        if element.tag != "BehaviorTree":
            raise UnknownElement(f"expected <BehaviorTree>, got <{element.tag}>", element.line)
        if "ID" not in element.attrs:
            raise MissingAttribute("<BehaviorTree> needs an ID", element.line)
        attrs = dict(element.attrs)
        tree_id = attrs.pop("ID")
        for child in element.children:
            _check_element(child)
        trees.append(TreeDef(tree_id, element.children, attrs, element.line))
    main = doc.attrs.get("main_tree_to_execute")
    if main is None:
        if len(trees) != 1:
            raise MissingAttribute("<root> needs main_tree_to_execute when it holds several trees", doc.line)
        main = trees[0].id
    return TreeModel(main, trees)


def _check_element(element):
    if element.tag not in VOCABULARY:
        raise UnknownElement(f"unknown element <{element.tag}>", element.line)
    for attr in REQUIRED.get(element.tag, ()):
        if attr not in element.attrs:
            raise MissingAttribute(f"<{element.tag}> needs attribute {attr!r}", element.line)
    for child in element.children:
        _check_element(child)


# validation -------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str
    path: str
    message: str
    line: int = None

    def __str__(self):
        where = f" (line {self.line})" if self.line else ""
        return f"{self.severity}: {self.path}{where}: {self.message}"


def _int_attr(element, name):
    try:
        return int(element.attrs[name])
    except (KeyError, ValueError):
        return None


def validate(model: TreeModel, registry=None) -> list:
    """Return diagnostics; no entries with severity ``error`` means valid."""
    out = []

    def error(path, message, line=None):
        out.append(Diagnostic("error", path, message, line))

    seen = set()
    for tree_def in model.trees:
        if tree_def.id in seen:
            error(tree_def.id, f"duplicate subtree definition {tree_def.id!r}", tree_def.line)
        seen.add(tree_def.id)
        if len(tree_def.children) != 1:
            error(tree_def.id, f"a tree needs exactly one root element, found {len(tree_def.children)}", tree_def.line)
    if model.tree(model.main) is None:
        error("<root>", f"main tree {model.main!r} is not defined")

    for tree_def in model.trees:
        for index, child in enumerate(tree_def.children):
            _validate_element(model, child, f"{tree_def.id}/{child.tag}[{index}]", registry, error)

    _check_cycles(model, error)

    referenced = {model.main} | {e.attrs["ID"] for e in model.elements() if e.tag == "SubTree"}
    for tree_def in model.trees:
        if tree_def.id not in referenced:
            out.append(Diagnostic("warning", tree_def.id, "subtree is never used", tree_def.line))
    return out


def errors_only(diagnostics):
    return [d for d in diagnostics if d.severity == "error"]


def _validate_element(model, element, path, registry, error):
    tag, n = element.tag, len(element.children)
    if tag in COMPOSITIONS and n < 1:
        error(path, f"{tag} needs at least one child", element.line)
    if tag in DECORATORS and n != 1:
        error(path, f"decorator {tag} needs exactly one child, found {n}", element.line)
    if tag in LEAVES + ("SubTree",) and n:
        error(path, f"{tag} cannot have children", element.line)

    if tag in ("Parallel", "ParallelMemory"):
        m = _int_attr(element, "success_threshold")
        if m is None:
            error(path, "success_threshold must be an integer", element.line)
        elif m < 1:
            error(path, "threshold must be at least 1", element.line)
        elif m > n:
            error(path, f"threshold exceeds child count ({m} > {n})", element.line)
    elif tag == "Retry":
        attempts = _int_attr(element, "num_attempts")
        if attempts is None or attempts < 1:
            error(path, "num_attempts must be an integer >= 1", element.line)
    elif tag == "Timeout":
        try:
            if not float(element.attrs["msec"]) > 0:
                raise ValueError
        except ValueError:
            error(path, "msec must be a positive number", element.line)
    elif tag == "SubTree":
        target = model.tree(element.attrs["ID"])
        if target is None:
            error(path, f"reference to undefined subtree {element.attrs['ID']!r}", element.line)
        else:
            declared = target.ports
            for key, value in element.bindings().items():
                if declared is not None and key not in declared:
                    error(path, f"argument {key!r} is not in the interface of {target.id!r}", element.line)
                if value.strip().startswith("{") and not blackboard_key(value):
                    error(path, f"malformed remap {key}={value!r}", element.line)
    elif tag in LEAVES and registry is not None:
        _validate_leaf(element, path, registry, error)

    for index, child in enumerate(element.children):
        _validate_element(model, child, f"{path}/{child.tag}[{index}]", registry, error)


def _validate_leaf(element, path, registry, error):
    name = element.attrs["name"]
    if name not in registry:
        error(path, f"leaf {name!r} is not registered", element.line)
        return
    leaf_type = registry.get(name)
    if leaf_type.kind != element.tag.lower():
        error(path, f"{name!r} is registered as {leaf_type.kind}, used as {element.tag}", element.line)
    for port, value in element.bindings().items():
        spec = leaf_type.port(port)
        if spec is None:
            error(path, f"{name!r} has no port {port!r}", element.line)
        elif spec.direction == "out" and blackboard_key(value) is None:
            error(path, f"output port {port!r} must bind a blackboard key", element.line)


def _check_cycles(model, error):
    def refs(tree_def):
        return [e.attrs["ID"] for c in tree_def.children for e in c.walk() if e.tag == "SubTree"]

    state = {}

    def visit(tree_id, chain):
        tree_def = model.tree(tree_id)
        if tree_def is None or state.get(tree_id) == "done":
            return
        if state.get(tree_id) == "active":
            error(tree_id, "recursive subtree cycle: " + " -> ".join(chain + [tree_id]), tree_def.line)
            return
        state[tree_id] = "active"
        for ref in refs(tree_def):
            visit(ref, chain + [tree_id])
        state[tree_id] = "done"

    for tree_def in model.trees:
        visit(tree_def.id, [])


# instantiation ----------------------------------------------------------

class SubTreeNode(comp.Decorator):
    """Transparent boundary node marking where a subtree scope begins."""

    def _tick(self, ctx):
        status = self.child.tick(ctx)
        if status.is_terminal:
            self.consume_children(ctx)
        return status


def instantiate(model: TreeModel, registry, scope: Scope = None, ctx: TickContext = None) -> Tree:
    problems = errors_only(validate(model))
    if problems:
        raise InvalidTree(problems)
    scope = scope or Scope()
    root = _build(model, model.root, registry, scope)
    return Tree(root, scope, ctx)


def _build(model, element, registry, scope):
    tag, label = element.tag, element.label
    try:
        if tag in LEAVES:
            node = _build_leaf(element, registry)
        elif tag == "SubTree":
            node = _build_subtree(model, element, registry, scope)
        else:
            children = [_build(model, c, registry, scope) for c in element.children]
            name = label or tag
            if tag in ("Parallel", "ParallelMemory"):
                cls = comp.Parallel if tag == "Parallel" else comp.ParallelMemory
                node = cls(children, int(element.attrs["success_threshold"]), name=name)
            elif tag == "Retry":
                node = comp.Retry(children[0], int(element.attrs["num_attempts"]), name=name)
            elif tag == "Timeout":
                node = comp.Timeout(children[0], float(element.attrs["msec"]), name=name)
            elif tag == "Inverter":
                node = comp.Inverter(children[0], name=name)
            else:
                node = getattr(comp, tag)(children, name=name)
    except ConfigError as exc:
        raise InvalidTree([Diagnostic("error", tag, str(exc), element.line)]) from None
    if node.scope is None:
        node.scope = scope
    return node


def _build_leaf(element, registry):
    name = element.attrs["name"]
    leaf_type = registry.get(name)
    if leaf_type.kind != element.tag.lower():
        raise PortMismatch(f"{name!r} is registered as {leaf_type.kind}, used as {element.tag}", element.line)
    node = registry.create(name, element.label)
    for port, value in element.bindings().items():
        spec = leaf_type.port(port)
        if spec is None:
            raise PortMismatch(f"{name!r} has no port {port!r}", element.line)
        try:
            node.bindings[port] = PortBinding.from_attribute(spec, value)
        except PortResolutionError as exc:
            raise PortMismatch(str(exc), element.line) from None
    return node


def _build_subtree(model, element, registry, scope):
    target = model.tree(element.attrs["ID"])
    remaps, presets = {}, {}
    for key, value in element.bindings().items():
        parent_key = blackboard_key(value)
        if parent_key is None:
            presets[key] = value
        else:
            remaps[key] = parent_key
    name = element.label or target.id
    taken = {child.path.rsplit("/", 1)[-1] for child in scope.children}
    scope_name = name if name not in taken else f"{name}.{len(scope.children)}"
    child_scope = create_scope(scope, remaps, name=scope_name)
    for key, value in presets.items():
        child_scope.entries[key] = value
    body = _build(model, target.body, registry, child_scope)
    node = SubTreeNode(body, name=name)
    node.scope = scope
    return node


# serialization ----------------------------------------------------------

def _to_xml(element):
    node = ET.Element(element.tag, dict(element.attrs))
    for child in element.children:
        node.append(_to_xml(child))
    return node


def serialize(model: TreeModel) -> str:
    doc = ET.Element("root", {"main_tree_to_execute": model.main})
    for tree_def in model.trees:
        tree_el = ET.SubElement(doc, "BehaviorTree", {"ID": tree_def.id, **tree_def.attrs})
        for child in tree_def.children:
            tree_el.append(_to_xml(child))
    ET.indent(doc, space="  ")
    return ET.tostring(doc, encoding="unicode") + "\n"


def load(path, registry, scope=None, ctx=None) -> Tree:
    return instantiate(parse_file(path), registry, scope, ctx)
