"""Rewrite memory compositions into memoryless ones.

A ``SequenceMemory`` with children c1..cN becomes::

    Fallback
      Sequence
        Fallback[ IndexAtLeast(k, 1)?, Sequence[c1, SetIndex(k, 1)] ]
        ...
        Fallback[ IndexAtLeast(k, N)?, Sequence[cN, SetIndex(k, N)] ]
        SetIndex(k, 0)
      Sequence[ SetIndex(k, 0), AlwaysFailure ]

where ``k`` is a fresh blackboard key counting the children that already
succeeded in the current episode. ``FallbackMemory`` is rewritten the dual
way. The rewritten tree ticks the original children in the same order and
returns the same statuses, as long as the node is not halted from outside
(a halt cannot clear ``k``) and the children leave ``k`` alone.
"""

import copy

from .errors import ExpansionUnsupported
from .treefile import Element, TreeModel


def expand_memory_node(model: TreeModel) -> TreeModel:
    expanded = copy.deepcopy(model)
    counter = [0]
    for tree_def in expanded.trees:
        tree_def.children = [_rewrite(child, counter) for child in tree_def.children]
    return expanded


def _rewrite(element, counter):
    if element.tag == "ParallelMemory":
        raise ExpansionUnsupported("ParallelMemory has no memoryless expansion", element.line)
    if element.tag not in ("SequenceMemory", "FallbackMemory"):
        element.children = [_rewrite(child, counter) for child in element.children]
        return element
    number = counter[0]
    counter[0] += 1
    children = [_rewrite(child, counter) for child in element.children]
    key = f"__mem{number}"
    label = element.label or f"mem{number}"
    if element.tag == "SequenceMemory":
        return _sequence(children, key, label)
    return _fallback(children, key, label)


def _node(tag, label, children=(), **attrs):
    return Element(tag, {"label": label, **attrs}, list(children))


def _leaf(tag, name, label, **ports):
    return Element(tag, {"name": name, "label": label, **ports})


def _set_index(key, value, label):
    return _leaf("Action", "SetIndex", label, index=f"{{{key}}}", value=str(value))


def _done(key, i, label):
    return _leaf("Condition", "IndexAtLeast", label, index=f"{{{key}}}", value=str(i))


def _sequence(children, key, label):
    steps = []
    for i, child in enumerate(children, start=1):
        run = _node("Sequence", f"{label}.exec{i}", [child, _set_index(key, i, f"{label}.mark{i}")])
        steps.append(_node("Fallback", f"{label}.step{i}", [_done(key, i, f"{label}.done{i}"), run]))
    steps.append(_set_index(key, 0, f"{label}.reset"))
    on_failure = _node(
        "Sequence",
        f"{label}.on_failure",
        [_set_index(key, 0, f"{label}.reset_failed"), _leaf("Action", "AlwaysFailure", f"{label}.fail")],
    )
    return _node("Fallback", label, [_node("Sequence", f"{label}.run", steps), on_failure])


def _fallback(children, key, label):
    steps = []
    for i, child in enumerate(children, start=1):
        mark = _node(
            "Sequence",
            f"{label}.mark{i}",
            [_set_index(key, i, f"{label}.set{i}"), _leaf("Action", "AlwaysFailure", f"{label}.skip{i}")],
        )
        pending = _node("Inverter", f"{label}.pending{i}", [_done(key, i, f"{label}.done{i}")])
        steps.append(_node("Sequence", f"{label}.step{i}", [pending, _node("Fallback", f"{label}.exec{i}", [child, mark])]))
    steps.append(
        _node(
            "Sequence",
            f"{label}.exhausted",
            [_set_index(key, 0, f"{label}.reset_failed"), _leaf("Action", "AlwaysFailure", f"{label}.fail")],
        )
    )
    return _node("Sequence", label, [_node("Fallback", f"{label}.run", steps), _set_index(key, 0, f"{label}.reset")])
