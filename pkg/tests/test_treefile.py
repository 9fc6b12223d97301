import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reactree import treefile as tf
from reactree.errors import (
    InvalidTree,
    MissingAttribute,
    PortMismatch,
    TreeSyntaxError,
    UnknownElement,
    UnregisteredLeaf,
)
from reactree.expand import expand_memory_node
from reactree.registry import NodeRegistry, builtin_registry
from reactree.scenario import make_world, tree_path
from reactree.skillwire.client import LoopbackConnection, register_skill_leaves
from reactree.skillwire.server import SkillServer
from reactree.status import RUNNING, SUCCESS


def wrap(body, extra=""):
    return f'<root main_tree_to_execute="Main"><BehaviorTree ID="Main">{body}</BehaviorTree>{extra}</root>'


def skill_registry():
    return register_skill_leaves(builtin_registry(), None)


def messages(text, registry=None):
    return [d.message for d in tf.errors_only(tf.validate(tf.parse(text), registry))]


def test_basic_fetch_tree_has_eight_elements():
    model = tf.parse_file(tree_path("fetch_basic.xml"))
    assert tf.count_elements(model.root) == 8
    assert tf.validate(model, skill_registry()) == []
    assert [e.tag for e in model.root.walk()] == [
        "Sequence", "Fallback", "Condition", "SequenceMemory", "Action", "Action", "Action", "Action",
    ]


def test_empty_document():
    with pytest.raises(TreeSyntaxError):
        tf.parse("   ")


def test_malformed_markup_reports_line():
    with pytest.raises(TreeSyntaxError) as info:
        tf.parse('<root>\n<BehaviorTree ID="x">\n<Sequence>\n</root>')
    assert info.value.line == 4


def test_unknown_element_and_missing_attribute():
    with pytest.raises(UnknownElement):
        tf.parse(wrap("<Selector/>"))
    with pytest.raises(MissingAttribute):
        tf.parse(wrap("<Parallel><Action name='AlwaysSuccess'/></Parallel>"))
    with pytest.raises(UnknownElement):
        tf.parse("<tree/>")


def test_subtree_remaps_recorded():
    model = tf.parse_file(tree_path("fetch_mission.xml"))
    (ref,) = [e for e in model.elements() if e.tag == "SubTree"]
    assert ref.bindings() == {"target": "{object_pose}", "hand": "left"}
    assert model.tree("FetchObject").ports == ["target", "hand"]


def test_parallel_threshold_exceeds_children():
    leaves = "<Action name='AlwaysSuccess'/>" * 3
    assert any("threshold exceeds child count" in m
               for m in messages(wrap(f"<Parallel success_threshold='4'>{leaves}</Parallel>")))


def test_decorator_with_two_children():
    two = "<Action name='AlwaysSuccess'/><Action name='AlwaysFailure'/>"
    assert any("exactly one child" in m for m in messages(wrap(f"<Inverter>{two}</Inverter>")))


def test_duplicate_subtree_definition():
    extra = '<BehaviorTree ID="Main"><Action name="AlwaysSuccess"/></BehaviorTree>'
    assert any("duplicate" in m for m in messages(wrap("<Action name='AlwaysSuccess'/>", extra)))


def test_subtree_cycle_and_undefined_reference():
    text = ('<root main_tree_to_execute="A">'
            '<BehaviorTree ID="A"><SubTree ID="B"/></BehaviorTree>'
            '<BehaviorTree ID="B"><SubTree ID="A"/></BehaviorTree></root>')
    assert any("cycle" in m for m in messages(text))
    assert any("undefined subtree" in m for m in messages(wrap('<SubTree ID="Nope"/>')))


def test_subtree_argument_outside_interface_rejected():
    extra = '<BehaviorTree ID="Sub" ports="a"><Action name="AlwaysSuccess"/></BehaviorTree>'
    assert any("not in the interface" in m for m in messages(wrap('<SubTree ID="Sub" b="1"/>', extra)))


def test_bad_decorator_parameters():
    child = "<Action name='AlwaysSuccess'/>"
    assert messages(wrap(f"<Retry num_attempts='0'>{child}</Retry>"))
    assert messages(wrap(f"<Timeout msec='-5'>{child}</Timeout>"))


def test_registry_checks_in_validation():
    errors = messages(wrap("<Condition name='GotoPose' goal='1;2'/>"), skill_registry())
    assert any("registered as action" in m for m in errors)
    errors = messages(wrap("<Action name='DetectObject' pose='1;2'/>"), skill_registry())
    assert any("blackboard key" in m for m in errors)
    assert messages(wrap("<Action name='Fly'/>"), NodeRegistry())


def test_unregistered_leaf_on_instantiate():
    with pytest.raises(UnregisteredLeaf):
        tf.instantiate(tf.parse(wrap("<Action name='Fly'/>")), NodeRegistry())


def test_port_mismatch_on_instantiate():
    with pytest.raises(PortMismatch):
        tf.instantiate(tf.parse(wrap("<Action name='AlwaysSuccess' speed='3'/>")), builtin_registry())


def test_invalid_model_refuses_instantiation():
    with pytest.raises(InvalidTree):
        tf.instantiate(tf.parse(wrap("<Inverter/>")), builtin_registry())


def test_fetch_model_runs_on_tick_one():
    world = make_world(0)
    registry = register_skill_leaves(builtin_registry(), LoopbackConnection(SkillServer(world)))
    tree = tf.load(tree_path("fetch_mission.xml"), registry)
    assert tree.tick_root() is RUNNING
    tree.halt()


def test_double_instantiation_independent():
    model = tf.parse_file(tree_path("memory_sequence.xml"))
    one = tf.instantiate(model, builtin_registry())
    two = tf.instantiate(model, builtin_registry())
    one.tick_root()
    assert all(n.status().value == "Idle" for n in two.nodes)
    assert [n.path for n in one.nodes] == [n.path for n in two.nodes]


def test_subtree_scope_remaps_and_presets():
    text = ('<root main_tree_to_execute="Main">'
            '<BehaviorTree ID="Main"><Sequence>'
            '<SubTree ID="Put" value="{source}" out="{result}"/>'
            '<Condition name="CheckBlackboard" value="{result}" expected="seven"/>'
            '</Sequence></BehaviorTree>'
            '<BehaviorTree ID="Put" ports="value,out">'
            '<Action name="SetBlackboard" output_key="{out}" value="{value}"/>'
            '</BehaviorTree></root>')
    tree = tf.instantiate(tf.parse(text), builtin_registry())
    tree.scope.set("source", "seven")
    assert tree.tick_root() is SUCCESS
    assert [s.path for s in tree.scope.walk()] == ["root", "root/Put"]


def test_node_ids_independent_of_registry():
    model = tf.parse_file(tree_path("fetch_basic.xml"))
    a = tf.instantiate(model, skill_registry())
    b = tf.instantiate(model, skill_registry().merged(builtin_registry()))
    assert [(n.uid, n.path) for n in a.nodes] == [(n.uid, n.path) for n in b.nodes]


@pytest.mark.parametrize("name", ["fetch_basic.xml", "fetch_mission.xml", "memory_sequence.xml"])
def test_roundtrip_shipped_trees(name):
    model = tf.parse_file(tree_path(name))
    text = tf.serialize(model)
    assert tf.parse(text) == model
    assert tf.serialize(tf.parse(text)) == text


def test_roundtrip_expanded_tree():
    expanded = expand_memory_node(tf.parse_file(tree_path("fetch_basic.xml")))
    assert tf.parse(tf.serialize(expanded)) == expanded


names = st.sampled_from(["AlwaysSuccess", "AlwaysFailure", "IsTrue"])
labels = st.text("abcxyz_ &<>\"'", min_size=1, max_size=6)


def leaf():
    return st.builds(lambda n, l: tf.Element("Action", {"name": n, "label": l}), names, labels)


def element():
    def extend(children):
        comp = st.builds(
            lambda tag, kids: tf.Element(tag, {}, kids),
            st.sampled_from(["Sequence", "Fallback", "SequenceMemory", "FallbackMemory"]),
            st.lists(children, min_size=1, max_size=3),
        )
        par = st.builds(
            lambda kids, m: tf.Element("Parallel", {"success_threshold": str(min(m, len(kids)))}, kids),
            st.lists(children, min_size=1, max_size=3),
            st.integers(1, 3),
        )
        dec = st.builds(lambda c: tf.Element("Inverter", {}, [c]), children)
        return comp | par | dec

    return st.recursive(leaf(), extend, max_leaves=8)


@settings(max_examples=60, deadline=None)
@given(element())
def test_roundtrip_property(root):
    model = tf.TreeModel("Main", [tf.TreeDef("Main", [root])])
    assert tf.errors_only(tf.validate(model)) == []
    assert tf.parse(tf.serialize(model)) == model
