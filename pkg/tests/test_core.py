import pytest

from reactree import Condition, NodeStatus, Parallel, Sequence, SyncAction, Tree
from reactree import trace as tr
from reactree.errors import EngineError, HaltTimeout
from reactree.leaves import LeafNode
from reactree.status import FAILURE, IDLE, RUNNING, SUCCESS, as_status

GOLDEN = """\
1,root/Sequence,TICK,Running
1,root/Sequence/Door,TICK,Success
1,root/Sequence/Move,TICK,Running
2,root/Sequence,TICK,Running
2,root/Sequence/Door,TICK,Success
2,root/Sequence/Move,TICK,Running
3,root/Sequence,TICK,Failure
3,root/Sequence/Door,TICK,Failure
3,root/Sequence/Move,HALT,Idle
3,root/Sequence/Door,STATUS_CHANGE,Idle
4,root/Sequence,STATUS_CHANGE,Idle
4,root/Sequence,TICK,Running
4,root/Sequence/Door,TICK,Success
4,root/Sequence/Move,TICK,Running
"""


def door_tree(flags):
    door = Condition("Door", lambda n: flags[n.ctx.tick_no - 1])
    move = SyncAction("Move", lambda n: RUNNING)
    return Tree(Sequence([door, move]))


def test_golden_trace_preemption_and_consumption():
    tree = door_tree([True, True, False, True])
    statuses = [tree.tick_root() for _ in range(4)]
    assert statuses == [RUNNING, RUNNING, FAILURE, RUNNING]
    assert tree.ctx.sink.text() == GOLDEN


def test_trace_roundtrip_through_parser():
    tree = door_tree([True, False])
    tree.tick_root()
    tree.tick_root()
    parsed = tr.parse_trace(tree.ctx.sink.text())
    assert [(e.tick, e.path, e.kind, e.status) for e in parsed] == [
        (e.tick, e.path, e.kind, e.status) for e in tree.ctx.sink.events
    ]


def test_trace_file_written_incrementally(tmp_path):
    path = tmp_path / "trace.csv"
    tree = door_tree([True, True])
    tree.ctx.sink = tr.TraceSink(str(path))
    tree.tick_root()
    tree.ctx.sink.flush()
    assert path.read_text().count("\n") == 3
    tree.tick_root()
    tree.ctx.sink.close()
    assert path.read_text() == tree.ctx.sink.text()


def test_status_helpers():
    assert SUCCESS.swapped() is FAILURE and RUNNING.swapped() is RUNNING
    assert SUCCESS.is_terminal and not RUNNING.is_terminal and not IDLE.is_terminal
    assert as_status(True) is SUCCESS and as_status(False) is FAILURE and as_status(None) is SUCCESS
    assert str(NodeStatus.RUNNING) == "Running"


class ReturnsIdle(LeafNode):
    def _tick(self, ctx):
        return IDLE


def test_tick_may_not_return_idle():
    with pytest.raises(EngineError):
        Tree(ReturnsIdle()).tick_root()


def test_duplicate_sibling_names_get_index_suffix():
    a, b = SyncAction("Go", lambda n: SUCCESS), SyncAction("Go", lambda n: SUCCESS)
    tree = Tree(Sequence([a, b], name="main"))
    assert [n.path for n in tree.nodes] == ["root/main", "root/main/Go", "root/main/Go.1"]
    assert tree.by_path["root/main/Go.1"] is b


def test_node_cannot_appear_twice():
    leaf = SyncAction("x", lambda n: SUCCESS)
    with pytest.raises(EngineError):
        Tree(Sequence([leaf, leaf]))


def test_retick_after_terminal_opens_new_episode():
    calls = []

    def step(node):
        calls.append(node.ctx.tick_no)
        return SUCCESS if len(calls) % 2 == 0 else RUNNING

    tree = Tree(SyncAction("a", step))
    assert [tree.tick_root() for _ in range(4)] == [RUNNING, SUCCESS, RUNNING, SUCCESS]
    # the delivered Success is consumed before the next episode starts
    kinds = [(e.tick, e.kind) for e in tree.ctx.sink.events if e.kind == tr.STATUS_CHANGE]
    assert kinds == [(3, tr.STATUS_CHANGE)]


def test_halting_idle_or_terminal_node_is_silent():
    halted = []
    leaf = SyncAction("a", lambda n: SUCCESS, on_halt=lambda n: halted.append(1))
    tree = Tree(leaf)
    tree.halt()
    tree.tick_root()
    tree.halt()
    assert halted == []
    assert leaf.status() is IDLE
    assert tree.ctx.sink.of_kind(tr.HALT) == []


class Stuck(LeafNode):
    def _tick(self, ctx):
        return RUNNING

    def _halt(self, ctx):
        raise HaltTimeout(self.path, ctx.halt_timeout)


def test_halt_timeout_flags_unhealthy_and_annotates():
    stuck = Stuck("stuck")
    other = SyncAction("other", lambda n: RUNNING)

    tree = Tree(Parallel([stuck, other], 2))
    tree.tick_root()
    with pytest.raises(HaltTimeout):
        tree.halt()
    assert tree.running_nodes() == []
    assert any("stuck" in u for u in tree.ctx.unhealthy)
    notes = [e.status for e in tree.ctx.sink.of_kind(tr.STATUS_CHANGE)]
    assert "HaltTimeout:root/Parallel/stuck" in notes
    # both children were still halted, right to left
    assert [e.path for e in tree.ctx.sink.of_kind(tr.HALT)] == [
        "root/Parallel/other",
        "root/Parallel/stuck",
        "root/Parallel",
    ]


def test_snapshot_restore_roundtrip():
    tree = door_tree([True, True, False])
    tree.tick_root()
    snap = tree.snapshot()
    tree.tick_root()
    tree.tick_root()
    tree.restore(snap)
    assert tree.snapshot() == snap
    assert tree.root.status() is RUNNING
