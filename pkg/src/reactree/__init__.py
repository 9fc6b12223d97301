"""Reactive behavior-tree engine with a simulated remote-skill layer."""

from .blackboard import InputPort, OutputPort, Pose, Scope
from .clock import RealClock, SimClock
from .compositions import (
    Fallback,
    FallbackMemory,
    Inverter,
    Parallel,
    ParallelMemory,
    Retry,
    Sequence,
    SequenceMemory,
    Timeout,
)
from .core import Node, TickContext, Tree
from .leaves import AsyncAction, Condition, CoroAction, SyncAction
from .registry import NodeRegistry, builtin_registry
from .runtime import RunConfig, RunReport, run, step
from .status import NodeStatus

__version__ = "0.1.0"

__all__ = [
    "AsyncAction",
    "Condition",
    "CoroAction",
    "Fallback",
    "FallbackMemory",
    "InputPort",
    "Inverter",
    "Node",
    "NodeRegistry",
    "NodeStatus",
    "OutputPort",
    "Parallel",
    "ParallelMemory",
    "Pose",
    "RealClock",
    "Retry",
    "RunConfig",
    "RunReport",
    "Scope",
    "Sequence",
    "SequenceMemory",
    "SimClock",
    "SyncAction",
    "TickContext",
    "Timeout",
    "Tree",
    "builtin_registry",
    "run",
    "step",
]
