from enum import Enum


class NodeStatus(Enum):
    IDLE = "Idle"
    RUNNING = "Running"
    SUCCESS = "Success"
    FAILURE = "Failure"

    def __str__(self):
        return self.value

    @property
    def is_terminal(self) -> bool:
        return self is NodeStatus.SUCCESS or self is NodeStatus.FAILURE

    def swapped(self) -> "NodeStatus":
        """Exchange Success and Failure; Running and Idle are fixed points."""
        if self is NodeStatus.SUCCESS:
            return NodeStatus.FAILURE
        if self is NodeStatus.FAILURE:
            return NodeStatus.SUCCESS
        return self


IDLE = NodeStatus.IDLE
RUNNING = NodeStatus.RUNNING
SUCCESS = NodeStatus.SUCCESS
FAILURE = NodeStatus.FAILURE


def as_status(value) -> NodeStatus:
    """Coerce a leaf body's return value into a tick status.

    ``True``/``None`` mean Success, ``False`` means Failure.
    """
    if isinstance(value, NodeStatus):
        return value
    if value is None or value is True:
        return SUCCESS
    if value is False:
        return FAILURE
    raise TypeError(f"cannot interpret {value!r} as a NodeStatus")
