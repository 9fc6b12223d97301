"""Connections to a skill server and the leaves that drive remote skills.

A remote leaf ticks by sending one request and waiting (bounded by
``reply_timeout``) for the correlated reply:

* first tick of an episode sends ``start``; an ``ack`` means Running, a
  ``result`` (condition skills) gives the outcome directly;
* later ticks send ``status``; ``running`` keeps the leaf Running and a
  ``result`` ends the episode, writing returned outputs to output ports;
* halting sends ``stop`` and waits up to the tree halt timeout.

A lost connection or an ``error`` reply makes the tick fail with an
annotation; lost connections also mark the run unhealthy.
"""

import itertools
import socket
import threading

from .. import trace as tr
from ..blackboard import InputPort, OutputPort, format_value, parse_literal
from ..errors import DecodeError, HaltTimeout, SkillConnectionError
from ..leaves import LeafNode
from ..status import FAILURE, RUNNING, SUCCESS
from .protocol import SkillMessage, decode, encode
from .server import parse_endpoint

DEFAULT_REPLY_TIMEOUT = 2.0


class ReplyTimeout(SkillConnectionError):
    pass


class _Connection:
    def __init__(self):
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        self.closed = False

    def request(self, op, skill, args=None, timeout=DEFAULT_REPLY_TIMEOUT, observe=None) -> SkillMessage:
        """Send one request and return its reply.

        ``observe(direction, msg)`` sees both messages ("out" then "in").
        """
        with self._lock:
            if self.closed:
                raise SkillConnectionError("connection is closed")
            msg = SkillMessage(next(self._ids), op, skill, dict(args or {}))
            if observe is not None:
                observe("out", msg)
            reply = self._exchange(msg, timeout)
        if observe is not None:
            observe("in", reply)
        return reply

    def _exchange(self, msg, timeout):
        raise NotImplementedError

    def close(self):
        self.closed = True


class LoopbackConnection(_Connection):
    """In-process transport; messages still go through encode/decode."""

    def __init__(self, server):
        super().__init__()
        self.server = server

    def _exchange(self, msg, timeout):
        request = decode(encode(msg))
        return decode(encode(self.server.handle(request)))


class SocketConnection(_Connection):
    def __init__(self, host, port, connect_timeout=2.0):
        super().__init__()
        try:
            self.sock = socket.create_connection((host, port), timeout=connect_timeout)
        except OSError as exc:
            raise SkillConnectionError(f"cannot connect to {host}:{port}: {exc}") from None
        self._reader = self.sock.makefile("rb")

    @classmethod
    def from_endpoint(cls, endpoint, connect_timeout=2.0):
        host, port = parse_endpoint(endpoint)
        return cls(host, port, connect_timeout)

    def _exchange(self, msg, timeout):
        try:
            self.sock.settimeout(timeout)
            self.sock.sendall(encode(msg))
            while True:
                line = self._reader.readline()
                if not line:
                    raise SkillConnectionError("server closed the connection")
                try:
                    reply = decode(line)
                except DecodeError:
                    continue
                # replies to requests that already timed out are skipped
                if reply.id == msg.id:
                    return reply
        except socket.timeout:
            raise ReplyTimeout(f"no reply to {msg.op} {msg.skill} within {timeout:.3f} s") from None
        except OSError as exc:
            self.closed = True
            raise SkillConnectionError(f"connection lost: {exc}") from None

    def close(self):
        super().close()
        try:
            self._reader.close()
            self.sock.close()
        except OSError:
            pass


class _RemoteLeaf(LeafNode):
    def __init__(self, name, skill, conn, reply_timeout=DEFAULT_REPLY_TIMEOUT, ports=None):
        super().__init__(name, ports)
        self.skill = skill
        self.conn = conn
        self.reply_timeout = reply_timeout

    def _args(self):
        args = {}
        for spec in self.ports:
            if spec.direction == "in":
                args[spec.name] = format_value(self.get_input(spec.name))
        return args

    def _observe(self, direction, msg):
        ctx = self.ctx
        if ctx is not None:
            ctx.emit(self.path, tr.SKILL_MSG, f"{direction}:{msg.op}:{msg.payload}")

    def _request(self, ctx, op, args=None, timeout=None):
        """Reply message, or None after annotating a transport failure."""
        try:
            return self.conn.request(op, self.skill, args, timeout or self.reply_timeout, self._observe)
        except SkillConnectionError as exc:
            self.annotate(ctx, f"skill {self.skill} {op}: {exc}")
            if not isinstance(exc, ReplyTimeout):
                ctx.flag_unhealthy(self.path, str(exc))
            return None

    def _result(self, ctx, reply):
        if reply is None:
            return FAILURE
        if reply.op == "error":
            self.annotate(ctx, f"skill {self.skill}: {reply.payload}")
            return FAILURE
        if reply.op != "result":
            self.annotate(ctx, f"skill {self.skill}: unexpected {reply.op} {reply.payload}")
            return FAILURE
        for spec in self.ports:
            if spec.direction == "out" and spec.name in reply.args and spec.name in self.bindings:
                self.set_output(spec.name, parse_literal(reply.args[spec.name], spec.type))
        return SUCCESS if reply.payload == "success" else FAILURE


class RemoteCondition(_RemoteLeaf):
    kind = "condition"

    def _tick(self, ctx):
        return self._result(ctx, self._request(ctx, "start", self._args()))


class RemoteAction(_RemoteLeaf):
    def __init__(self, name, skill, conn, reply_timeout=DEFAULT_REPLY_TIMEOUT, ports=None):
        super().__init__(name, skill, conn, reply_timeout, ports)
        self.started = False
        self.abort_count = 0

    def _tick(self, ctx):
        if not self.started:
            reply = self._request(ctx, "start", self._args())
            if reply is not None and reply.op == "ack":
                self.started = True
                return RUNNING
            return self._result(ctx, reply)
        reply = self._request(ctx, "status")
        if reply is not None and reply.op == "status":
            if reply.payload == "running":
                return RUNNING
            self.started = False
            self.annotate(ctx, f"skill {self.skill} reported {reply.payload}")
            return FAILURE
        self.started = False
        return self._result(ctx, reply)

    def _halt(self, ctx):
        if not self.started:
            return
        self.started = False
        self.abort_count += 1
        reply = self._request(ctx, "stop", timeout=ctx.halt_timeout)
        if reply is None or reply.op != "ack":
            raise HaltTimeout(self.path, ctx.halt_timeout)

    def _clear(self):
        self.started = False


# port catalog of the skills served by the simulated server
SKILL_PORTS = {
    "ObjectGrasped": ("condition", (InputPort("hand", default="left"),)),
    "CloseToPose": ("condition", (InputPort("position", "pose"), InputPort("threshold", "float"))),
    "ObjectAtPose": ("condition", (InputPort("position", "pose"), InputPort("threshold", "float"))),
    "GotoPose": ("action", (InputPort("goal", "pose"),)),
    "DetectObject": ("action", (OutputPort("pose", "pose"),)),
    "Fetch": ("action", (InputPort("hand", default="left"),)),
    "Release": ("action", (InputPort("hand", default="left"),)),
}


def register_skill_leaves(registry, conn, catalog=None, reply_timeout=DEFAULT_REPLY_TIMEOUT):
    """Register one remote leaf type per skill in ``catalog``."""
    for skill, (kind, ports) in (catalog or SKILL_PORTS).items():
        cls = RemoteCondition if kind == "condition" else RemoteAction

        def factory(label, cls=cls, skill=skill, ports=ports):
            return cls(label, skill, conn, reply_timeout, ports)

        registry.register(skill, factory, kind, ports)
    return registry
