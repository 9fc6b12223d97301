"""Newline-delimited JSON messages exchanged with a skill server.

Every line is one UTF-8 JSON object with exactly the fields
``id, op, skill, args, payload``. Keys are emitted in that order with
compact separators so lines are byte-stable.
"""

import json
from dataclasses import dataclass, field

from ..errors import DecodeError

OPS = ("start", "stop", "status", "result", "ack", "error")
REQUESTS = ("start", "stop", "status")
STATUS_PAYLOADS = ("idle", "running", "success", "failure")
RESULT_PAYLOADS = ("success", "failure")
FIELDS = ("id", "op", "skill", "args", "payload")


@dataclass(frozen=True)
class SkillMessage:
    id: int
    op: str
    skill: str
    args: dict = field(default_factory=dict)
    payload: str = ""

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}")
        if self.op == "result" and self.payload not in RESULT_PAYLOADS:
            raise ValueError(f"result payload must be success/failure, got {self.payload!r}")
        if self.op == "status" and self.payload and self.payload not in STATUS_PAYLOADS:
            raise ValueError(f"bad status payload {self.payload!r}")

    def reply(self, op, payload="", args=None) -> "SkillMessage":
        return SkillMessage(self.id, op, self.skill, dict(args or {}), payload)


def encode(msg: SkillMessage) -> bytes:
    obj = {"id": msg.id, "op": msg.op, "skill": msg.skill, "args": dict(msg.args), "payload": msg.payload}
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8") + b"\n"


def decode(line) -> SkillMessage:
    raw = line
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError:
            raise DecodeError("line is not UTF-8", raw) from None
    line = line.rstrip("\r\n")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"malformed JSON ({exc.msg})", raw) from None
    if not isinstance(obj, dict) or sorted(obj) != sorted(FIELDS):
        raise DecodeError(f"message must have exactly the fields {', '.join(FIELDS)}", raw)
    msg_id, op, skill, args, payload = (obj[k] for k in FIELDS)
    if not isinstance(msg_id, int) or isinstance(msg_id, bool) or msg_id < 0:
        raise DecodeError("id must be a non-negative integer", raw)
    if not isinstance(skill, str) or not isinstance(payload, str):
        raise DecodeError("skill and payload must be strings", raw)
    if not isinstance(args, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in args.items()):
        raise DecodeError("args must map strings to strings", raw)
    try:
        return SkillMessage(msg_id, op, skill, args, payload)
    except ValueError as exc:
        raise DecodeError(str(exc), raw) from None
