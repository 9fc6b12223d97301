import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from golden import GOLDEN
from reactree.errors import DecodeError
from reactree.skillwire.protocol import OPS, RESULT_PAYLOADS, STATUS_PAYLOADS, SkillMessage, decode, encode


@pytest.mark.parametrize("msg, line", GOLDEN, ids=[m.op + str(m.id) for m, _ in GOLDEN])
def test_golden_bytes(msg, line):
    assert encode(msg) == line
    assert decode(line) == msg


def test_one_line_with_five_fields():
    line = encode(GOLDEN[0][0])
    assert line.count(b"\n") == 1 and line.endswith(b"\n")
    for name in (b'"id"', b'"op"', b'"skill"', b'"args"', b'"payload"'):
        assert name in line


def test_decode_accepts_text_and_crlf():
    assert decode(GOLDEN[0][1].decode().rstrip("\n") + "\r\n") == GOLDEN[0][0]


BAD_LINES = {
    "truncated": b'{"id":1,"op":"start","skill":"Goto',
    "not an object": b"[1,2]",
    "empty": b"",
    "missing field": b'{"id":1,"op":"start","skill":"G","args":{}}',
    "extra field": b'{"id":1,"op":"start","skill":"G","args":{},"payload":"","x":1}',
    "unknown op": b'{"id":1,"op":"launch","skill":"G","args":{},"payload":""}',
    "bad result payload": b'{"id":1,"op":"result","skill":"G","args":{},"payload":"maybe"}',
    "bad status payload": b'{"id":1,"op":"status","skill":"G","args":{},"payload":"busy"}',
    "negative id": b'{"id":-1,"op":"ack","skill":"G","args":{},"payload":""}',
    "bool id": b'{"id":true,"op":"ack","skill":"G","args":{},"payload":""}',
    "string id": b'{"id":"1","op":"ack","skill":"G","args":{},"payload":""}',
    "numeric arg": b'{"id":1,"op":"start","skill":"G","args":{"x":1.0},"payload":""}',
    "args list": b'{"id":1,"op":"start","skill":"G","args":[],"payload":""}',
    "not utf-8": b'{"id":1,"op":"ack","skill":"\xff","args":{},"payload":""}',
}


@pytest.mark.parametrize("name", sorted(BAD_LINES))
def test_decode_errors_keep_line(name):
    with pytest.raises(DecodeError) as info:
        decode(BAD_LINES[name])
    assert info.value.line == BAD_LINES[name]


def test_invalid_messages_rejected_at_construction():
    with pytest.raises(ValueError):
        SkillMessage(1, "launch", "G")
    with pytest.raises(ValueError):
        SkillMessage(1, "result", "G", {}, "")


def test_reply_keeps_id_and_skill():
    reply = GOLDEN[0][0].reply("result", "success", {"k": "v"})
    assert (reply.id, reply.skill, reply.op, reply.args) == (1, "GotoPose", "result", {"k": "v"})


text = st.text(max_size=12)


@st.composite
def messages(draw):
    op = draw(st.sampled_from(OPS))
    if op == "result":
        payload = draw(st.sampled_from(RESULT_PAYLOADS))
    elif op == "status":
        payload = draw(st.sampled_from(("",) + STATUS_PAYLOADS))
    else:
        payload = draw(text)
    return SkillMessage(
        draw(st.integers(0, 2**53)), op, draw(text), draw(st.dictionaries(text, text, max_size=4)), payload
    )


@settings(max_examples=2000, deadline=None)
@given(messages())
def test_roundtrip_random_messages(msg):
    line = encode(msg)
    assert line.count(b"\n") == 1
    assert decode(line) == msg
