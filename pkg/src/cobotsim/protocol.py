"""Versioned JSON wire protocol and canonical state hashing.

Every frame is one JSON text envelope {"v", "type", "seq", "sid", "t",
"payload"}. seq is per-sender strictly monotone; the server never crashes
on bad input, it answers with a typed error frame. Snapshot hashing uses
64-bit FNV-1a over a canonical (sorted-key, compact) JSON serialization so
replays can be compared bitwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ._kernels import fnv1a64
from .errors import ProtocolError

PROTOCOL_VERSION = 1

# client -> server
TYPE_HELLO = "hello"
TYPE_JOIN = "join"
TYPE_SET_LAMBDA = "set_lambda"
TYPE_SET_MODE = "set_mode"
TYPE_NL_COMMAND = "nl_command"
TYPE_WRENCH = "wrench"
TYPE_GRASP = "grasp"
TYPE_RELEASE = "release"
TYPE_ASSERT_TRIPLE = "assert_triple"
TYPE_INJECT_LATENCY = "inject_latency"
# server -> client
TYPE_SNAPSHOT = "snapshot"
TYPE_STATE = "state"
TYPE_ACK = "ack"
TYPE_ERROR = "error"

VALID_TYPES = frozenset(
    {
        TYPE_HELLO,
        TYPE_JOIN,
        TYPE_SNAPSHOT,
        TYPE_STATE,
        TYPE_SET_LAMBDA,
        TYPE_SET_MODE,
        TYPE_NL_COMMAND,
        TYPE_WRENCH,
        TYPE_GRASP,
        TYPE_RELEASE,
        TYPE_ASSERT_TRIPLE,
        TYPE_INJECT_LATENCY,
        TYPE_ACK,
        TYPE_ERROR,
    }
)

COMMAND_TYPES = frozenset(
    {
        TYPE_SET_LAMBDA,
        TYPE_SET_MODE,
        TYPE_NL_COMMAND,
        TYPE_WRENCH,
        TYPE_GRASP,
        TYPE_RELEASE,
        TYPE_ASSERT_TRIPLE,
        TYPE_INJECT_LATENCY,
    }
)


@dataclass(frozen=True)
class Envelope:
    type: str
    seq: int
    sid: str
    payload: dict = field(default_factory=dict)
    t: int = 0
    v: int = PROTOCOL_VERSION

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "type": self.type,
            "seq": self.seq,
            "sid": self.sid,
            "t": self.t,
            "payload": self.payload,
        }


def canonical_json(doc: Any) -> str:
    """Deterministic serialization: sorted keys, no whitespace."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def state_hash(doc: Any) -> str:
    """64-bit FNV-1a of the canonical serialization, as 16 hex digits."""
    return format(fnv1a64(canonical_json(doc).encode("utf-8")), "016x")


def encode_envelope(env: Envelope) -> str:
    return canonical_json(env.to_dict())


def _finite_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError("bad_payload", f"{where} must be a number")
    out = float(value)
    if not math.isfinite(out):
        raise ProtocolError("bad_payload", f"{where} must be finite")
    return out


def _text(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ProtocolError("bad_payload", f"{where} must be a non-empty string")
    return value


def _vector2(value: Any, where: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ProtocolError("bad_payload", f"{where} must be a 2-element array")
    return [_finite_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _validate_set_lambda(p: dict) -> dict:
    value = _finite_number(p.get("value"), "payload.value")
    if not (0.0 <= value <= 1.0):
        raise ProtocolError("bad_payload", f"payload.value {value} outside [0, 1]")
    return {"value": value}


def _validate_set_mode(p: dict) -> dict:
    source = _text(p.get("source"), "payload.source")
    if source not in ("shared_control", "shared_autonomy"):
        raise ProtocolError("bad_payload", f"payload.source {source!r} unknown")
    return {"source": source}


def _validate_nl_command(p: dict) -> dict:
    if not isinstance(p.get("text"), str):
        raise ProtocolError("bad_payload", "payload.text must be a string")
    return {"text": p["text"]}


def _validate_wrench(p: dict) -> dict:
    return {"f": _vector2(p.get("f"), "payload.f")}


def _validate_object_ref(p: dict) -> dict:
    return {"object_id": _text(p.get("object_id"), "payload.object_id")}


def _validate_assert_triple(p: dict) -> dict:
    confidence = _finite_number(p.get("confidence"), "payload.confidence")
    if not (0.0 < confidence <= 1.0):
        raise ProtocolError(
            "bad_payload", f"payload.confidence {confidence} outside (0, 1]"
        )
    return {
        "head": _text(p.get("head"), "payload.head"),
        "relation": _text(p.get("relation"), "payload.relation"),
        "tail": _text(p.get("tail"), "payload.tail"),
        "confidence": confidence,
    }


def _validate_inject_latency(p: dict) -> dict:
    base = _finite_number(p.get("base_ms", 0.0), "payload.base_ms")
    jitter = _finite_number(p.get("jitter_ms", 0.0), "payload.jitter_ms")
    loss = _finite_number(p.get("loss", 0.0), "payload.loss")
    seed = p.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ProtocolError("bad_payload", "payload.seed must be an integer")
    if base < 0 or jitter < 0:
        raise ProtocolError("bad_payload", "delays must be >= 0")
    if not (0.0 <= loss < 1.0):
        raise ProtocolError("bad_payload", f"payload.loss {loss} outside [0, 1)")
    return {"base_ms": base, "jitter_ms": jitter, "loss": loss, "seed": seed}


def _validate_hello(p: dict) -> dict:
    return {"client": _text(p.get("client"), "payload.client")}


def _validate_join(p: dict) -> dict:
    return {"session": _text(p.get("session"), "payload.session")}


_VALIDATORS: dict[str, Callable[[dict], dict]] = {
    TYPE_SET_LAMBDA: _validate_set_lambda,
    TYPE_SET_MODE: _validate_set_mode,
    TYPE_NL_COMMAND: _validate_nl_command,
    TYPE_WRENCH: _validate_wrench,
    TYPE_GRASP: _validate_object_ref,
    TYPE_RELEASE: _validate_object_ref,
    TYPE_ASSERT_TRIPLE: _validate_assert_triple,
    TYPE_INJECT_LATENCY: _validate_inject_latency,
    TYPE_HELLO: _validate_hello,
    TYPE_JOIN: _validate_join,
}


def decode_envelope(text: str) -> Envelope:
    """Parse and validate one wire frame; malformed input raises
    ProtocolError with a typed code, never anything else."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ProtocolError("bad_json", f"frame is not valid JSON: {exc}") from None
    return envelope_from_dict(doc)


def envelope_from_dict(doc: Any) -> Envelope:
    if not isinstance(doc, dict):
        raise ProtocolError("bad_frame", "frame must be a JSON object")
    v = doc.get("v")
    if v != PROTOCOL_VERSION:
        raise ProtocolError("bad_version", f"protocol version {v!r} unsupported")
    msg_type = doc.get("type")
    if not isinstance(msg_type, str) or msg_type not in VALID_TYPES:
        raise ProtocolError("unknown_type", f"message type {msg_type!r} unknown")
    seq = doc.get("seq")
    if isinstance(seq, bool) or not isinstance(seq, int) or seq < 0:
        raise ProtocolError("bad_seq", f"seq {seq!r} must be a non-negative integer")
    sid = doc.get("sid")
    if not isinstance(sid, str):
        raise ProtocolError("bad_frame", "sid must be a string")
    t = doc.get("t", 0)
    if isinstance(t, bool) or not isinstance(t, int):
        raise ProtocolError("bad_frame", "t must be an integer (sender ms)")
    payload = doc.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("bad_payload", "payload must be a JSON object")
    validator = _VALIDATORS.get(msg_type)
    if validator is not None:
        payload = validator(payload)
    return Envelope(type=msg_type, seq=seq, sid=sid, payload=payload, t=t, v=v)


def make_ack(sid: str, seq: int, of_seq: int, note: Optional[str] = None) -> Envelope:
    payload: dict = {"of_seq": of_seq}
    if note is not None:
        payload["note"] = note
    return Envelope(type=TYPE_ACK, seq=seq, sid=sid, payload=payload)


def make_error(
    sid: str, seq: int, code: str, reason: str, of_seq: Optional[int] = None
) -> Envelope:
    payload: dict = {"code": code, "reason": reason}
    if of_seq is not None:
        payload["of_seq"] = of_seq
    return Envelope(type=TYPE_ERROR, seq=seq, sid=sid, payload=payload)
