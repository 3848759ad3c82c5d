"""Wire protocol: newline-delimited JSON requests/responses over stdio.

Methods: handshake, fa_apply, fp_eval, shutdown. Exactly one response per
request id. Tensors travel as base64 little-endian f32 with an explicit
shape; values above 1 MiB are rejected with error code 1001.
"""

from __future__ import annotations

import base64
import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Optional

PROTOCOL_VERSION = 1

ERR_INVALID_REQUEST = -32600
ERR_UNKNOWN_METHOD = -32601
ERR_PLUGIN = 1000
ERR_VALUE_TOO_LARGE = 1001

MAX_TENSOR_BYTES = 1 << 20


class ProtocolError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class WireTensor:
    """Opaque tensor payload; mock plugins key fixtures by content hash."""

    shape: tuple[int, ...]
    data: bytes

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(json.dumps(list(self.shape)).encode())
        digest.update(self.data)
        return digest.hexdigest()

    def values(self) -> tuple[float, ...]:
        count = len(self.data) // 4
        return struct.unpack(f"<{count}f", self.data)


@dataclass
class ArgDecl:
    type: str
    adornment: str
    name: Optional[str] = None


@dataclass
class PredicateDecl:
    name: str
    args: list[ArgDecl]

    def bound(self) -> list[ArgDecl]:
        return [a for a in self.args if a.adornment == "bound"]

    def free(self) -> list[ArgDecl]:
        return [a for a in self.args if a.adornment != "bound"]

    @classmethod
    def from_json(cls, raw: dict) -> "PredicateDecl":
        args = [ArgDecl(a["type"], a.get("adornment", "free"), a.get("name"))
                for a in raw.get("args", [])]
        return cls(raw["name"], args)


def decode_value(raw):
    if isinstance(raw, dict):
        if "tensor" in raw:
            spec = raw["tensor"]
            data = base64.b64decode(spec["data_b64"])
            if len(data) > MAX_TENSOR_BYTES:
                raise ProtocolError(ERR_VALUE_TOO_LARGE,
                                    f"tensor of {len(data)} bytes exceeds 1 MiB")
            return WireTensor(tuple(spec["shape"]), data)
        if "datetime" in raw:
            return raw  # passed through opaque; mocks never inspect these
        if "duration" in raw:
            return raw
    return raw


def encode_value(value):
    if isinstance(value, WireTensor):
        if len(value.data) > MAX_TENSOR_BYTES:
            raise ProtocolError(ERR_VALUE_TOO_LARGE,
                                f"tensor of {len(value.data)} bytes exceeds 1 MiB")
        return {"tensor": {"shape": list(value.shape),
                           "data_b64": base64.b64encode(value.data).decode()}}
    return value


def tensor_from_json(spec: dict) -> WireTensor:
    """Build a WireTensor from the fact-file form {"shape": ..., "data": ...}."""
    data = struct.pack(f"<{len(spec['data'])}f", *spec["data"])
    return WireTensor(tuple(spec["shape"]), data)


def response(request_id, result=None, error: Optional[ProtocolError] = None) -> str:
    if error is not None:
        doc = {"id": request_id, "error": {"code": error.code, "message": error.message}}
    else:
        doc = {"id": request_id, "result": result}
    return json.dumps(doc, separators=(",", ":"))
