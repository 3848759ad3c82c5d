"""Client for out-of-process plugin hosts.

Plugins are spawned from a shell command and speak newline-delimited
JSON over stdio: handshake, fa_apply, fp_eval, shutdown. Tensors cross
the wire as base64 little-endian f32 with an explicit shape.
"""

from __future__ import annotations

import base64
import datetime as _dt
import json
import select
import shlex
import subprocess

from relog.errors import BridgeIoError, BridgeTimeoutError, ForeignEvalError, MalformedForeignOutput
from relog.runtime.values import Duration, Tensor, datetime_to_text, parse_datetime
from relog.syntax import ast

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_MS = 60_000


def encode_wire_value(value):
    if isinstance(value, Tensor):
        return {"tensor": {"shape": list(value.shape),
                           "data_b64": base64.b64encode(value.to_bytes()).decode()}}
    if isinstance(value, _dt.datetime):
        return {"datetime": datetime_to_text(value)}
    if isinstance(value, Duration):
        return {"duration": value.canonical()}
    if isinstance(value, (bool, int, float, str)):
        return value
    raise BridgeIoError(f"cannot send value of type {type(value).__name__} over the bridge")


def decode_wire_value(raw):
    if isinstance(raw, dict):
        if "tensor" in raw:
            spec = raw["tensor"]
            return Tensor.from_bytes(spec["shape"], base64.b64decode(spec["data_b64"]))
        if "datetime" in raw:
            return parse_datetime(raw["datetime"])
        if "duration" in raw:
            return Duration.parse(raw["duration"])
    return raw


class BridgeConnection:
    def __init__(self, command: str, timeout_ms: int = DEFAULT_TIMEOUT_MS, cwd=None):
        self.command = command
        self.timeout_ms = timeout_ms
        try:
            self.proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1, cwd=cwd)
        except OSError as exc:
            raise BridgeIoError(f"cannot launch plugin '{command}': {exc}")
        self._next_id = 0
        self.manifest = self._handshake()
        self.plugin_name = self.manifest.get("name", command)

    # -- protocol ------------------------------------------------------------

    def _call(self, method: str, params: dict):
        self._next_id += 1
        request_id = self._next_id
        line = json.dumps({"id": request_id, "method": method, "params": params},
                          separators=(",", ":"))
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeIoError(f"plugin '{self.command}' is not accepting requests: {exc}")
        response = self._read_line()
        try:
            doc = json.loads(response)
        except json.JSONDecodeError as exc:
            raise BridgeIoError(f"malformed plugin response: {exc}")
        if doc.get("id") != request_id:
            raise BridgeIoError(
                f"plugin answered id {doc.get('id')} to request {request_id}")
        if "error" in doc:
            err = doc["error"] or {}
            code = err.get("code")
            message = err.get("message", "plugin error")
            if code == 1000:
                raise ForeignEvalError(self.plugin_name, message)
            raise BridgeIoError(f"plugin error {code}: {message}")
        return doc.get("result")

    def _read_line(self) -> str:
        timeout_s = self.timeout_ms / 1000.0
        ready, _, _ = select.select([self.proc.stdout], [], [], timeout_s)
        if not ready:
            raise BridgeTimeoutError(
                f"plugin '{self.command}' timed out after {self.timeout_ms} ms")
        line = self.proc.stdout.readline()
        if line == "":
            raise BridgeIoError(f"plugin '{self.command}' closed its output")
        return line

    def _handshake(self) -> dict:
        result = self._call("handshake", {"protocol": PROTOCOL_VERSION})
        if not isinstance(result, dict) or result.get("protocol") != PROTOCOL_VERSION:
            raise BridgeIoError(
                f"plugin '{self.command}' speaks protocol "
                f"{result.get('protocol') if isinstance(result, dict) else result!r}")
        return result

    # -- foreign interface ------------------------------------------------------

    def fa_apply(self, attribute: str, pos_args: list, kw_args: dict,
                 decl: ast.PredicateTypeDecl) -> str:
        predicate = {
            "name": decl.name,
            "args": [
                {**({"name": a.name} if a.name else {}),
                 "type": a.ty.name,
                 "adornment": "bound" if a.adornment is ast.Adornment.BOUND else "free"}
                for a in decl.args
            ],
        }
        result = self._call("fa_apply", {
            "attribute": attribute,
            "pos_args": pos_args,
            "kw_args": kw_args,
            "predicate": predicate,
        })
        handle = (result or {}).get("fp_handle")
        if not isinstance(handle, str):
            raise BridgeIoError("fa_apply returned no fp_handle")
        return handle

    def fp_eval(self, handle: str, bound_values: tuple, bound_types: list[str]):
        params = {"fp_handle": handle,
                  "bound": [encode_wire_value(v) for v in bound_values]}
        result = self._call("fp_eval", params)
        facts = (result or {}).get("facts")
        if not isinstance(facts, list):
            raise MalformedForeignOutput(handle, "fp_eval returned no facts list")
        out = []
        for fact in facts:
            if not isinstance(fact, dict) or "tuple" not in fact:
                raise MalformedForeignOutput(handle, f"bad fact row {fact!r}")
            prob = fact.get("prob")
            out.append((prob, tuple(decode_wire_value(v) for v in fact["tuple"])))
        return out

    def standalone_predicates(self) -> list[dict]:
        return list(self.manifest.get("predicates", []))

    def close(self) -> None:
        try:
            if self.proc.poll() is None:
                try:
                    self._call("shutdown", {})
                except BridgeIoError:
                    pass
                self.proc.stdin.close()
                self.proc.wait(timeout=5)
        except Exception:
            self.proc.kill()
