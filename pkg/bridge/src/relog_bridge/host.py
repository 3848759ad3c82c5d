"""Plugin host event loop.

Reads line-delimited JSON requests from stdin and answers each on stdout
(one compact JSON document per line, UTF-8). A handshake must precede
every other method; the host serves until shutdown or EOF.
"""

from __future__ import annotations

import json
import sys
from typing import Optional, TextIO

from relog_bridge.protocol import (
    ERR_INVALID_REQUEST, ERR_PLUGIN, ERR_UNKNOWN_METHOD, PROTOCOL_VERSION,
    PredicateDecl, ProtocolError, decode_value, encode_value, response,
)
from relog_bridge.sdk import Plugin


class Host:
    def __init__(self, plugin: Plugin):
        self.plugin = plugin
        self.handles: dict[str, object] = {
            name: pred.eval_fn for name, pred in plugin.predicates.items()}
        self.handle_counter = 0
        self.handshaken = False
        self.seen_ids: set[int] = set()

    def handle_request(self, line: str) -> Optional[str]:
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            return response(None, error=ProtocolError(
                ERR_INVALID_REQUEST, f"malformed JSON: {exc}"))
        request_id = doc.get("id")
        method = doc.get("method")
        params = doc.get("params") or {}
        try:
            if not isinstance(request_id, int):
                raise ProtocolError(ERR_INVALID_REQUEST, "request needs an integer id")
            if request_id in self.seen_ids:
                raise ProtocolError(ERR_INVALID_REQUEST,
                                    f"request id {request_id} was already used")
            self.seen_ids.add(request_id)
            if method == "handshake":
                return response(request_id, self._handshake(params))
            if not self.handshaken:
                raise ProtocolError(ERR_INVALID_REQUEST,
                                    "handshake must precede other methods")
            if method == "fa_apply":
                return response(request_id, self._fa_apply(params))
            if method == "fp_eval":
                return response(request_id, self._fp_eval(params))
            if method == "shutdown":
                return None
            raise ProtocolError(ERR_UNKNOWN_METHOD, f"unknown method {method!r}")
        except ProtocolError as exc:
            return response(request_id, error=exc)
        except Exception as exc:  # noqa: BLE001 - plugin failures cross the wire
            return response(request_id, error=ProtocolError(ERR_PLUGIN, str(exc)))

    def _handshake(self, params: dict) -> dict:
        if params.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(
                ERR_INVALID_REQUEST,
                f"unsupported protocol {params.get('protocol')!r}")
        self.handshaken = True
        return self.plugin.manifest()

    def _fa_apply(self, params: dict) -> dict:
        name = params.get("attribute")
        apply_fn = self.plugin.attributes.get(name)
        if apply_fn is None:
            raise ProtocolError(ERR_PLUGIN, f"unknown attribute '{name}'")
        decl = PredicateDecl.from_json(params.get("predicate") or {})
        pos_args = params.get("pos_args") or []
        kw_args = params.get("kw_args") or {}
        eval_fn = apply_fn(decl, pos_args, kw_args)
        handle = f"{name}#{self.handle_counter}"
        self.handle_counter += 1
        self.handles[handle] = eval_fn
        return {"fp_handle": handle}

    def _fp_eval(self, params: dict) -> dict:
        handle = params.get("fp_handle")
        eval_fn = self.handles.get(handle)
        if eval_fn is None:
            raise ProtocolError(ERR_PLUGIN, f"unknown fp_handle '{handle}'")
        bound = tuple(decode_value(v) for v in params.get("bound") or [])
        facts = []
        for prob, values in eval_fn(bound):
            facts.append({
                **({"prob": prob} if prob is not None else {}),
                "tuple": [encode_value(v) for v in values],
            })
        return {"facts": facts}


def serve(plugin: Plugin, stdin: Optional[TextIO] = None,
          stdout: Optional[TextIO] = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    host = Host(plugin)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        reply = host.handle_request(line)
        if reply is None:  # shutdown
            doc = json.loads(line)
            stdout.write(response(doc.get("id"), {}) + "\n")
            stdout.flush()
            return
        stdout.write(reply + "\n")
        stdout.flush()
