"""Fixture tables: recorded input -> output maps standing in for model calls.

Fixture file schema (JSON):
  [{"config": {...}, "input": [<bound values>],
    "outputs": [{"prob": <optional float>, "tuple": [<free values>]}]}]

An entry without "config" matches any attribute configuration. Keys are
canonicalized: configs as sorted-key JSON, tensors by content hash,
entities by canonical term text.
"""

from __future__ import annotations

import hashlib
import json

from relog.errors import FileFormatError, FixtureMissError
from relog.runtime.values import Duration, Tensor, parse_datetime
from relog.syntax.adt_text import parse_adt_value, term_to_text
from relog.typesys.types import is_float_type, is_int_type


def canonical_config(config: dict) -> str:
    def clean(v):
        if isinstance(v, tuple):
            return [clean(x) for x in v]
        if isinstance(v, list):
            return [clean(x) for x in v]
        return v
    return json.dumps({k: clean(v) for k, v in sorted(config.items())},
                      sort_keys=True, separators=(",", ":"))


def canonical_value_key(value, type_name: str, registry, store=None) -> object:
    """Stable lookup key for one bound value (runtime or fixture-file form)."""
    if type_name == "Tensor":
        if isinstance(value, dict):
            value = Tensor(value["shape"], value["data"])
        if isinstance(value, Tensor):
            digest = hashlib.sha256()
            digest.update(json.dumps(list(value.shape)).encode())
            digest.update(value.to_bytes())
            return ("tensor", digest.hexdigest())
        raise FileFormatError(f"expected tensor, got {value!r}")
    if registry.is_adt(type_name):
        if isinstance(value, str):
            return ("term", term_to_text(parse_adt_value(value, type_name, registry)))
        if store is not None:
            return ("term", store.to_text(value))
        raise FileFormatError(f"cannot canonicalize entity {value!r}")
    if type_name == "DateTime":
        if isinstance(value, str):
            value = parse_datetime(value)
        return ("datetime", value.isoformat())
    if type_name == "Duration":
        if isinstance(value, str):
            value = Duration.parse(value)
        return ("duration", value.canonical())
    if is_int_type(type_name):
        return ("int", int(value))
    if is_float_type(type_name):
        return ("float", repr(float(value)))
    if type_name == "bool":
        return ("bool", bool(value))
    return ("str", str(value))


class FixtureTable:
    def __init__(self, path: str, bound_types: list[str], registry):
        self.path = path
        self.bound_types = bound_types
        self.registry = registry
        self._exact: dict[tuple, tuple[str, list]] = {}
        self._load()

    def _load(self) -> None:
        try:
            with open(self.path, "r", encoding="utf-8") as fh:
                entries = json.load(fh)
        except OSError as exc:
            raise FileFormatError(f"cannot read fixture '{self.path}': {exc.strerror or exc}")
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"invalid JSON in fixture '{self.path}': {exc}")
        if not isinstance(entries, list):
            raise FileFormatError(f"fixture '{self.path}' must be a JSON list")
        for entry in entries:
            if not isinstance(entry, dict) or "input" not in entry or "outputs" not in entry:
                raise FileFormatError(
                    f"fixture '{self.path}': entries need 'input' and 'outputs'")
            config = entry.get("config")
            config_key = canonical_config(config) if config is not None else None
            raw_input = entry["input"]
            if len(raw_input) != len(self.bound_types):
                raise FileFormatError(
                    f"fixture '{self.path}': input arity {len(raw_input)} does not "
                    f"match {len(self.bound_types)} bound arguments")
            input_key = tuple(
                canonical_value_key(v, t, self.registry)
                for v, t in zip(raw_input, self.bound_types))
            outputs = []
            total_prob = 0.0
            for row in entry["outputs"]:
                if not isinstance(row, dict) or "tuple" not in row:
                    raise FileFormatError(
                        f"fixture '{self.path}': outputs need 'tuple'")
                prob = row.get("prob")
                if prob is not None:
                    total_prob += float(prob)
                outputs.append((prob, list(row["tuple"])))
            if total_prob > 1.0 + 1e-6:
                raise FileFormatError(
                    f"fixture '{self.path}': output probabilities sum to "
                    f"{total_prob:.6g} > 1 for input {raw_input!r}")
            self._exact[input_key] = (config_key, outputs)

    def lookup(self, config_key: str, bound_values: tuple, store):
        input_key = tuple(
            canonical_value_key(v, t, self.registry, store)
            for v, t in zip(bound_values, self.bound_types))
        hit = self._exact.get(input_key)
        if hit is None:
            raise FixtureMissError(f"{input_key!r} in {self.path}")
        entry_config, outputs = hit
        if entry_config is not None and entry_config != config_key:
            raise FixtureMissError(
                f"{input_key!r} in {self.path} (config mismatch)")
        return outputs
