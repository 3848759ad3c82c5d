"""Value encoding between runtime values and JSON fact/fixture files.

Wire shapes: DateTime as ISO-8601 strings, Tensor as
``{"shape": [...], "data": [...]}``, entities as pretty-printed term
strings re-parsed against their declared ADT.
"""

from __future__ import annotations

import datetime as _dt
import json
import math

from relog.errors import FactTypeError, FileFormatError
from relog.runtime.values import Duration, Entity, Tensor, datetime_to_text, parse_datetime
from relog.syntax.adt_text import parse_adt_value
from relog.typesys.types import INT_RANGES, is_float_type, is_int_type


def decode_value(raw, type_name: str, registry, store):
    """JSON value -> runtime value of the given canonical type."""
    if is_int_type(type_name):
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise FactTypeError(f"expected {type_name}, got {raw!r}")
        lo, hi = INT_RANGES[type_name]
        if not (lo <= raw <= hi):
            raise FactTypeError(f"{raw} out of range for {type_name}")
        return raw
    if is_float_type(type_name):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise FactTypeError(f"expected {type_name}, got {raw!r}")
        value = float(raw)
        if math.isnan(value):
            raise FactTypeError("NaN is not a valid value")
        return value
    if type_name == "bool":
        if not isinstance(raw, bool):
            raise FactTypeError(f"expected bool, got {raw!r}")
        return raw
    if type_name == "char":
        if not isinstance(raw, str) or len(raw) != 1:
            raise FactTypeError(f"expected char, got {raw!r}")
        return raw
    if type_name == "String":
        if not isinstance(raw, str):
            raise FactTypeError(f"expected String, got {raw!r}")
        return raw
    if type_name == "DateTime":
        if isinstance(raw, str):
            return parse_datetime(raw)
        raise FactTypeError(f"expected DateTime string, got {raw!r}")
    if type_name == "Duration":
        if isinstance(raw, str):
            return Duration.parse(raw)
        raise FactTypeError(f"expected Duration string, got {raw!r}")
    if type_name == "Tensor":
        if isinstance(raw, dict) and "shape" in raw and "data" in raw:
            return Tensor(raw["shape"], raw["data"])
        raise FactTypeError(f"expected Tensor object, got {raw!r}")
    if registry.is_adt(type_name):
        if isinstance(raw, str):
            return store.intern_tree(parse_adt_value(raw, type_name, registry))
        raise FactTypeError(f"expected {type_name} term string, got {raw!r}")
    raise FactTypeError(f"cannot decode values of type '{type_name}'")


def encode_value(value, store):
    """Runtime value -> JSON-serializable form."""
    if isinstance(value, bool) or isinstance(value, int) or isinstance(value, str):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, _dt.datetime):
        return datetime_to_text(value)
    if isinstance(value, Duration):
        return value.canonical()
    if isinstance(value, Tensor):
        return {"shape": list(value.shape), "data": list(value.data)}
    if isinstance(value, Entity):
        return store.to_text(value)
    raise FactTypeError(f"cannot encode {type(value).__name__}")


def validate_value(value, type_name: str, registry) -> None:
    """Sanity gate applied when tuples enter a relation."""
    if isinstance(value, float) and math.isnan(value):
        raise FactTypeError("NaN is not a valid tuple value")
    if is_int_type(type_name) and isinstance(value, int) and not isinstance(value, bool):
        lo, hi = INT_RANGES[type_name]
        if not (lo <= value <= hi):
            raise FactTypeError(f"{value} out of range for {type_name}")


def load_fact_file(path: str, relations, registry, store):
    """Parse an external fact file.

    Returns a list of (relation, prob | None, value tuple). The file holds
    one ``{"relation": ..., "facts": [...]}`` object or a list of them.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"cannot read fact file '{path}': {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"invalid JSON in fact file '{path}': {exc}")
    blocks = doc if isinstance(doc, list) else [doc]
    out = []
    for block in blocks:
        if not isinstance(block, dict) or "relation" not in block or "facts" not in block:
            raise FileFormatError(
                f"fact file '{path}': each block needs 'relation' and 'facts'")
        name = block["relation"]
        sig = relations.get(name)
        if sig is None:
            raise FileFormatError(f"fact file '{path}': unknown relation '{name}'")
        for row in block["facts"]:
            if not isinstance(row, dict) or "tuple" not in row:
                raise FileFormatError(f"fact file '{path}': fact rows need 'tuple'")
            prob = row.get("prob")
            if prob is not None and not isinstance(prob, (int, float)):
                raise FileFormatError(f"fact file '{path}': prob must be a number")
            raw_tuple = row["tuple"]
            if len(raw_tuple) != sig.arity:
                raise FileFormatError(
                    f"fact file '{path}': relation '{name}' expects arity "
                    f"{sig.arity}, got {len(raw_tuple)}")
            values = tuple(decode_value(raw, ty, registry, store)
                           for raw, ty in zip(raw_tuple, sig.arg_types))
            out.append((name, prob, values))
    return out
