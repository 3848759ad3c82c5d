"""Mock model plugin: serves the same fixture files as the core's
`@mock_*` attributes, so bridged and in-process pipelines agree.

Also exports the `echo` standalone predicate used by integration tests.
"""

from __future__ import annotations

import json

from relog_bridge.protocol import PredicateDecl, WireTensor, tensor_from_json
from relog_bridge.sdk import Plugin, keywords

plugin = Plugin("mock_models")


def canonical_config(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def canonical_value(value, type_name: str):
    if type_name == "Tensor":
        if isinstance(value, dict):
            value = tensor_from_json(value)
        if isinstance(value, WireTensor):
            return ("tensor", value.content_hash())
        raise ValueError(f"expected a tensor, got {value!r}")
    if type_name in ("f32", "f64"):
        return ("float", repr(float(value)))
    if type_name == "bool":
        return ("bool", bool(value))
    if type_name in ("i8", "i16", "i32", "i64", "isize",
                     "u8", "u16", "u32", "u64", "usize"):
        return ("int", int(value))
    return ("str", str(value))


class Fixture:
    def __init__(self, path: str, bound_types: list[str]):
        with open(path, "r", encoding="utf-8") as fh:
            entries = json.load(fh)
        self.rows: dict[tuple, tuple] = {}
        for entry in entries:
            key = tuple(canonical_value(v, t)
                        for v, t in zip(entry["input"], bound_types))
            config = entry.get("config")
            config_key = canonical_config(config) if config is not None else None
            outputs = [(row.get("prob"), tuple(row["tuple"]))
                       for row in entry["outputs"]]
            self.rows[key] = (config_key, outputs)

    def lookup(self, config_key: str, bound: tuple, bound_types: list[str]):
        key = tuple(canonical_value(v, t) for v, t in zip(bound, bound_types))
        hit = self.rows.get(key)
        if hit is None:
            raise LookupError(f"no fixture entry for {key!r}")
        entry_config, outputs = hit
        if entry_config is not None and entry_config != config_key:
            raise LookupError(f"fixture config mismatch for {key!r}")
        return outputs


def _fixture_eval(decl: PredicateDecl, kw_args: dict, transform=None):
    path = kw_args.get("fixture")
    if not path:
        raise ValueError("fixture=\"<path>\" is required")
    bound_types = [a.type for a in decl.bound()]
    table = Fixture(path, bound_types)
    config_key = canonical_config({k: v for k, v in kw_args.items() if k != "fixture"})

    def evaluate(bound: tuple):
        rows = table.lookup(config_key, bound, bound_types)
        if transform is not None:
            rows = transform(rows)
        return list(rows)

    return evaluate


def _threshold_flatten(kw_args: dict):
    threshold = kw_args.get("score_threshold")
    flatten = bool(kw_args.get("flatten_probability", False))

    def transform(rows):
        out = []
        for prob, values in rows:
            raw = 1.0 if prob is None else prob
            if threshold is not None and raw < threshold:
                continue
            out.append((1.0 if flatten else prob, values))
        return out

    return transform


def _fold_positional(pos_args, kw_args, slot: str):
    kw = dict(kw_args)
    if pos_args:
        if len(pos_args) > 1:
            raise ValueError("at most one positional argument")
        kw[slot] = pos_args[0]
    return kw


@plugin.attribute("mock_classify")
@keywords("labels", "prompt", "fixture", "score_threshold", "flatten_probability",
          positional=1)
def mock_classify(decl, pos_args, kw_args):
    kw = _fold_positional(pos_args, kw_args, "labels")
    assert len(decl.args) == 2, "classify expects (bound Tensor, String)"
    assert decl.args[0].type == "Tensor" and decl.args[0].adornment == "bound"
    assert decl.args[1].type == "String"
    return _fixture_eval(decl, kw, _threshold_flatten(kw))


@plugin.attribute("mock_segment")
@keywords("labels", "fixture", "expand_crop_region", "limit", "score_threshold",
          "flatten_probability", positional=1)
def mock_segment(decl, pos_args, kw_args):
    kw = _fold_positional(pos_args, kw_args, "labels")
    assert decl.args and decl.args[0].type == "Tensor" \
        and decl.args[0].adornment == "bound"
    base = _threshold_flatten(kw)
    limit = kw.get("limit")

    def transform(rows):
        rows = base(rows)
        return rows[:int(limit)] if limit is not None else rows

    return _fixture_eval(decl, kw, transform)


@plugin.attribute("mock_llm")
@keywords("prompt", "examples", "fixture", "model", positional=1)
def mock_llm(decl, pos_args, kw_args):
    kw = _fold_positional(pos_args, kw_args, "prompt")
    assert decl.bound() and all(a.type == "String" for a in decl.bound())
    return _fixture_eval(decl, kw)


@plugin.attribute("mock_llm_extract")
@keywords("prompt", "examples", "fixture", "model", positional=1)
def mock_llm_extract(decl, pos_args, kw_args):
    kw = _fold_positional(pos_args, kw_args, "prompt")
    assert decl.bound() and decl.bound()[0].type == "String"
    assert decl.free(), "extraction needs free arguments"
    return _fixture_eval(decl, kw)


@plugin.attribute("mock_semantic_parse")
@keywords("header", "prompt", "examples", "fixture", "target", "model",
          positional=1)
def mock_semantic_parse(decl, pos_args, kw_args):
    kw = _fold_positional(pos_args, kw_args, "header")
    assert len(decl.bound()) == 1 and decl.bound()[0].type == "String"
    assert len(decl.free()) == 1
    return _fixture_eval(decl, kw)


@plugin.attribute("mock_encode")
@keywords("model", "fixture", positional=1)
def mock_encode(decl, pos_args, kw_args):
    kw = _fold_positional(pos_args, kw_args, "model")
    assert len(decl.bound()) == 1 and decl.bound()[0].type == "String"
    assert len(decl.free()) == 1 and decl.free()[0].type == "Tensor"
    eval_raw = _fixture_eval(decl, kw)

    def evaluate(bound: tuple):
        out = []
        for prob, values in eval_raw(bound):
            converted = tuple(
                tensor_from_json(v) if isinstance(v, dict) and "shape" in v else v
                for v in values)
            out.append((prob, converted))
        return out

    return evaluate


@plugin.predicate("echo", [("String", "bound"), ("String", "free")])
def echo(bound: tuple):
    yield (None, (bound[0],))
