"""Built-in foreign functions and the core attribute library.

The `@mock_*` attributes make every model-driven pipeline runnable
offline: they validate the decorated predicate the way a real model
attribute would, then serve results from a fixture table instead of a
model. `@bridge` delegates to an out-of-process plugin; `@arith_eval`
exposes the safe arithmetic evaluator.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import re

from relog.errors import (
    AttributeArityError,
    AttributeRejectedDecl,
    FileFormatError,
    UnknownAttributeError,
)
from relog.ffi import arith
from relog.ffi.descriptors import (
    ForeignAttributeDescriptor,
    ForeignFunctionDescriptor,
    ForeignPredicateDescriptor,
)
from relog.ffi.fixtures import FixtureTable, canonical_config
from relog.ffi.registry import PluginRegistry
from relog.runtime.values import Duration, Tensor
from relog.syntax import ast


class _NoAdts:
    """Fixture canonicalization shim: ADT-typed bound arguments are not
    supported in fixture files (no pipeline needs them)."""

    def is_adt(self, name: str) -> bool:
        return False


def _display(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, _dt.datetime):
        from relog.runtime.values import datetime_to_text
        return datetime_to_text(value)
    if isinstance(value, Duration):
        return value.canonical()
    return str(value)


# -- foreign functions ----------------------------------------------------

def _ff_string_concat(*args) -> str:
    return "".join(str(a) for a in args)


def _ff_string_lower(s: str) -> str:
    return s.lower()


def _ff_abs(x):
    return abs(x)


def _make_load_tensor(base_dir: str):
    def load_tensor(path: str) -> Tensor:
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        try:
            with open(full, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise FileFormatError(f"cannot read tensor '{full}': {exc.strerror or exc}")
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"invalid JSON tensor '{full}': {exc}")
        if not isinstance(doc, dict) or "shape" not in doc or "data" not in doc:
            raise FileFormatError(f"tensor file '{full}' needs 'shape' and 'data'")
        return Tensor(doc["shape"], doc["data"])
    return load_tensor


_SLOT = re.compile(r"\{\{(\d+)\}\}")


def _ff_format(template: str, *args) -> str:
    def fill(m):
        index = int(m.group(1))
        if index >= len(args):
            raise FileFormatError(
                f"$format: placeholder {{{{{index}}}}} has no argument")
        return _display(args[index])
    return _SLOT.sub(fill, template)


# -- attribute helpers ---------------------------------------------------------

def _adorn(arg: ast.PredicateArg) -> ast.Adornment:
    if arg.adornment is ast.Adornment.UNSPECIFIED:
        return ast.Adornment.FREE
    return arg.adornment


def _reject(attr: str, decl: ast.PredicateTypeDecl, message: str):
    raise AttributeRejectedDecl(f"@{attr} on '{decl.name}': {message}", decl.span)


def _split_decl(decl: ast.PredicateTypeDecl):
    adorns = [_adorn(a) for a in decl.args]
    types = [a.ty.name for a in decl.args]
    names = [a.name for a in decl.args]
    bound = [i for i, a in enumerate(adorns) if a is ast.Adornment.BOUND]
    free = [i for i, a in enumerate(adorns) if a is not ast.Adornment.BOUND]
    return names, types, adorns, bound, free


def _fixture_path(attr: str, kw: dict, ctx) -> str:
    path = kw.get("fixture")
    if not isinstance(path, str) or not path:
        raise AttributeArityError(f"@{attr} requires fixture=\"<path>\"")
    return path if os.path.isabs(path) else os.path.join(ctx.base_dir, path)


def _fixture_descriptor(attr: str, decl, config: dict, ctx, *,
                        transform=None) -> ForeignPredicateDescriptor:
    names, types, adorns, bound, free = _split_decl(decl)
    path = _fixture_path(attr, config, ctx)
    table = FixtureTable(path, [types[i] for i in bound], _NoAdts())
    cfg_key = canonical_config({k: v for k, v in config.items() if k != "fixture"})

    def evaluator(bound_values: tuple):
        rows = table.lookup(cfg_key, bound_values, None)
        rows = [(prob, tuple(tup)) for prob, tup in rows]
        if transform is not None:
            rows = transform(rows)
        return rows

    return ForeignPredicateDescriptor(
        name=decl.name, arg_names=names, arg_types=types, adornments=adorns,
        evaluator=evaluator, kind="fixture", config=dict(config))


def _threshold_flatten(config: dict):
    threshold = config.get("score_threshold")
    flatten = bool(config.get("flatten_probability", False))

    def transform(rows):
        out = []
        for prob, tup in rows:
            raw = 1.0 if prob is None else prob
            if threshold is not None and raw < threshold:
                continue
            out.append((1.0 if flatten else prob, tup))
        return out

    return transform


# -- mock model attributes ----------------------------------------------------------

def _apply_mock_llm(decl, pos_args, kw_args, ctx):
    if pos_args:
        kw_args = {**kw_args, "prompt": pos_args[0], **({} if len(pos_args) == 1 else {})}
        if len(pos_args) > 1:
            raise AttributeArityError("@mock_llm takes at most one positional argument")
    names, types, adorns, bound, free = _split_decl(decl)
    if not bound or any(types[i] != "String" for i in bound):
        _reject("mock_llm", decl, "bound arguments must be String prompts")
    if not free:
        _reject("mock_llm", decl, "needs at least one free argument")
    return _fixture_descriptor("mock_llm", decl, kw_args, ctx)


def _apply_mock_llm_extract(decl, pos_args, kw_args, ctx):
    if pos_args:
        if len(pos_args) > 1:
            raise AttributeArityError(
                "@mock_llm_extract takes at most one positional argument")
        kw_args = {**kw_args, "prompt": pos_args[0]}
    names, types, adorns, bound, free = _split_decl(decl)
    if len(bound) < 1 or types[bound[0]] != "String":
        _reject("mock_llm_extract", decl, "first bound argument must be a String context")
    if not free:
        _reject("mock_llm_extract", decl, "needs free arguments to extract")
    return _fixture_descriptor("mock_llm_extract", decl, kw_args, ctx)


def _apply_mock_semantic_parse(decl, pos_args, kw_args, ctx):
    if pos_args:
        if len(pos_args) > 1:
            raise AttributeArityError(
                "@mock_semantic_parse takes at most one positional argument")
        kw_args = {**kw_args, "header": pos_args[0]}
    names, types, adorns, bound, free = _split_decl(decl)
    if len(bound) != 1 or types[bound[0]] != "String":
        _reject("mock_semantic_parse", decl, "expects one bound String argument")
    if len(free) != 1:
        _reject("mock_semantic_parse", decl, "expects one free term argument")
    target = kw_args.get("target")
    if target is not None and target != types[free[0]]:
        _reject("mock_semantic_parse", decl,
                f"target '{target}' does not match free argument type '{types[free[0]]}'")
    return _fixture_descriptor("mock_semantic_parse", decl, kw_args, ctx)


def _apply_mock_classify(decl, pos_args, kw_args, ctx):
    if pos_args:
        if len(pos_args) > 1:
            raise AttributeArityError("@mock_classify takes at most one positional argument")
        kw_args = {**kw_args, "labels": pos_args[0]}
    labels = kw_args.get("labels")
    if not isinstance(labels, list) or not labels:
        raise AttributeArityError("@mock_classify requires labels=[...]")
    names, types, adorns, bound, free = _split_decl(decl)
    if len(decl.args) != 2 or len(bound) != 1 or types[bound[0]] != "Tensor":
        _reject("mock_classify", decl, "expects (bound img: Tensor, label: String)")
    if types[free[0]] != "String":
        _reject("mock_classify", decl, "the free label argument must be String")
    return _fixture_descriptor("mock_classify", decl, kw_args, ctx,
                               transform=_threshold_flatten(kw_args))


def _apply_mock_segment(decl, pos_args, kw_args, ctx):
    if pos_args:
        if len(pos_args) > 1:
            raise AttributeArityError("@mock_segment takes at most one positional argument")
        kw_args = {**kw_args, "labels": pos_args[0]}
    names, types, adorns, bound, free = _split_decl(decl)
    if len(bound) != 1 or types[bound[0]] != "Tensor":
        _reject("mock_segment", decl, "expects a single bound Tensor image")
    if not free:
        _reject("mock_segment", decl, "needs free segment outputs")
    limit = kw_args.get("limit")
    base = _threshold_flatten(kw_args)

    def transform(rows):
        rows = base(rows)
        if limit is not None:
            rows = rows[:int(limit)]
        return rows

    return _fixture_descriptor("mock_segment", decl, kw_args, ctx, transform=transform)


def _apply_mock_encode(decl, pos_args, kw_args, ctx):
    if pos_args:
        if len(pos_args) > 1:
            raise AttributeArityError("@mock_encode takes at most one positional argument")
        kw_args = {**kw_args, "model": pos_args[0]}
    names, types, adorns, bound, free = _split_decl(decl)
    if len(bound) != 1 or types[bound[0]] != "String":
        _reject("mock_encode", decl, "expects one bound String input")
    if len(free) != 1 or types[free[0]] != "Tensor":
        _reject("mock_encode", decl, "expects one free Tensor embedding")
    return _fixture_descriptor("mock_encode", decl, kw_args, ctx)


def _apply_arith_eval(decl, pos_args, kw_args, ctx):
    if pos_args or kw_args:
        raise AttributeArityError("@arith_eval takes no arguments")
    names, types, adorns, bound, free = _split_decl(decl)
    if len(bound) != 2 or any(types[i] != "String" for i in bound):
        _reject("arith_eval", decl,
                "expects (bound expr: String, bound bindings: String, out: f64)")
    if len(free) != 1 or types[free[0]] not in ("f32", "f64"):
        _reject("arith_eval", decl, "the free result must be f32 or f64")

    def evaluator(bound_values: tuple):
        expression, bindings = bound_values
        return [(None, (arith.evaluate(expression, bindings),))]

    return ForeignPredicateDescriptor(
        name=decl.name, arg_names=names, arg_types=types, adornments=adorns,
        evaluator=evaluator, kind="builtin", config={})


def _apply_bridge(decl, pos_args, kw_args, ctx):
    if pos_args:
        raise AttributeArityError("@bridge takes keyword arguments only")
    kw = dict(kw_args)
    plugin = kw.pop("plugin", None)
    attribute = kw.pop("attribute", None)
    if not plugin or not attribute:
        raise AttributeArityError("@bridge requires plugin=... and attribute=...")
    connection = None
    for conn in ctx.registry.bridges:
        if conn.plugin_name == plugin:
            connection = conn
            break
    if connection is None:
        raise UnknownAttributeError(
            f"@bridge: plugin '{plugin}' is not connected (use --plugin)", decl.span)
    names, types, adorns, bound, free = _split_decl(decl)
    handle = connection.fa_apply(attribute, [], kw, decl)
    bound_types = [types[i] for i in bound]

    def evaluator(bound_values: tuple):
        return connection.fp_eval(handle, bound_values, bound_types)

    return ForeignPredicateDescriptor(
        name=decl.name, arg_names=names, arg_types=types, adornments=adorns,
        evaluator=evaluator, kind="bridge", config={"plugin": plugin,
                                                    "attribute": attribute, **kw})


def register_builtins(registry: PluginRegistry, base_dir: str = ".") -> PluginRegistry:
    ff = registry.register_function
    ff(ForeignFunctionDescriptor("$string_concat", ["String"], "String",
                                 _ff_string_concat, variadic=True))
    ff(ForeignFunctionDescriptor("$string_lower", ["String"], "String", _ff_string_lower))
    ff(ForeignFunctionDescriptor("$abs", ["Num"], "=0", _ff_abs))
    ff(ForeignFunctionDescriptor("$load_tensor", ["String"], "Tensor",
                                 _make_load_tensor(base_dir)))
    ff(ForeignFunctionDescriptor("$format", ["String", "Any"], "String",
                                 _ff_format, variadic=True))
    ff(ForeignFunctionDescriptor("$format_date", ["DateTime", "String"], "String",
                                 lambda dt, fmt: dt.strftime(fmt)))

    fa = registry.register_attribute
    fa(ForeignAttributeDescriptor("mock_llm", _apply_mock_llm))
    fa(ForeignAttributeDescriptor("mock_llm_extract", _apply_mock_llm_extract))
    fa(ForeignAttributeDescriptor("mock_semantic_parse", _apply_mock_semantic_parse))
    fa(ForeignAttributeDescriptor("mock_classify", _apply_mock_classify))
    fa(ForeignAttributeDescriptor("mock_segment", _apply_mock_segment))
    fa(ForeignAttributeDescriptor("mock_encode", _apply_mock_encode))
    fa(ForeignAttributeDescriptor("arith_eval", _apply_arith_eval))
    fa(ForeignAttributeDescriptor("bridge", _apply_bridge))
    return registry
