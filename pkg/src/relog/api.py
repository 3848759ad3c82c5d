"""High-level pipeline: load, compile, and run programs."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from relog.compiler.attributes import apply_attributes
from relog.compiler.desugar import desugar_disjunctive_heads, desugar_tensor_joins
from relog.compiler.plan import Plan, compile_to_plan
from relog.compiler.stratify import stratify
from relog.errors import UnknownRelationError
from relog.ffi.builtins import register_builtins
from relog.ffi.bridge_client import DEFAULT_TIMEOUT_MS, BridgeConnection
from relog.ffi.descriptors import ForeignPredicateDescriptor
from relog.ffi.registry import PluginRegistry
from relog.provenance import make_context
from relog.runtime.database import ExecutionConfig
from relog.runtime.engine import Evaluator
from relog.runtime.facts import load_fact_file
from relog.syntax import ast, load_program, parse_program
from relog.typesys.check import check_program
from relog.typesys.typed import TypedProgram


@dataclass
class CompiledProgram:
    typed: TypedProgram
    plan: Plan
    registry: PluginRegistry
    base_dir: str


def build_registry(base_dir: str = ".", plugin_commands: Optional[list[str]] = None,
                   timeout_ms: int = DEFAULT_TIMEOUT_MS) -> PluginRegistry:
    registry = PluginRegistry()
    register_builtins(registry, base_dir)
    for command in plugin_commands or []:
        conn = BridgeConnection(command, timeout_ms=timeout_ms, cwd=base_dir)
        registry.bridges.append(conn)
        for pred in conn.standalone_predicates():
            _register_standalone(registry, conn, pred)
    return registry


def _register_standalone(registry: PluginRegistry, conn: BridgeConnection, pred: dict):
    name = pred["name"]
    args = pred.get("args", [])
    arg_names = [a.get("name") for a in args]
    arg_types = [a["type"] for a in args]
    adornments = [ast.Adornment.BOUND if a.get("adornment") == "bound"
                  else ast.Adornment.FREE for a in args]
    handle = pred.get("fp_handle", name)
    bound_types = [t for t, a in zip(arg_types, adornments)
                   if a is ast.Adornment.BOUND]

    def evaluator(bound_values: tuple):
        return conn.fp_eval(handle, bound_values, bound_types)

    registry.register_predicate(ForeignPredicateDescriptor(
        name=name, arg_names=arg_names, arg_types=arg_types,
        adornments=adornments, evaluator=evaluator, kind="bridge",
        config={"plugin": conn.plugin_name}))


def compile_program(path: Optional[str] = None, text: Optional[str] = None,
                    registry: Optional[PluginRegistry] = None,
                    base_dir: Optional[str] = None) -> CompiledProgram:
    if path is not None:
        program = load_program(path)
        base_dir = base_dir or os.path.dirname(os.path.abspath(path))
    else:
        program = parse_program(text or "")
        base_dir = base_dir or "."
    if registry is None:
        registry = build_registry(base_dir)
    program = apply_attributes(program, registry, base_dir)
    typed = check_program(program, registry)
    typed = desugar_tensor_joins(typed)
    typed = desugar_disjunctive_heads(typed)
    strata = stratify(typed)
    plan = compile_to_plan(strata, typed)
    return CompiledProgram(typed, plan, registry, base_dir)


def run_program(compiled: CompiledProgram, provenance: str = "topkproofs",
                top_k: int = 3, queries: Optional[list[str]] = None,
                fact_files: Optional[list[str]] = None,
                config: Optional[ExecutionConfig] = None,
                semi_naive: bool = True):
    """Evaluate and answer queries; returns (evaluator, {query: [(prob, tuple)]})."""
    ctx = make_context(provenance, top_k)
    evaluator = Evaluator(compiled.typed, compiled.plan, compiled.registry,
                          ctx, config)
    evaluator.load_program_facts()
    for path in fact_files or []:
        rows = load_fact_file(path, compiled.typed.relations,
                              compiled.typed.registry, evaluator.db.store)
        evaluator.load_external_facts(rows)
    evaluator.evaluate(semi_naive=semi_naive)
    names = queries if queries else list(compiled.typed.queries)
    if not names:
        raise UnknownRelationError("no queries requested and the program declares none")
    results = {name: evaluator.run_query(name) for name in names}
    return evaluator, results


def close_registry(registry: PluginRegistry) -> None:
    for conn in registry.bridges:
        conn.close()
