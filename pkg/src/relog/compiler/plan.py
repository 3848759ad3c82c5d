"""Relational-algebra plan: the compiler's output artifact.

Each rule lowers to a left-deep operator pipeline; a stratum is the set
of pipelines that feed its relations plus a recursion flag. The plan
serializes to JSON (stable field names: stratum, op, children, rel) for
`--emit plan`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from relog.errors import InternalError
from relog.syntax import ast
from relog.syntax.printer import print_expr, print_pattern
from relog.typesys.typed import Agg, Cond, Conjunct, Lit, Match, Soft, TypedProgram, TypedRule
from relog.compiler.stratify import Stratum


@dataclass
class RelStep:
    relation: str
    args: list[ast.Expr]
    positive: bool
    recursive: bool = False  # same-stratum relation: participates in delta variants


@dataclass
class SelectStep:
    expr: ast.Expr


@dataclass
class BindStep:
    var: str
    expr: ast.Expr


@dataclass
class TermMatchStep:
    var: str
    pattern: ast.EntityPattern


@dataclass
class SoftEqStep:
    left: str
    right: str


@dataclass
class ForeignApplyStep:
    relation: str
    args: list[ast.Expr]


@dataclass
class AggregateStep:
    operator: str
    result_vars: list[str]
    binding_vars: list[str]
    group_vars: list[str]
    inner: list[list["PlanStep"]]
    where: Optional[list[list["PlanStep"]]]


PlanStep = Union[RelStep, SelectStep, BindStep, TermMatchStep, SoftEqStep,
                 ForeignApplyStep, AggregateStep]


@dataclass
class HeadSpec:
    relation: str
    exprs: list[ast.Expr]
    prob: Optional[float] = None


@dataclass
class RulePlan:
    rule_id: int
    heads: list[HeadSpec]
    steps: list[PlanStep]
    disjunctive: bool = False
    volatile: bool = False  # re-run every fixpoint iteration (term creation/matching)
    var_types: dict[str, str] = field(default_factory=dict)

    @property
    def recursive_positions(self) -> list[int]:
        return [i for i, s in enumerate(self.steps)
                if isinstance(s, RelStep) and s.positive and s.recursive]


@dataclass
class StratumPlan:
    index: int
    relations: list[str]
    recursive: bool
    rules: list[RulePlan]


@dataclass
class Plan:
    strata: list[StratumPlan]

    def to_json(self) -> dict:
        return {"strata": [_stratum_json(s) for s in self.strata]}


def compile_to_plan(strata: list[Stratum], typed: TypedProgram) -> Plan:
    foreign = {name for name, sig in typed.relations.items() if sig.kind == "foreign"}
    plans: list[StratumPlan] = []
    for stratum in strata:
        in_stratum = set(stratum.relations)
        rules = []
        for rule in stratum.rules:
            rules.append(_lower_rule(rule, foreign, in_stratum))
        plans.append(StratumPlan(stratum.index, stratum.relations,
                                 stratum.recursive, rules))
    return Plan(plans)


def _lower_rule(rule: TypedRule, foreign: set[str], in_stratum: set[str]) -> RulePlan:
    steps = _lower_conjuncts(rule.conjuncts, foreign, in_stratum)
    volatile = _has_term_ops(steps) or any(
        _expr_creates_terms(e) for h in rule.heads for e in h.args)
    disjunctive = any(h.prob is not None for h in rule.heads)
    heads = [HeadSpec(h.relation, h.args, h.prob) for h in rule.heads]
    return RulePlan(rule.rule_id, heads, steps, disjunctive, volatile,
                    dict(rule.var_types))


def _lower_conjuncts(conjuncts: list[Conjunct], foreign: set[str],
                     in_stratum: set[str]) -> list[PlanStep]:
    steps: list[PlanStep] = []
    for c in conjuncts:
        if isinstance(c, Lit):
            if c.atom.predicate in foreign:
                if not c.positive:
                    raise InternalError(
                        f"negated foreign predicate '{c.atom.predicate}'")
                steps.append(ForeignApplyStep(c.atom.predicate, c.atom.args))
            else:
                steps.append(RelStep(c.atom.predicate, c.atom.args, c.positive,
                                     recursive=c.atom.predicate in in_stratum))
        elif isinstance(c, Cond):
            if c.binds is not None:
                steps.append(BindStep(c.binds, c.rhs))
            else:
                steps.append(SelectStep(c.expr))
        elif isinstance(c, Match):
            steps.append(TermMatchStep(c.var, c.pattern))
        elif isinstance(c, Soft):
            steps.append(SoftEqStep(c.left, c.right))
        elif isinstance(c, Agg):
            inner = [_lower_conjuncts(d, foreign, in_stratum) for d in c.inner]
            where = None
            if c.where is not None:
                where = [_lower_conjuncts(d, foreign, in_stratum) for d in c.where]
            steps.append(AggregateStep(c.operator, c.result_vars, c.binding_vars,
                                       c.group_vars, inner, where))
        else:
            raise InternalError(f"unloggable conjunct {type(c).__name__}")
    return steps


def _has_term_ops(steps: list[PlanStep]) -> bool:
    for s in steps:
        if isinstance(s, TermMatchStep):
            return True
        if isinstance(s, (SelectStep,)) and _expr_creates_terms(s.expr):
            return True
        if isinstance(s, BindStep) and _expr_creates_terms(s.expr):
            return True
        if isinstance(s, AggregateStep):
            if any(_has_term_ops(d) for d in s.inner):
                return True
            if s.where and any(_has_term_ops(d) for d in s.where):
                return True
    return False


def _expr_creates_terms(e: ast.Expr) -> bool:
    if isinstance(e, ast.NewEntity):
        return True
    if isinstance(e, ast.Binary):
        return _expr_creates_terms(e.left) or _expr_creates_terms(e.right)
    if isinstance(e, ast.Unary):
        return _expr_creates_terms(e.operand)
    if isinstance(e, ast.IfThenElse):
        return any(_expr_creates_terms(x) for x in (e.cond, e.then, e.orelse))
    if isinstance(e, ast.Cast):
        return _expr_creates_terms(e.operand)
    if isinstance(e, ast.ForeignFnCall):
        return any(_expr_creates_terms(a) for a in e.args)
    return False


# -- JSON serialization -------------------------------------------------------

def _stratum_json(s: StratumPlan) -> dict:
    return {
        "stratum": s.index,
        "recursive": s.recursive,
        "relations": list(s.relations),
        "rules": [_rule_json(r) for r in s.rules],
    }


def _rule_json(r: RulePlan) -> dict:
    node = {"op": "project",
            "exprs": [print_expr(e) for e in r.heads[0].exprs],
            "children": [_chain_json(r.steps)]}
    return {
        "rel": r.heads[0].relation,
        "heads": [{"rel": h.relation, "exprs": [print_expr(e) for e in h.exprs],
                   **({"prob": h.prob} if h.prob is not None else {})}
                  for h in r.heads],
        "disjunctive": r.disjunctive,
        "rule_id": r.rule_id,
        **node,
    }


def _chain_json(steps: list[PlanStep]) -> dict:
    node: dict = {"op": "unit", "children": []}
    first = True
    for s in steps:
        child = node
        if isinstance(s, RelStep):
            if not s.positive:
                node = {"op": "antijoin", "rel": s.relation,
                        "exprs": [print_expr(a) for a in s.args],
                        "children": [child]}
            elif first:
                node = {"op": "scan", "rel": s.relation,
                        "exprs": [print_expr(a) for a in s.args],
                        "children": []}
            else:
                node = {"op": "join", "rel": s.relation,
                        "exprs": [print_expr(a) for a in s.args],
                        "children": [child]}
        elif isinstance(s, SelectStep):
            node = {"op": "select", "expr": print_expr(s.expr), "children": [child]}
        elif isinstance(s, BindStep):
            node = {"op": "bind", "var": s.var, "expr": print_expr(s.expr),
                    "children": [child]}
        elif isinstance(s, TermMatchStep):
            node = {"op": "termmatch", "var": s.var,
                    "pattern": print_pattern(s.pattern), "children": [child]}
        elif isinstance(s, SoftEqStep):
            node = {"op": "softeq", "left": s.left, "right": s.right,
                    "children": [child]}
        elif isinstance(s, ForeignApplyStep):
            node = {"op": "foreign_apply", "rel": s.relation,
                    "exprs": [print_expr(a) for a in s.args], "children": [child]}
        elif isinstance(s, AggregateStep):
            node = {"op": "aggregate", "aggregator": s.operator,
                    "result": list(s.result_vars), "binding": list(s.binding_vars),
                    "group": list(s.group_vars),
                    "inner": [_chain_json(d) for d in s.inner],
                    "children": [child]}
            if s.where is not None:
                node["where"] = [_chain_json(d) for d in s.where]
        first = False
    return node
