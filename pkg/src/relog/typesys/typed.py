"""Typed, normalized program representation consumed by the compiler.

Rule bodies are flattened to ordered conjunct lists (one typed rule per
DNF disjunct of the source body) with negation pushed down to atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from relog.syntax import ast
from relog.typesys.types import AdtRegistry, RelationSignature, TypeTable


@dataclass
class Lit:
    atom: ast.Atom
    positive: bool = True


@dataclass
class Cond:
    expr: ast.Expr
    # when set, the conjunct binds `binds` to the value of `expr_rhs`
    binds: Optional[str] = None
    rhs: Optional[ast.Expr] = None


@dataclass
class Match:
    var: str
    pattern: ast.EntityPattern


@dataclass
class Soft:
    left: str
    right: str


@dataclass
class Agg:
    operator: str
    result_vars: list[str]
    binding_vars: list[str]
    inner: list[list["Conjunct"]]
    where: Optional[list[list["Conjunct"]]]
    group_vars: list[str]       # vars joining inner and where rows
    exported_vars: list[str]    # vars visible to the enclosing body
    span: object = None


Conjunct = Union[Lit, Cond, Match, Soft, Agg]


@dataclass
class TypedHead:
    relation: str
    args: list[ast.Expr]
    prob: Optional[float]


@dataclass
class TypedRule:
    heads: list[TypedHead]
    conjuncts: list[Conjunct]  # in adornment-feasible evaluation order
    var_types: dict[str, str]
    span: object = None
    rule_id: int = 0
    source_order: int = 0


@dataclass
class TypedFact:
    prob: Optional[float]
    values: list[ast.Expr]
    span: object = None


@dataclass
class TypedFactSet:
    relation: str
    facts: list[TypedFact]
    span: object = None


@dataclass
class TypedProgram:
    type_table: TypeTable
    relations: dict[str, RelationSignature]
    rules: list[TypedRule]
    fact_sets: list[TypedFactSet]
    queries: list[str]
    consts: dict[str, tuple[str, ast.Expr]]  # name -> (type, value expr)

    @property
    def registry(self) -> AdtRegistry:
        return self.type_table.registry
