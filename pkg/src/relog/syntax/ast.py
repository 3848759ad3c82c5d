"""Abstract syntax tree produced by the parser.

All nodes are plain frozen-ish dataclasses (mutated only by compiler
rewrites) carrying their source span.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from relog.syntax.source import Span


# -- types ----------------------------------------------------------------

@dataclass
class TypeExpr:
    """A type reference by name: primitive, alias, subtype, or ADT."""

    name: str
    span: Span


class Adornment(enum.Enum):
    BOUND = "bound"
    FREE = "free"
    UNSPECIFIED = "unspecified"


# -- expressions ------------------------------------------------------------

class ConstKind(enum.Enum):
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    CHAR = "char"
    STRING = "string"
    DATETIME = "datetime"
    DURATION = "duration"


@dataclass
class Constant:
    kind: ConstKind
    value: object
    span: Span


@dataclass
class VarRef:
    name: str
    span: Span


@dataclass
class Wildcard:
    span: Span


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span


@dataclass
class Unary:
    op: str
    operand: "Expr"
    span: Span


@dataclass
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Span


@dataclass
class Cast:
    operand: "Expr"
    ty: TypeExpr
    span: Span


@dataclass
class ForeignFnCall:
    name: str  # includes the leading '$'
    args: list["Expr"]
    span: Span


@dataclass
class NewEntity:
    constructor: str
    args: list["Expr"]
    span: Span


@dataclass
class ConstRef:
    """Reference to a `const` declaration; resolved during type checking."""

    name: str
    span: Span


Expr = Union[Constant, VarRef, Wildcard, Binary, Unary, IfThenElse, Cast,
             ForeignFnCall, NewEntity, ConstRef]


# -- formulas ----------------------------------------------------------------

@dataclass
class Atom:
    predicate: str
    args: list[Expr]
    span: Span


@dataclass
class And:
    parts: list["Formula"]
    span: Span


@dataclass
class Or:
    parts: list["Formula"]
    span: Span


@dataclass
class Not:
    operand: "Formula"
    span: Span


@dataclass
class Constraint:
    """A boolean expression used as a formula, e.g. ``i != j``."""

    expr: Expr
    span: Span


@dataclass
class EntityPattern:
    constructor: str
    args: list["Pattern"]
    span: Span


Pattern = Union[EntityPattern, VarRef, Wildcard, Constant]


@dataclass
class CaseIs:
    var: str
    pattern: EntityPattern
    span: Span


@dataclass
class SoftEq:
    left: str
    right: str
    span: Span


@dataclass
class Aggregate:
    result_vars: list[str]
    operator: str
    binding_vars: list[str]
    inner: "Formula"
    where_vars: list[str] = field(default_factory=list)
    where: Optional["Formula"] = None
    span: Span = None  # type: ignore[assignment]


Formula = Union[Atom, And, Or, Not, Constraint, CaseIs, SoftEq, Aggregate]


# -- declarations -------------------------------------------------------------

@dataclass
class AttributeUse:
    name: str
    pos_args: list[object]  # literals, lists, tuples (python values)
    kw_args: dict[str, object]
    span: Span


@dataclass
class ImportDecl:
    path: str
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class AliasDecl:
    name: str
    target: TypeExpr
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class SubTypeDecl:
    name: str
    parent: TypeExpr
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class AdtDecl:
    name: str
    constructors: list[tuple[str, list[TypeExpr]]]
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class PredicateArg:
    name: Optional[str]
    ty: TypeExpr
    adornment: Adornment
    span: Span


@dataclass
class PredicateTypeDecl:
    name: str
    args: list[PredicateArg]
    extern: bool
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class ForeignFunctionTypeDecl:
    name: str  # includes '$'
    args: list[tuple[Optional[str], TypeExpr]]
    ret: TypeExpr
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class ConstDecl:
    name: str
    value: Expr
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class FactSpec:
    prob: Optional[float]
    values: list[Expr]
    span: Span


@dataclass
class FactSetDecl:
    name: str
    facts: list[FactSpec]
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


@dataclass
class RuleHead:
    prob: Optional[float]
    atom: Atom
    span: Span


@dataclass
class RuleDecl:
    heads: list[RuleHead]
    body: Formula
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)
    multi_head_braced: bool = False


@dataclass
class QueryDecl:
    predicate: str
    span: Span
    attributes: list[AttributeUse] = field(default_factory=list)


Item = Union[ImportDecl, AliasDecl, SubTypeDecl, AdtDecl, PredicateTypeDecl,
             ForeignFunctionTypeDecl, ConstDecl, FactSetDecl, RuleDecl, QueryDecl]

TypeDeclItem = (AliasDecl, SubTypeDecl, AdtDecl, PredicateTypeDecl, ForeignFunctionTypeDecl)


@dataclass
class SourceProgram:
    items: list[Item]
    source_name: str
