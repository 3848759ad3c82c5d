"""Value types, the type table (aliases/subtypes), and the ADT registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from relog.errors import TypeCheckError, UnknownConstructorError
from relog.syntax import ast

INT_TYPES = ("i8", "i16", "i32", "i64", "isize", "u8", "u16", "u32", "u64", "usize")
FLOAT_TYPES = ("f32", "f64")
PRIMITIVES = INT_TYPES + FLOAT_TYPES + ("char", "bool", "String", "DateTime", "Duration", "Tensor")

NUMERIC_TYPES = frozenset(INT_TYPES + FLOAT_TYPES)

# isize/usize are pinned to 64-bit semantics.
INT_RANGES = {
    "i8": (-2**7, 2**7 - 1),
    "i16": (-2**15, 2**15 - 1),
    "i32": (-2**31, 2**31 - 1),
    "i64": (-2**63, 2**63 - 1),
    "isize": (-2**63, 2**63 - 1),
    "u8": (0, 2**8 - 1),
    "u16": (0, 2**16 - 1),
    "u32": (0, 2**32 - 1),
    "u64": (0, 2**64 - 1),
    "usize": (0, 2**64 - 1),
}


def is_int_type(name: str) -> bool:
    return name in INT_RANGES


def is_float_type(name: str) -> bool:
    return name in FLOAT_TYPES


def is_numeric_type(name: str) -> bool:
    return name in NUMERIC_TYPES


class AdtRegistry:
    """Algebraic data types: ADT name -> constructors, and the reverse map."""

    def __init__(self):
        self._adts: dict[str, list[tuple[str, list[str]]]] = {}
        self._constructor_owner: dict[str, str] = {}

    def register(self, name: str, constructors: list[tuple[str, list[str]]], span=None) -> None:
        if name in self._adts:
            raise TypeCheckError(f"duplicate ADT '{name}'", span)
        if not constructors:
            raise TypeCheckError(f"ADT '{name}' needs at least one constructor", span)
        for cname, _ in constructors:
            owner = self._constructor_owner.get(cname)
            if owner is not None:
                raise TypeCheckError(
                    f"constructor '{cname}' already belongs to ADT '{owner}'", span)
        self._adts[name] = constructors
        for cname, _ in constructors:
            self._constructor_owner[cname] = name

    def is_adt(self, name: str) -> bool:
        return name in self._adts

    def adt_names(self) -> list[str]:
        return sorted(self._adts)

    def constructors_of(self, name: str) -> list[tuple[str, list[str]]]:
        return self._adts[name]

    def owner_of(self, constructor: str, span=None) -> str:
        owner = self._constructor_owner.get(constructor)
        if owner is None:
            raise UnknownConstructorError(f"unknown constructor '{constructor}'", span)
        return owner

    def constructor_args(self, constructor: str, span=None) -> list[str]:
        owner = self.owner_of(constructor, span)
        for cname, args in self._adts[owner]:
            if cname == constructor:
                return args
        raise UnknownConstructorError(f"unknown constructor '{constructor}'", span)


class TypeTable:
    """Resolves surface type names to canonical types.

    Aliases and subtypes both canonicalize to their target; ADT names are
    canonical themselves.
    """

    def __init__(self, registry: Optional[AdtRegistry] = None):
        self.registry = registry or AdtRegistry()
        self._aliases: dict[str, str] = {}

    def define_alias(self, name: str, target: str, span=None) -> None:
        if name in PRIMITIVES or name in self._aliases or self.registry.is_adt(name):
            raise TypeCheckError(f"type '{name}' is already defined", span)
        self._aliases[name] = target

    def canonical(self, name: str, span=None) -> str:
        seen = set()
        while name in self._aliases:
            if name in seen:
                raise TypeCheckError(f"cyclic type alias through '{name}'", span)
            seen.add(name)
            name = self._aliases[name]
        if name in PRIMITIVES or self.registry.is_adt(name):
            return name
        raise TypeCheckError(f"unknown type '{name}'", span)

    def canonical_expr(self, ty: ast.TypeExpr) -> str:
        return self.canonical(ty.name, ty.span)


@dataclass
class RelationSignature:
    name: str
    arg_names: list[Optional[str]]
    arg_types: list[str]
    adornments: list[ast.Adornment]
    kind: str = "stored"  # stored | foreign
    declared: bool = False
    span: object = None

    @property
    def arity(self) -> int:
        return len(self.arg_types)

    def bound_positions(self) -> list[int]:
        return [i for i, a in enumerate(self.adornments) if a is ast.Adornment.BOUND]

    def free_positions(self) -> list[int]:
        return [i for i, a in enumerate(self.adornments) if a is not ast.Adornment.BOUND]
