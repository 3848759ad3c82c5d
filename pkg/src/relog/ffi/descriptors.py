"""Descriptors for foreign functions, predicates, and attributes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from relog.syntax import ast


@dataclass
class ForeignFunctionDescriptor:
    """A pure, deterministic function callable from expressions."""

    name: str                 # dollar-prefixed
    arg_types: list[str]      # "Any" admits every value kind
    ret_type: str
    evaluator: Callable[..., object]
    variadic: bool = False


@dataclass
class ForeignPredicateDescriptor:
    """A relation computed by invoking an external stateless function.

    The evaluator maps a tuple of bound-argument values to an iterable of
    (probability or None, free-argument tuple) pairs.
    """

    name: str
    arg_names: list[Optional[str]]
    arg_types: list[str]
    adornments: list[ast.Adornment]
    evaluator: Callable[[tuple], Iterable[tuple[Optional[float], tuple]]]
    kind: str = "builtin"     # builtin | fixture | bridge
    config: dict = field(default_factory=dict)

    def bound_positions(self) -> list[int]:
        return [i for i, a in enumerate(self.adornments) if a is ast.Adornment.BOUND]

    def free_positions(self) -> list[int]:
        return [i for i, a in enumerate(self.adornments) if a is not ast.Adornment.BOUND]

    def bound_types(self) -> list[str]:
        return [self.arg_types[i] for i in self.bound_positions()]

    def free_types(self) -> list[str]:
        return [self.arg_types[i] for i in self.free_positions()]


@dataclass
class ForeignAttributeDescriptor:
    """Compile-time higher-order decorator over predicate declarations.

    ``apply(decl, pos_args, kw_args, ctx)`` validates the decorated
    declaration, and returns the ForeignPredicateDescriptor that will
    serve the predicate at runtime.
    """

    name: str
    apply: Callable[..., ForeignPredicateDescriptor]
