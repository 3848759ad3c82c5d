"""Attribute application: the compile-time half of the foreign interface.

Each attribute is a higher-order transform: it consumes the decorated
predicate declaration plus its own arguments and yields a foreign
predicate descriptor, which replaces the declaration with an extern
signature. This runs before type checking.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

from relog.errors import AttributeRejectedDecl, UnknownAttributeError
from relog.ffi.registry import PluginRegistry
from relog.syntax import ast


@dataclass
class ApplyContext:
    """Environment handed to attribute implementations."""

    base_dir: str
    registry: PluginRegistry


def apply_attributes(program: ast.SourceProgram, registry: PluginRegistry,
                     base_dir: str = ".") -> ast.SourceProgram:
    ctx = ApplyContext(base_dir=base_dir, registry=registry)
    items: list[ast.Item] = []
    for item in program.items:
        if not item.attributes:
            items.append(item)
            continue
        if not isinstance(item, ast.PredicateTypeDecl):
            raise AttributeRejectedDecl(
                f"attribute '@{item.attributes[0].name}' decorates a "
                "non-predicate declaration", item.span)
        if len(item.attributes) > 1:
            raise AttributeRejectedDecl(
                f"predicate '{item.name}' has multiple attributes", item.span)
        use = item.attributes[0]
        attr = registry.lookup_attribute(use.name)
        if attr is None:
            raise UnknownAttributeError(f"unknown attribute '@{use.name}'", use.span)
        decl = copy.copy(item)
        decl.attributes = []
        descriptor = attr.apply(decl, list(use.pos_args), dict(use.kw_args), ctx)
        descriptor.name = item.name
        registry.register_predicate(descriptor)
        replacement = ast.PredicateTypeDecl(
            name=item.name,
            args=[ast.PredicateArg(n, ast.TypeExpr(t, item.span), a, item.span)
                  for n, t, a in zip(descriptor.arg_names, descriptor.arg_types,
                                     descriptor.adornments)],
            extern=True,
            span=item.span,
        )
        items.append(replacement)
    return ast.SourceProgram(items, program.source_name)
