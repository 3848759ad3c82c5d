"""Plugin author SDK.

A plugin is a named set of attributes and standalone predicates. An
attribute's apply function receives the decorated predicate declaration
plus positional/keyword arguments, may assert on the declaration, and
returns an eval function; eval functions take the bound-argument tuple
and yield (probability or None, free-argument tuple) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from relog_bridge.protocol import ArgDecl


@dataclass
class StandalonePredicate:
    name: str
    args: list[ArgDecl]
    eval_fn: Callable


class Plugin:
    def __init__(self, name: str):
        self.name = name
        self.attributes: dict[str, Callable] = {}
        self.predicates: dict[str, StandalonePredicate] = {}

    def attribute(self, name: str):
        """Register an attribute: fn(decl, pos_args, kw_args) -> eval_fn."""
        def decorate(fn):
            if name in self.attributes:
                raise ValueError(f"attribute '{name}' already defined")
            self.attributes[name] = fn
            return fn
        return decorate

    def predicate(self, name: str, args: list[tuple[str, str]]):
        """Register a standalone predicate; args are (type, adornment) pairs."""
        def decorate(fn):
            if name in self.predicates:
                raise ValueError(f"predicate '{name}' already defined")
            decls = [ArgDecl(t, a) for t, a in args]
            self.predicates[name] = StandalonePredicate(name, decls, fn)
            return fn
        return decorate

    def manifest(self) -> dict:
        from relog_bridge.protocol import PROTOCOL_VERSION
        return {
            "protocol": PROTOCOL_VERSION,
            "name": self.name,
            "attributes": [
                {"name": name,
                 "keywords": getattr(fn, "keywords", []),
                 "positional": getattr(fn, "positional", 0)}
                for name, fn in sorted(self.attributes.items())
            ],
            "predicates": [
                {"name": p.name,
                 "fp_handle": p.name,
                 "args": [
                     {**({"name": a.name} if a.name else {}),
                      "type": a.type, "adornment": a.adornment}
                     for a in p.args]}
                for p in sorted(self.predicates.values(), key=lambda p: p.name)
            ],
        }


def keywords(*names: str, positional: int = 0):
    """Annotate an attribute function's accepted arguments for the manifest."""
    def decorate(fn):
        fn.keywords = list(names)
        fn.positional = positional
        return fn
    return decorate
