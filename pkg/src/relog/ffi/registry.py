"""Plugin registry: the lookup surface shared by the compiler and runtime."""

from __future__ import annotations

from collections import Counter
from typing import Optional

from relog.errors import DuplicateRegistrationError
from relog.ffi.descriptors import (
    ForeignAttributeDescriptor,
    ForeignFunctionDescriptor,
    ForeignPredicateDescriptor,
)


class PluginRegistry:
    def __init__(self):
        self.functions: dict[str, ForeignFunctionDescriptor] = {}
        self.attributes: dict[str, ForeignAttributeDescriptor] = {}
        self.predicates: dict[str, ForeignPredicateDescriptor] = {}
        self.bridges: list = []  # live bridge connections, closed by the CLI
        self.invocation_counts: Counter[str] = Counter()

    # -- registration ------------------------------------------------------

    def register_function(self, ff: ForeignFunctionDescriptor) -> None:
        if ff.name in self.functions:
            raise DuplicateRegistrationError(f"foreign function '{ff.name}' already registered")
        self.functions[ff.name] = ff

    def register_attribute(self, fa: ForeignAttributeDescriptor) -> None:
        if fa.name in self.attributes:
            raise DuplicateRegistrationError(f"attribute '@{fa.name}' already registered")
        self.attributes[fa.name] = fa

    def register_predicate(self, fp: ForeignPredicateDescriptor) -> None:
        if fp.name in self.predicates:
            raise DuplicateRegistrationError(f"foreign predicate '{fp.name}' already registered")
        self.predicates[fp.name] = fp

    # -- lookup ---------------------------------------------------------------

    def lookup_function(self, name: str) -> Optional[ForeignFunctionDescriptor]:
        return self.functions.get(name)

    def lookup_attribute(self, name: str) -> Optional[ForeignAttributeDescriptor]:
        return self.attributes.get(name)

    def lookup_predicate(self, name: str) -> Optional[ForeignPredicateDescriptor]:
        return self.predicates.get(name)
