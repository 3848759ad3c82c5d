"""Hash-consed storage for ADT terms.

Structurally equal terms intern to the same 64-bit id, which makes
`case ... is` matching and set semantics over entities cheap.
"""

from __future__ import annotations

import json
from relog.runtime.values import Entity
from relog.syntax.adt_text import TermNode


class TermStore:
    def __init__(self):
        # id -> (adt, constructor, args); args hold runtime values (Entity for nested terms)
        self._terms: list[tuple[str, str, tuple]] = []
        self._intern: dict[tuple[str, tuple], int] = {}
        self._by_constructor: dict[str, list[int]] = {}

    def __len__(self) -> int:
        return len(self._terms)

    def intern(self, adt: str, constructor: str, args: tuple) -> Entity:
        key = (constructor, args)
        found = self._intern.get(key)
        if found is not None:
            return Entity(found)
        tid = len(self._terms)
        self._terms.append((adt, constructor, args))
        self._intern[key] = tid
        self._by_constructor.setdefault(constructor, []).append(tid)
        return Entity(tid)

    def intern_tree(self, node: TermNode) -> Entity:
        args = tuple(
            self.intern_tree(a) if isinstance(a, TermNode) else a
            for a in node.args)
        return self.intern(node.adt, node.constructor, args)

    def lookup(self, entity: Entity) -> tuple[str, str, tuple]:
        return self._terms[entity.id]

    def constructor_of(self, entity: Entity) -> str:
        return self._terms[entity.id][1]

    def args_of(self, entity: Entity) -> tuple:
        return self._terms[entity.id][2]

    def entities_with_constructor(self, constructor: str) -> list[Entity]:
        return [Entity(i) for i in self._by_constructor.get(constructor, ())]

    def to_text(self, entity: Entity) -> str:
        adt, cons, args = self.lookup(entity)
        parts = []
        for a in args:
            if isinstance(a, Entity):
                parts.append(self.to_text(a))
            elif isinstance(a, bool):
                parts.append("true" if a else "false")
            elif isinstance(a, str):
                parts.append(json.dumps(a))
            else:
                parts.append(repr(a))
        return f"{cons}({', '.join(parts)})"
