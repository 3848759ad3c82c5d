"""Tagged tuple storage and the execution configuration."""

from __future__ import annotations

from dataclasses import dataclass

from relog.provenance import DEFAULT_WMC_VAR_CAP, ProvenanceContext
from relog.runtime.terms import TermStore


@dataclass
class ExecutionConfig:
    iteration_cap: int = 10_000
    wmc_var_cap: int = DEFAULT_WMC_VAR_CAP
    agg_world_var_cap: int = 18
    memoize: bool = True
    deterministic_order: bool = True
    foreign_error_policy: str = "discard"  # discard | abort

    def __post_init__(self):
        if self.iteration_cap <= 0 or self.wmc_var_cap <= 0 or self.agg_world_var_cap <= 0:
            raise ValueError("execution caps must be positive")
        if self.foreign_error_policy not in ("discard", "abort"):
            raise ValueError(f"invalid foreign error policy {self.foreign_error_policy!r}")


class Database:
    """Relation contents keyed by tuple, tags merged via the context's or."""

    def __init__(self, ctx: ProvenanceContext):
        self.ctx = ctx
        self.relations: dict[str, dict[tuple, object]] = {}
        self.store = TermStore()
        self.fp_memo: dict[tuple, list[tuple[tuple, object]]] = {}
        self.softeq_memo: dict[tuple, object] = {}
        self.disj_groups: dict[tuple, list[int]] = {}

    def relation(self, name: str) -> dict[tuple, object]:
        return self.relations.setdefault(name, {})

    def insert(self, name: str, values: tuple, tag) -> bool:
        """Merge a tagged tuple; returns True when the tag changed."""
        rel = self.relation(name)
        old = rel.get(values)
        if old is None:
            rel[values] = tag
            return True
        merged = self.ctx.tag_or(old, tag)
        if self.ctx.tag_saturated(old, merged):
            return False
        rel[values] = merged
        return True

    def clear_derived(self, derived: set[str]) -> None:
        for name in derived:
            self.relations.pop(name, None)
