"""Stratification of typed rules.

Relations are grouped into strongly connected components of the
dependency graph; a negated or aggregated dependency inside a component
is unstratifiable. Components are then layered by longest dependency
chain (every edge bumps the level by one), which both orders negation
and aggregation below their consumers and places producers of ADT terms
(e.g. semantic-parse predicates) before the strata that enumerate terms.
"""

from __future__ import annotations

from dataclasses import dataclass

from relog.errors import UnstratifiableNegationError
from relog.typesys.typed import Agg, Conjunct, Lit, TypedProgram, TypedRule


@dataclass
class Stratum:
    index: int
    relations: list[str]
    rules: list[TypedRule]
    recursive: bool = False


def _body_dependencies(conjuncts: list[Conjunct]):
    """Yield (relation, kind) pairs; kind is 'pos', 'neg', or 'agg'."""
    for c in conjuncts:
        if isinstance(c, Lit):
            yield c.atom.predicate, ("pos" if c.positive else "neg")
        elif isinstance(c, Agg):
            for d in c.inner:
                for rel, _ in _body_dependencies(d):
                    yield rel, "agg"
            for d in (c.where or []):
                for rel, _ in _body_dependencies(d):
                    yield rel, "agg"


def stratify(typed: TypedProgram) -> list[Stratum]:
    foreign = {name for name, sig in typed.relations.items() if sig.kind == "foreign"}
    nodes: set[str] = set()
    edges: dict[str, set[tuple[str, str]]] = {}  # head -> {(dep, kind)}

    for fs in typed.fact_sets:
        nodes.add(fs.relation)
    for name, sig in typed.relations.items():
        if sig.kind != "foreign":
            nodes.add(name)
    for rule in typed.rules:
        head_rels = [h.relation for h in rule.heads]
        nodes.update(head_rels)
        deps = [(rel, kind) for rel, kind in _body_dependencies(rule.conjuncts)
                if rel not in foreign]
        nodes.update(rel for rel, _ in deps)
        for head in head_rels:
            edges.setdefault(head, set()).update(deps)
        # heads of one rule must land in the same stratum
        for a in head_rels:
            for b in head_rels:
                if a != b:
                    edges.setdefault(a, set()).add((b, "pos"))

    sccs = _condense(sorted(nodes), edges)
    comp_of: dict[str, int] = {}
    for idx, comp in enumerate(sccs):
        for rel in comp:
            comp_of[rel] = idx

    # reject negation/aggregation within a component
    for head, deps in edges.items():
        for dep, kind in deps:
            if kind != "pos" and comp_of[dep] == comp_of[head]:
                cycle = sorted(sccs[comp_of[head]])
                raise UnstratifiableNegationError(
                    f"negation or aggregation inside the recursive component "
                    f"{{{', '.join(cycle)}}}", cycle=cycle)

    # longest-path level per component
    comp_deps: dict[int, set[int]] = {i: set() for i in range(len(sccs))}
    for head, deps in edges.items():
        for dep, _ in deps:
            if comp_of[dep] != comp_of[head]:
                comp_deps[comp_of[head]].add(comp_of[dep])

    levels: dict[int, int] = {}

    def level_of(comp: int) -> int:
        if comp in levels:
            return levels[comp]
        levels[comp] = 0  # cycle guard; condensation is acyclic
        value = 0
        for dep in comp_deps[comp]:
            value = max(value, level_of(dep) + 1)
        levels[comp] = value
        return value

    for i in range(len(sccs)):
        level_of(i)

    recursive_comps: set[int] = set()
    for i, comp in enumerate(sccs):
        if len(comp) > 1:
            recursive_comps.add(i)
    for head, deps in edges.items():
        for dep, kind in deps:
            if kind == "pos" and comp_of[dep] == comp_of[head]:
                recursive_comps.add(comp_of[head])

    max_level = max(levels.values(), default=0)
    strata: list[Stratum] = []
    for lvl in range(max_level + 1):
        rels: list[str] = []
        recursive = False
        for i, comp in enumerate(sccs):
            if levels[i] == lvl:
                rels.extend(comp)
                recursive = recursive or i in recursive_comps
        if not rels:
            continue
        strata.append(Stratum(index=len(strata), relations=sorted(rels),
                              rules=[], recursive=recursive))

    stratum_of = {rel: s.index for s in strata for rel in s.relations}
    for rule in sorted(typed.rules, key=lambda r: r.rule_id):
        strata[stratum_of[rule.heads[0].relation]].rules.append(rule)
    return strata


def _condense(nodes: list[str], edges: dict[str, set[tuple[str, str]]]) -> list[list[str]]:
    """Tarjan SCC, iterative, deterministic order."""
    succ = {n: sorted({dep for dep, _ in edges.get(n, ())}) for n in nodes}
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index:
                    index[child] = low[child] = counter[0]
                    counter[0] += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(succ[child])))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                sccs.append(sorted(comp))
    return sccs
