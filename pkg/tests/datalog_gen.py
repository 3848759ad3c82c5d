"""Random Datalog program generator plus an independent naive evaluator.

Programs are built in a tiny IR, evaluated here by brute-force naive
fixpoint over plain Python sets (the oracle), and rendered to surface
text for the engine under test. Negation and aggregation only consult
relations with a strictly smaller index, and positive references never
point upward, so every generated program is stratifiable by
construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Union

DOMAIN = range(5)
VARS = ["x0", "x1", "x2", "x3"]


@dataclass
class GenAtom:
    rel: int
    args: list  # var name (str) or int constant
    positive: bool = True


@dataclass
class GenConstraint:
    op: str  # "!=", "<", "<="
    left: str
    right: Union[str, int]


@dataclass
class GenAggregate:
    op: str             # count | sum | min | max | exists
    result_var: str
    binding_var: str
    inner: GenAtom      # positive atom over a lower relation


@dataclass
class GenRule:
    head_rel: int
    head_args: list
    atoms: list[GenAtom]
    constraints: list[GenConstraint] = field(default_factory=list)
    aggregate: Optional[GenAggregate] = None


@dataclass
class GenProgram:
    arities: list[int]
    facts: dict[int, list[tuple]]                    # rel -> tuples
    fact_probs: dict[int, list[Optional[float]]]     # aligned with facts
    rules: list[GenRule]
    agg_arities: dict[int, str] = field(default_factory=dict)  # agg head rels

    def relation_name(self, idx: int) -> str:
        return f"r{idx}"


def generate_program(seed: int, probabilistic: bool = False,
                     max_input_vars: int = 10,
                     allow_aggregates: bool = True) -> GenProgram:
    rng = random.Random(seed)
    n_rels = rng.randint(2, 5)
    arities = [rng.randint(1, 2) for _ in range(n_rels)]
    facts: dict[int, list[tuple]] = {}
    fact_probs: dict[int, list[Optional[float]]] = {}
    tagged_budget = max_input_vars
    for rel in range(n_rels):
        rows = []
        probs = []
        seen = set()
        for _ in range(rng.randint(0, 4)):
            tup = tuple(rng.choice(DOMAIN) for _ in range(arities[rel]))
            if tup in seen:
                continue
            seen.add(tup)
            rows.append(tup)
            if probabilistic and tagged_budget > 0 and rng.random() < 0.6:
                probs.append(round(rng.uniform(0.1, 0.9), 3))
                tagged_budget -= 1
            else:
                probs.append(None)
        facts[rel] = rows
        fact_probs[rel] = probs

    rules: list[GenRule] = []
    agg_heads: dict[int, str] = {}
    n_rules = rng.randint(1, 4)
    next_rel = n_rels
    for _ in range(n_rules):
        use_agg = allow_aggregates and rng.random() < 0.25
        if use_agg:
            inner_rel = rng.randrange(n_rels)
            op = rng.choice(["count", "sum", "min", "max", "exists"]
                            if not probabilistic else ["count", "exists", "max"])
            binding = "y0"
            pos = rng.randrange(arities[inner_rel])
            inner_args = ["w%d" % i for i in range(arities[inner_rel])]
            inner_args[pos] = binding
            head_rel = next_rel
            next_rel += 1
            arities.append(1)
            facts[head_rel] = []
            fact_probs[head_rel] = []
            agg_heads[head_rel] = op
            rules.append(GenRule(
                head_rel=head_rel, head_args=["v"],
                atoms=[],
                aggregate=GenAggregate(op, "v", binding,
                                       GenAtom(inner_rel, inner_args))))
            continue

        head_rel = rng.randrange(1, n_rels)
        n_atoms = rng.randint(1, 3)
        atoms = []
        bound: list[str] = []
        for _ in range(n_atoms):
            rel = rng.randrange(0, head_rel + 1)
            args = []
            for _ in range(arities[rel]):
                if bound and rng.random() < 0.5:
                    args.append(rng.choice(bound))
                elif rng.random() < 0.2:
                    args.append(rng.choice(DOMAIN))
                else:
                    var = rng.choice(VARS)
                    args.append(var)
            atoms.append(GenAtom(rel, args))
            bound.extend(a for a in args if isinstance(a, str))
        bound = sorted(set(bound))
        if not bound:
            continue

        constraints = []
        if not probabilistic and head_rel >= 1 and rng.random() < 0.4 and bound:
            neg_rel = rng.randrange(0, head_rel)
            neg_args = [rng.choice(bound) if rng.random() < 0.8 else rng.choice(DOMAIN)
                        for _ in range(arities[neg_rel])]
            atoms.append(GenAtom(neg_rel, neg_args, positive=False))
        if rng.random() < 0.4 and len(bound) >= 2:
            left, right = rng.sample(bound, 2)
            constraints.append(GenConstraint(rng.choice(["!=", "<", "<="]),
                                             left, right))
        head_args = [rng.choice(bound) if rng.random() < 0.85 else rng.choice(DOMAIN)
                     for _ in range(arities[head_rel])]
        rules.append(GenRule(head_rel, head_args, atoms, constraints))

    return GenProgram(arities, facts, fact_probs, rules, agg_heads)


# -- rendering to surface text -----------------------------------------------------

def render_program(program: GenProgram) -> str:
    lines = []
    for rel, rows in program.facts.items():
        if rel in program.agg_arities:
            continue
        if not rows:
            args = ", ".join(f"a{i}: i32" for i in range(program.arities[rel]))
            lines.append(f"type r{rel}({args})")
            continue
        cells = []
        for tup, prob in zip(rows, program.fact_probs[rel]):
            body = "(" + ", ".join(str(v) for v in tup) + ("," if len(tup) == 1 else "") + ")"
            cells.append(body if prob is None else f"{prob}::{body}")
        lines.append(f"rel r{rel} = {{{', '.join(cells)}}}")
    for rule in program.rules:
        lines.append(_render_rule(program, rule))
    for rel in range(len(program.arities)):
        lines.append(f"query r{rel}")
    return "\n".join(lines)


def _render_rule(program: GenProgram, rule: GenRule) -> str:
    head = f"r{rule.head_rel}(" + ", ".join(str(a) for a in rule.head_args) + ")"
    parts = []
    for atom in rule.atoms:
        text = f"r{atom.rel}(" + ", ".join(str(a) for a in atom.args) + ")"
        parts.append(text if atom.positive else f"not {text}")
    for c in rule.constraints:
        parts.append(f"{c.left} {c.op} {c.right}")
    if rule.aggregate is not None:
        agg = rule.aggregate
        inner = f"r{agg.inner.rel}(" + ", ".join(str(a) for a in agg.inner.args) + ")"
        parts.append(f"{agg.result_var} := {agg.op}({agg.binding_var}: {inner})")
    return f"rel {head} = " + " and ".join(parts)


# -- independent naive oracle ---------------------------------------------------------

def naive_fixpoint(program: GenProgram, include: Optional[set] = None,
                   max_iterations: int = 500) -> dict[int, set]:
    """Brute-force stratified evaluation over sets.

    Generated rules only reference relations at or below their head's
    index (strictly below for negation and aggregation), so evaluating
    head indices in increasing order, each to its own naive fixpoint, is
    a valid stratification. ``include`` restricts which tagged facts are
    present (a possible world): a set of (rel, row_index); None means
    all facts hold.
    """
    db: dict[int, set] = {rel: set() for rel in range(len(program.arities))}
    for rel, rows in program.facts.items():
        for i, tup in enumerate(rows):
            prob = program.fact_probs[rel][i]
            if prob is None or include is None or (rel, i) in include:
                db[rel].add(tup)
    for head in range(len(program.arities)):
        rules = [r for r in program.rules if r.head_rel == head]
        if not rules:
            continue
        for _ in range(max_iterations):
            changed = False
            for rule in rules:
                for derived in list(_rule_derivations(program, rule, db)):
                    if derived not in db[rule.head_rel]:
                        db[rule.head_rel].add(derived)
                        changed = True
            if not changed:
                break
        else:
            raise RuntimeError("oracle did not converge")
    return db


def _rule_derivations(program: GenProgram, rule: GenRule, db: dict[int, set]):
    if rule.aggregate is not None:
        agg = rule.aggregate
        members = set()
        for tup in db[agg.inner.rel]:
            env = _match(agg.inner.args, tup, {})
            if env is not None:
                members.add(env[agg.binding_var])
        if agg.op == "count":
            yield (len(members),)
        elif agg.op == "exists":
            yield (bool(members),)
        elif agg.op == "sum":
            yield (sum(members),)
        elif members:
            yield (min(members) if agg.op == "min" else max(members),)
        return

    positives = [a for a in rule.atoms if a.positive]
    negatives = [a for a in rule.atoms if not a.positive]

    def search(i: int, env: dict):
        if i == len(positives):
            for neg in negatives:
                probe = tuple(env[a] if isinstance(a, str) else a for a in neg.args)
                if probe in db[neg.rel]:
                    return
            for c in rule.constraints:
                left = env[c.left]
                right = env[c.right] if isinstance(c.right, str) else c.right
                if c.op == "!=" and not left != right:
                    return
                if c.op == "<" and not left < right:
                    return
                if c.op == "<=" and not left <= right:
                    return
            yield tuple(env[a] if isinstance(a, str) else a for a in rule.head_args)
            return
        atom = positives[i]
        for tup in db[atom.rel]:
            new_env = _match(atom.args, tup, env)
            if new_env is not None:
                yield from search(i + 1, new_env)

    yield from search(0, {})


def _match(args, tup, env):
    out = dict(env)
    for a, v in zip(args, tup):
        if isinstance(a, str):
            if a in out:
                if out[a] != v:
                    return None
            else:
                out[a] = v
        elif a != v:
            return None
    return out


def tagged_facts(program: GenProgram) -> list[tuple[int, int, float]]:
    out = []
    for rel, probs in program.fact_probs.items():
        for i, p in enumerate(probs):
            if p is not None:
                out.append((rel, i, p))
    return out


def world_probabilities(program: GenProgram) -> dict[int, dict[tuple, float]]:
    """Exact per-tuple probability by replaying every possible world."""
    tagged = tagged_facts(program)
    totals: dict[int, dict[tuple, float]] = {rel: {} for rel in range(len(program.arities))}
    for mask in range(1 << len(tagged)):
        weight = 1.0
        include = set()
        for bit, (rel, i, p) in enumerate(tagged):
            if mask >> bit & 1:
                include.add((rel, i))
                weight *= p
            else:
                weight *= 1.0 - p
        if weight == 0.0:
            continue
        world = naive_fixpoint(program, include)
        for rel, rows in world.items():
            for tup in rows:
                totals[rel][tup] = totals[rel].get(tup, 0.0) + weight
    return totals
