"""Post-typecheck rewrites: tensor soft-joins and disjunctive heads."""

from __future__ import annotations

from relog.errors import ProbSumExceedsOneError, TypeCheckError
from relog.syntax import ast
from relog.typesys.typed import Agg, Cond, Conjunct, Lit, Soft, TypedHead, TypedProgram, TypedRule


def _rename_expr(e: ast.Expr, mapping: dict[str, str]) -> ast.Expr:
    if isinstance(e, ast.VarRef):
        if e.name in mapping:
            return ast.VarRef(mapping[e.name], e.span)
        return e
    if isinstance(e, ast.Binary):
        return ast.Binary(e.op, _rename_expr(e.left, mapping),
                          _rename_expr(e.right, mapping), e.span)
    if isinstance(e, ast.Unary):
        return ast.Unary(e.op, _rename_expr(e.operand, mapping), e.span)
    if isinstance(e, ast.IfThenElse):
        return ast.IfThenElse(_rename_expr(e.cond, mapping),
                              _rename_expr(e.then, mapping),
                              _rename_expr(e.orelse, mapping), e.span)
    if isinstance(e, ast.Cast):
        return ast.Cast(_rename_expr(e.operand, mapping), e.ty, e.span)
    if isinstance(e, ast.ForeignFnCall):
        return ast.ForeignFnCall(e.name, [_rename_expr(a, mapping) for a in e.args], e.span)
    if isinstance(e, ast.NewEntity):
        return ast.NewEntity(e.constructor, [_rename_expr(a, mapping) for a in e.args], e.span)
    return e


def desugar_tensor_joins(typed: TypedProgram, registry_relations=None) -> TypedProgram:
    """Rename repeated Tensor variables and chain soft-eq constraints.

    A Tensor variable is "produced" where a positive atom can bind it: a
    stored-relation argument or a free foreign-predicate argument. With n
    producers the occurrences become v__1..v__n joined by n-1 chained
    soft-eqs; every consumer (bound foreign argument, expression, head)
    reads v__1.
    """
    relations = typed.relations
    for rule in typed.rules:
        _desugar_rule_tensors(rule, relations)
    return typed


def _desugar_rule_tensors(rule: TypedRule, relations) -> None:
    rule.conjuncts = _desugar_conjuncts(rule.conjuncts, rule.var_types, relations)
    for head in rule.heads:
        mapping = {v: f"{v}__1" for v in _tensor_renames(rule.var_types)}
        if mapping:
            head.args = [_rename_expr(a, mapping) for a in head.args]


def _tensor_renames(var_types: dict[str, str]) -> set[str]:
    return {v[:-3] for v in var_types if v.endswith("__1")}


def _desugar_conjuncts(conjuncts: list[Conjunct], var_types: dict[str, str],
                       relations) -> list[Conjunct]:
    tensor_vars = {v for v, t in var_types.items() if t == "Tensor"}
    if not tensor_vars:
        for c in conjuncts:
            if isinstance(c, Agg):
                c.inner = [_desugar_conjuncts(d, var_types, relations) for d in c.inner]
                if c.where is not None:
                    c.where = [_desugar_conjuncts(d, var_types, relations) for d in c.where]
        return conjuncts

    producer_counts: dict[str, int] = {v: 0 for v in tensor_vars}
    for c in conjuncts:
        if isinstance(c, Lit) and c.positive:
            sig = relations.get(c.atom.predicate)
            per_atom: set[str] = set()
            for pos, arg in enumerate(c.atom.args):
                if not isinstance(arg, ast.VarRef) or arg.name not in tensor_vars:
                    continue
                is_producer = True
                if sig is not None and sig.kind == "foreign" \
                        and pos in sig.bound_positions():
                    is_producer = False
                if is_producer:
                    if arg.name in per_atom:
                        raise TypeCheckError(
                            f"tensor variable '{arg.name}' occurs twice in one "
                            f"atom of '{c.atom.predicate}' (soft self-join is "
                            "not supported)", c.atom.span)
                    per_atom.add(arg.name)
                    producer_counts[arg.name] += 1

    split_vars = {v for v, n in producer_counts.items() if n >= 2}
    if not split_vars:
        return conjuncts

    counters = {v: 0 for v in split_vars}
    out: list[Conjunct] = []
    consumer_map = {v: f"{v}__1" for v in split_vars}
    for c in conjuncts:
        if isinstance(c, Lit):
            sig = relations.get(c.atom.predicate)
            new_args: list[ast.Expr] = []
            for pos, arg in enumerate(c.atom.args):
                if isinstance(arg, ast.VarRef) and arg.name in split_vars and c.positive:
                    is_producer = not (sig is not None and sig.kind == "foreign"
                                       and pos in sig.bound_positions())
                    if is_producer:
                        counters[arg.name] += 1
                        new_args.append(ast.VarRef(f"{arg.name}__{counters[arg.name]}",
                                                   arg.span))
                        continue
                new_args.append(_rename_expr(arg, consumer_map))
            out.append(Lit(ast.Atom(c.atom.predicate, new_args, c.atom.span), c.positive))
        elif isinstance(c, Cond):
            expr = _rename_expr(c.expr, consumer_map)
            rhs = _rename_expr(c.rhs, consumer_map) if c.rhs is not None else None
            out.append(Cond(expr, c.binds, rhs))
        elif isinstance(c, Soft):
            out.append(Soft(consumer_map.get(c.left, c.left),
                            consumer_map.get(c.right, c.right)))
        elif isinstance(c, Agg):
            c.inner = [_desugar_conjuncts(d, var_types, relations) for d in c.inner]
            if c.where is not None:
                c.where = [_desugar_conjuncts(d, var_types, relations) for d in c.where]
            out.append(c)
        else:
            out.append(c)

    for v in sorted(split_vars):
        n = counters[v]
        for i in range(1, n):
            out.append(Soft(f"{v}__{i}", f"{v}__{i + 1}"))
        for i in range(1, n + 1):
            var_types[f"{v}__{i}"] = "Tensor"
        del var_types[v]
    return out


def desugar_disjunctive_heads(typed: TypedProgram) -> TypedProgram:
    """Split untagged multi-head rules; validate annotated disjunctions.

    Tagged rules (any head carrying a probability) stay single units whose
    heads share one fresh categorical variable per grounding at runtime.
    """
    out: list[TypedRule] = []
    next_id = 0
    for rule in typed.rules:
        probs = [h.prob for h in rule.heads]
        tagged = [p for p in probs if p is not None]
        if tagged and len(tagged) != len(probs):
            raise ProbSumExceedsOneError(
                "either all heads of a rule carry probabilities or none do",
                rule.span)
        if tagged:
            total = sum(tagged)
            if total > 1.0 + 1e-9:
                raise ProbSumExceedsOneError(
                    f"head probabilities sum to {total:.6g} > 1", rule.span)
            for p in tagged:
                if p < 0.0 or p > 1.0:
                    raise ProbSumExceedsOneError(
                        f"head probability {p} outside [0, 1]", rule.span)
            rule.rule_id = next_id
            next_id += 1
            out.append(rule)
            continue
        if len(rule.heads) == 1:
            rule.rule_id = next_id
            next_id += 1
            out.append(rule)
            continue
        for head in rule.heads:
            split = TypedRule(
                heads=[TypedHead(head.relation, head.args, None)],
                conjuncts=rule.conjuncts,
                var_types=rule.var_types,
                span=rule.span,
                rule_id=next_id,
                source_order=rule.source_order,
            )
            next_id += 1
            out.append(split)
    typed.rules = out
    return typed
