"""Hypothesis strategies generating well-formed surface ASTs.

Used for the printer/parser round-trip property. Spans are placeholders;
round-trip comparison ignores them.
"""

import dataclasses
import math

from hypothesis import strategies as st

from relog.syntax import ast
from relog.syntax.source import Span

SPAN = Span("<gen>", 0, 1, 1, 1)

lower_names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in {"rel", "type", "const", "query", "import", "if", "then",
                        "else", "as", "and", "or", "not", "case", "is", "where",
                        "new", "bound", "free", "extern", "true", "false"})
upper_names = st.from_regex(r"[A-Z][a-zA-Z0-9]{0,6}", fullmatch=True)
type_names = st.sampled_from(["i32", "i64", "u32", "f32", "f64", "bool", "String",
                              "char", "DateTime", "Duration", "Tensor"])

safe_text = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=0xFFFF,
                           blacklist_categories=("Cs",)),
    max_size=12)

pos_floats = st.floats(min_value=0.0, max_value=1e9, allow_nan=False,
                       allow_infinity=False).filter(
    lambda x: math.copysign(1.0, x) > 0)


def constants():
    return st.one_of(
        st.integers(min_value=0, max_value=10**9).map(
            lambda v: ast.Constant(ast.ConstKind.INT, v, SPAN)),
        pos_floats.map(lambda v: ast.Constant(ast.ConstKind.FLOAT, v, SPAN)),
        st.booleans().map(lambda v: ast.Constant(ast.ConstKind.BOOL, v, SPAN)),
        safe_text.map(lambda v: ast.Constant(ast.ConstKind.STRING, v, SPAN)),
    )


def exprs(depth=2):
    base = st.one_of(
        constants(),
        lower_names.map(lambda n: ast.VarRef(n, SPAN)),
    )
    if depth == 0:
        return base
    sub = exprs(depth - 1)
    return st.one_of(
        base,
        st.tuples(st.sampled_from(["+", "-", "*", "/", "%", "==", "!=", "<",
                                   "<=", ">", ">="]), sub, sub).map(
            lambda t: ast.Binary(t[0], t[1], t[2], SPAN)),
        sub.map(lambda e: ast.Unary("!", e, SPAN)),
        sub.map(lambda e: ast.Unary("-", e, SPAN)),
        st.tuples(sub, sub, sub).map(
            lambda t: ast.IfThenElse(t[0], t[1], t[2], SPAN)),
        st.tuples(sub, type_names).map(
            lambda t: ast.Cast(t[0], ast.TypeExpr(t[1], SPAN), SPAN)),
        st.tuples(lower_names, st.lists(sub, max_size=2)).map(
            lambda t: ast.ForeignFnCall("$" + t[0], t[1], SPAN)),
        st.tuples(upper_names, st.lists(sub, max_size=2)).map(
            lambda t: ast.NewEntity(t[0], t[1], SPAN)),
    )


def atoms():
    return st.tuples(lower_names, st.lists(exprs(1), max_size=3)).map(
        lambda t: ast.Atom(t[0], t[1], SPAN))


def patterns(depth=2):
    base = st.one_of(
        lower_names.map(lambda n: ast.VarRef(n, SPAN)),
        st.just(ast.Wildcard(SPAN)),
        constants(),
    )
    if depth == 0:
        inner = base
    else:
        inner = st.one_of(base, st.deferred(lambda: entity_patterns(depth - 1)))
    return inner


def entity_patterns(depth=1):
    return st.tuples(upper_names, st.lists(patterns(depth), max_size=2)).map(
        lambda t: ast.EntityPattern(t[0], t[1], SPAN))


def formulas(depth=2):
    # a bare `Cons(...)` in formula position parses as an atom, so root-level
    # constructor applications cannot round-trip as constraints
    base = st.one_of(
        atoms(),
        exprs(1).filter(lambda e: not isinstance(e, ast.NewEntity)).map(
            lambda e: ast.Constraint(e, SPAN)),
        st.tuples(lower_names, entity_patterns()).map(
            lambda t: ast.CaseIs(t[0], t[1], SPAN)),
        st.tuples(lower_names, lower_names).map(
            lambda t: ast.SoftEq(t[0], t[1], SPAN)),
    )
    if depth == 0:
        return base
    sub = formulas(depth - 1)
    return st.one_of(
        base,
        st.lists(sub, min_size=2, max_size=3).map(lambda fs: ast.And(fs, SPAN)),
        st.lists(sub, min_size=2, max_size=3).map(lambda fs: ast.Or(fs, SPAN)),
        atoms().map(lambda a: ast.Not(a, SPAN)),
        st.tuples(lower_names, st.sampled_from(["count", "exists", "min", "max", "sum"]),
                  st.lists(lower_names, min_size=1, max_size=2, unique=True), sub).map(
            lambda t: ast.Aggregate([t[0]], t[1], t[2], t[3], [], None, SPAN)),
        st.tuples(lower_names, st.sampled_from(["count", "exists"]),
                  st.lists(lower_names, min_size=1, max_size=2, unique=True),
                  sub, st.lists(lower_names, min_size=1, max_size=2, unique=True),
                  sub).map(
            lambda t: ast.Aggregate([t[0]], t[1], t[2], t[3], t[4], t[5], SPAN)),
    )


def attribute_values(depth=1):
    base = st.one_of(st.integers(min_value=0, max_value=1000), pos_floats,
                     st.booleans(), safe_text)
    if depth == 0:
        return base
    sub = attribute_values(depth - 1)
    return st.one_of(base, st.lists(sub, max_size=3),
                     st.lists(sub, max_size=3).map(tuple))


def attributes():
    return st.tuples(lower_names, st.lists(attribute_values(), max_size=2),
                     st.dictionaries(lower_names, attribute_values(), max_size=2)).map(
        lambda t: ast.AttributeUse(t[0], t[1], t[2], SPAN))


def items():
    fact = st.tuples(
        st.one_of(st.none(), st.floats(min_value=0.0, max_value=1.0,
                                       allow_nan=False).map(float)),
        st.lists(exprs(1), min_size=1, max_size=3)).map(
        lambda t: ast.FactSpec(t[0], t[1], SPAN))
    rule_heads = st.lists(
        st.tuples(st.none() | st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
                  atoms()).map(lambda t: ast.RuleHead(t[0], t[1], SPAN)),
        min_size=1, max_size=2)
    return st.one_of(
        st.tuples(lower_names, st.lists(fact, min_size=1, max_size=3)).map(
            lambda t: ast.FactSetDecl(t[0], t[1], SPAN)),
        st.tuples(rule_heads, formulas()).map(
            lambda t: ast.RuleDecl(t[0], t[1], SPAN,
                                   multi_head_braced=len(t[0]) > 1)),
        lower_names.map(lambda n: ast.QueryDecl(n, SPAN)),
        st.tuples(lower_names, exprs(1)).map(
            lambda t: ast.ConstDecl(t[0].upper(), t[1], SPAN)),
        st.tuples(upper_names,
                  st.lists(st.tuples(upper_names, st.lists(type_names, max_size=2)),
                           min_size=1, max_size=3, unique_by=lambda c: c[0])).map(
            lambda t: ast.AdtDecl(t[0], [(c, [ast.TypeExpr(n, SPAN) for n in tys])
                                         for c, tys in t[1]], SPAN)),
        st.tuples(lower_names,
                  st.lists(st.tuples(st.one_of(st.none(), lower_names), type_names,
                                     st.sampled_from(list(ast.Adornment))),
                           max_size=3),
                  st.booleans()).map(
            lambda t: ast.PredicateTypeDecl(
                t[0], [ast.PredicateArg(n, ast.TypeExpr(ty, SPAN), adorn, SPAN)
                       for n, ty, adorn in t[1]], t[2], SPAN)),
    )


def programs():
    decorated = st.tuples(items(), st.lists(attributes(), max_size=2)).map(_attach)
    return st.lists(decorated, max_size=5).map(
        lambda its: ast.SourceProgram(its, "<gen>"))


def _attach(pair):
    item, attrs = pair
    if isinstance(item, ast.PredicateTypeDecl):
        item.attributes = attrs
    return item


def ast_equal(a, b) -> bool:
    """Structural equality ignoring source spans."""
    if isinstance(a, Span) and isinstance(b, Span):
        return True
    if dataclasses.is_dataclass(a) and dataclasses.is_dataclass(b):
        if type(a) is not type(b):
            return False
        for field in dataclasses.fields(a):
            if not ast_equal(getattr(a, field.name), getattr(b, field.name)):
                return False
        return True
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, float):
        return a == b or (math.isnan(a) and math.isnan(b))
    return a == b
