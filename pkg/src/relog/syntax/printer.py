"""Pretty-printer emitting surface syntax that re-parses to the same AST."""

from __future__ import annotations

import json

from relog.syntax import ast

_PRECEDENCE = {
    "==": 1, "!=": 1,
    "<": 2, "<=": 2, ">": 2, ">=": 2,
    "+": 3, "-": 3,
    "*": 4, "/": 4, "%": 4,
}


def print_program(program: ast.SourceProgram) -> str:
    return "\n".join(print_item(item) for item in program.items) + "\n"


def print_item(item: ast.Item) -> str:
    lines = [print_attribute(a) for a in item.attributes]
    lines.append(_print_decl(item))
    return "\n".join(lines)


def print_attribute(attr: ast.AttributeUse) -> str:
    parts = [_attr_value(v) for v in attr.pos_args]
    parts += [f"{k}={_attr_value(v)}" for k, v in attr.kw_args.items()]
    if not parts:
        return f"@{attr.name}"
    return f"@{attr.name}({', '.join(parts)})"


def _attr_value(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_attr_value(x) for x in v) + "]"
    if isinstance(v, tuple):
        inner = ", ".join(_attr_value(x) for x in v)
        if len(v) == 1:
            inner += ","
        return "(" + inner + ")"
    raise TypeError(f"unprintable attribute value {v!r}")


def _print_decl(item: ast.Item) -> str:
    if isinstance(item, ast.ImportDecl):
        return f'import {json.dumps(item.path)}'
    if isinstance(item, ast.AliasDecl):
        return f"type {item.name} = {item.target.name}"
    if isinstance(item, ast.SubTypeDecl):
        return f"type {item.name} <: {item.parent.name}"
    if isinstance(item, ast.AdtDecl):
        cons = " | ".join(f"{c}({', '.join(t.name for t in tys)})"
                          for c, tys in item.constructors)
        return f"type {item.name} = {cons}"
    if isinstance(item, ast.PredicateTypeDecl):
        args = []
        for a in item.args:
            prefix = ""
            if a.adornment is ast.Adornment.BOUND:
                prefix = "bound "
            elif a.adornment is ast.Adornment.FREE:
                prefix = "free "
            if a.name is not None:
                args.append(f"{prefix}{a.name}: {a.ty.name}")
            else:
                args.append(f"{prefix}{a.ty.name}")
        extern = "extern " if item.extern else ""
        return f"{extern}type {item.name}({', '.join(args)})"
    if isinstance(item, ast.ForeignFunctionTypeDecl):
        args = ", ".join(t.name if n is None else f"{n}: {t.name}" for n, t in item.args)
        return f"type {item.name}({args}) -> {item.ret.name}"
    if isinstance(item, ast.ConstDecl):
        return f"const {item.name} = {print_expr(item.value)}"
    if isinstance(item, ast.FactSetDecl):
        facts = []
        for f in item.facts:
            tup = "(" + ", ".join(print_expr(v) for v in f.values) + ")"
            if len(f.values) == 1:
                tup = "(" + print_expr(f.values[0]) + ",)"
            facts.append(tup if f.prob is None else f"{f.prob!r}::{tup}")
        return f"rel {item.name} = {{{', '.join(facts)}}}"
    if isinstance(item, ast.RuleDecl):
        if len(item.heads) == 1 and not item.multi_head_braced:
            h = item.heads[0]
            prob = "" if h.prob is None else f"{h.prob!r}::"
            return f"rel {prob}{print_atom(h.atom)} = {print_formula(item.body)}"
        heads = []
        for h in item.heads:
            prob = "" if h.prob is None else f"{h.prob!r}::"
            heads.append(f"{prob}{print_atom(h.atom)}")
        return f"rel {{{'; '.join(heads)}}} = {print_formula(item.body)}"
    if isinstance(item, ast.QueryDecl):
        return f"query {item.predicate}"
    raise TypeError(f"unprintable item {item!r}")


def print_atom(atom: ast.Atom) -> str:
    return f"{atom.predicate}({', '.join(print_expr(a) for a in atom.args)})"


def print_formula(f: ast.Formula, parent: str = "or") -> str:
    if isinstance(f, ast.Atom):
        return print_atom(f)
    if isinstance(f, ast.And):
        text = " and ".join(print_formula(p, "and") for p in f.parts)
        # parenthesize under `and` too: the parser flattens bare chains
        return f"({text})" if parent in ("and", "not") else text
    if isinstance(f, ast.Or):
        text = " or ".join(print_formula(p, "or") for p in f.parts)
        return f"({text})" if parent in ("and", "not", "or") else text
    if isinstance(f, ast.Not):
        return f"not {print_formula(f.operand, 'not')}"
    if isinstance(f, ast.Constraint):
        return print_expr(f.expr)
    if isinstance(f, ast.CaseIs):
        return f"case {f.var} is {print_pattern(f.pattern)}"
    if isinstance(f, ast.SoftEq):
        return f"{f.left} ~= {f.right}"
    if isinstance(f, ast.Aggregate):
        res = ", ".join(f.result_vars)
        binds = ", ".join(f.binding_vars)
        inner = print_formula(f.inner)
        if f.where is not None:
            wvars = ", ".join(f.where_vars)
            return f"{res} := {f.operator}({binds}: {inner} where {wvars}: {print_formula(f.where)})"
        return f"{res} := {f.operator}({binds}: {inner})"
    raise TypeError(f"unprintable formula {f!r}")


def print_pattern(p: ast.Pattern) -> str:
    if isinstance(p, ast.EntityPattern):
        return f"{p.constructor}({', '.join(print_pattern(a) for a in p.args)})"
    if isinstance(p, ast.VarRef):
        return p.name
    if isinstance(p, ast.Wildcard):
        return "_"
    if isinstance(p, ast.Constant):
        return _print_constant(p)
    raise TypeError(f"unprintable pattern {p!r}")


def print_expr(e: ast.Expr, parent_bp: int = 0) -> str:
    if isinstance(e, ast.Constant):
        return _print_constant(e)
    if isinstance(e, ast.VarRef):
        return e.name
    if isinstance(e, ast.Wildcard):
        return "_"
    if isinstance(e, ast.Binary):
        bp = _PRECEDENCE[e.op]
        text = f"{print_expr(e.left, bp)} {e.op} {print_expr(e.right, bp + 1)}"
        return f"({text})" if bp < parent_bp else text
    if isinstance(e, ast.Unary):
        return f"{e.op}{print_expr(e.operand, 10)}"
    if isinstance(e, ast.IfThenElse):
        text = f"if {print_expr(e.cond)} then {print_expr(e.then)} else {print_expr(e.orelse)}"
        return f"({text})" if parent_bp > 0 else text
    if isinstance(e, ast.Cast):
        return f"{print_expr(e.operand, 10)} as {e.ty.name}"
    if isinstance(e, ast.ForeignFnCall):
        return f"{e.name}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, ast.NewEntity):
        return f"{e.constructor}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, ast.ConstRef):
        return e.name
    raise TypeError(f"unprintable expression {e!r}")


def _print_constant(c: ast.Constant) -> str:
    if c.kind is ast.ConstKind.BOOL:
        return "true" if c.value else "false"
    if c.kind is ast.ConstKind.INT:
        return repr(c.value)
    if c.kind is ast.ConstKind.FLOAT:
        v = repr(float(c.value))
        return v
    if c.kind is ast.ConstKind.STRING:
        return json.dumps(c.value)
    if c.kind is ast.ConstKind.CHAR:
        inner = c.value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{inner}'"
    if c.kind is ast.ConstKind.DATETIME:
        return f't"{c.value}"'
    if c.kind is ast.ConstKind.DURATION:
        return f'd"{c.value}"'
    raise TypeError(f"unprintable constant {c!r}")
