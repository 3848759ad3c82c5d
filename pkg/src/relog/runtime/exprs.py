"""Dynamic expression evaluation with checked arithmetic.

Static types annotate overflow checks and literal coercions (a string
literal in a DateTime/Duration/ADT position converts on evaluation); the
values themselves are dynamically dispatched.
"""

from __future__ import annotations

import datetime as _dt
import math
from typing import Optional

from relog.errors import (
    ArithmeticOverflowError,
    DivisionByZeroError,
    InternalError,
    InvalidCastError,
)
from relog.runtime.values import (
    Duration, Entity, datetime_add, datetime_diff, datetime_sub,
    datetime_to_text, parse_datetime,
)
from relog.syntax import ast
from relog.syntax.adt_text import parse_adt_value
from relog.typesys.types import INT_RANGES, is_float_type, is_int_type


class ExprEvaluator:
    """Evaluates type-checked expressions against an environment.

    Needs the surrounding runtime pieces: const values, the term store,
    the ADT registry, foreign functions, and the checker's expression
    types.
    """

    def __init__(self, consts: dict, store, registry, ffi, expr_type):
        self.consts = consts
        self.store = store
        self.registry = registry
        self.ffi = ffi
        self.expr_type = expr_type

    def eval(self, e: ast.Expr, env: dict):
        if isinstance(e, ast.Constant):
            return self.constant_value(e)
        if isinstance(e, ast.VarRef):
            if e.name in env:
                return env[e.name]
            if e.name in self.consts:
                return self.consts[e.name]
            raise InternalError(f"unbound variable '{e.name}'", e.span)
        if isinstance(e, ast.ConstRef):
            return self.consts[e.name]
        if isinstance(e, ast.Binary):
            if e.op in ("==", "!=", "<", "<=", ">", ">="):
                return self._compare(e, env)
            return self._arith(e, env)
        if isinstance(e, ast.Unary):
            v = self.eval(e.operand, env)
            if e.op == "!":
                return not v
            if e.op == "-":
                out = -v
                self._check_int_range(out, self.expr_type(e), e.span)
                return out
            raise InternalError(f"unknown unary '{e.op}'", e.span)
        if isinstance(e, ast.IfThenElse):
            return self.eval(e.then if self.eval(e.cond, env) else e.orelse, env)
        if isinstance(e, ast.Cast):
            return self.cast(self.eval(e.operand, env), e.ty.name, e.span)
        if isinstance(e, ast.ForeignFnCall):
            ff = self.ffi.lookup_function(e.name)
            if ff is None:
                raise InternalError(f"unknown foreign function '{e.name}'", e.span)
            args = [self.eval(a, env) for a in e.args]
            return ff.evaluator(*args)
        if isinstance(e, ast.NewEntity):
            args = tuple(self.eval(a, env) for a in e.args)
            adt = self.registry.owner_of(e.constructor, e.span)
            return self.store.intern(adt, e.constructor, args)
        raise InternalError(f"cannot evaluate {type(e).__name__}", getattr(e, "span", None))

    def constant_value(self, c: ast.Constant):
        ty = self.expr_type(c)
        if c.kind is ast.ConstKind.INT:
            if ty is not None and is_float_type(ty):
                return float(c.value)
            return int(c.value)
        if c.kind is ast.ConstKind.FLOAT:
            return float(c.value)
        if c.kind is ast.ConstKind.BOOL:
            return bool(c.value)
        if c.kind is ast.ConstKind.CHAR:
            return str(c.value)
        if c.kind is ast.ConstKind.STRING:
            if ty == "DateTime":
                return parse_datetime(c.value)
            if ty == "Duration":
                return Duration.parse(c.value)
            if ty is not None and self.registry.is_adt(ty):
                return self.store.intern_tree(parse_adt_value(c.value, ty, self.registry))
            return str(c.value)
        if c.kind is ast.ConstKind.DATETIME:
            return parse_datetime(c.value)
        if c.kind is ast.ConstKind.DURATION:
            return Duration.parse(c.value)
        raise InternalError(f"unknown constant kind {c.kind}", c.span)

    def _compare(self, e: ast.Binary, env) -> bool:
        l = self.eval(e.left, env)
        r = self.eval(e.right, env)
        if e.op == "==":
            return l == r
        if e.op == "!=":
            return l != r
        if e.op == "<":
            return l < r
        if e.op == "<=":
            return l <= r
        if e.op == ">":
            return l > r
        return l >= r

    def _arith(self, e: ast.Binary, env):
        l = self.eval(e.left, env)
        r = self.eval(e.right, env)
        op = e.op
        if isinstance(l, _dt.datetime):
            if isinstance(r, Duration):
                if op == "+":
                    return datetime_add(l, r)
                if op == "-":
                    return datetime_sub(l, r)
            if isinstance(r, _dt.datetime) and op == "-":
                return datetime_diff(l, r)
            raise InternalError(f"invalid datetime arithmetic '{op}'", e.span)
        if isinstance(l, Duration) or isinstance(r, Duration):
            if isinstance(l, Duration) and isinstance(r, Duration):
                if op == "+":
                    return l + r
                if op == "-":
                    return l - r
            if isinstance(l, Duration) and isinstance(r, _dt.datetime) and op == "+":
                return datetime_add(r, l)
            raise InternalError(f"invalid duration arithmetic '{op}'", e.span)
        if isinstance(l, float) or isinstance(r, float):
            if op in ("/", "%") and r == 0.0:
                raise DivisionByZeroError("division by zero", e.span)
            out = {"+": lambda: l + r, "-": lambda: l - r, "*": lambda: l * r,
                   "/": lambda: l / r, "%": lambda: math.fmod(l, r)}[op]()
            if math.isinf(out):
                raise ArithmeticOverflowError("float overflow", e.span)
            return out
        # integer arithmetic, truncating division, checked range
        if op in ("/", "%") and r == 0:
            raise DivisionByZeroError("division by zero", e.span)
        if op == "+":
            out = l + r
        elif op == "-":
            out = l - r
        elif op == "*":
            out = l * r
        elif op == "/":
            out = abs(l) // abs(r)
            if (l < 0) != (r < 0):
                out = -out
        else:  # %
            q = abs(l) // abs(r)
            if (l < 0) != (r < 0):
                q = -q
            out = l - q * r
        self._check_int_range(out, self.expr_type(e), e.span)
        return out

    def _check_int_range(self, value, ty: Optional[str], span) -> None:
        if not isinstance(value, int) or isinstance(value, bool):
            return
        lo, hi = INT_RANGES.get(ty or "i64", INT_RANGES["i64"])
        if not (lo <= value <= hi):
            raise ArithmeticOverflowError(
                f"integer result {value} out of range for {ty or 'i64'}", span)

    # -- casts -----------------------------------------------------------------

    def cast(self, value, to_type: str, span=None):
        ty = to_type
        if ty == "String":
            return self.to_string(value)
        if is_int_type(ty):
            if isinstance(value, bool):
                out = int(value)
            elif isinstance(value, (int, float)):
                out = int(value)  # truncation toward zero
            elif isinstance(value, str):
                try:
                    out = int(value.strip())
                except ValueError:
                    raise InvalidCastError(f"cannot cast {value!r} to {ty}", span)
            elif isinstance(value, Duration) and value.months == 0:
                out = value.micros // 1_000_000
            else:
                raise InvalidCastError(f"cannot cast {type(value).__name__} to {ty}", span)
            lo, hi = INT_RANGES[ty]
            if not (lo <= out <= hi):
                raise InvalidCastError(f"{out} out of range for {ty}", span)
            return out
        if is_float_type(ty):
            if isinstance(value, (int, float, bool)):
                return float(value)
            if isinstance(value, str):
                try:
                    return float(value.strip())
                except ValueError:
                    raise InvalidCastError(f"cannot cast {value!r} to {ty}", span)
            raise InvalidCastError(f"cannot cast {type(value).__name__} to {ty}", span)
        if ty == "bool":
            if isinstance(value, bool):
                return value
            raise InvalidCastError(f"cannot cast {type(value).__name__} to bool", span)
        if ty == "char":
            if isinstance(value, str) and len(value) == 1:
                return value
            raise InvalidCastError("cannot cast to char", span)
        if ty == "DateTime":
            if isinstance(value, _dt.datetime):
                return value
            if isinstance(value, str):
                return parse_datetime(value)
            raise InvalidCastError(f"cannot cast {type(value).__name__} to DateTime", span)
        if ty == "Duration":
            if isinstance(value, Duration):
                return value
            if isinstance(value, str):
                return Duration.parse(value)
            raise InvalidCastError(f"cannot cast {type(value).__name__} to Duration", span)
        if self.registry.is_adt(ty):
            if isinstance(value, Entity):
                return value
            if isinstance(value, str):
                return self.store.intern_tree(parse_adt_value(value, ty, self.registry))
            raise InvalidCastError(f"cannot cast {type(value).__name__} to {ty}", span)
        raise InvalidCastError(f"cannot cast to '{ty}'", span)

    def to_string(self, value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return repr(value)
        if isinstance(value, str):
            return value
        if isinstance(value, _dt.datetime):
            return datetime_to_text(value)
        if isinstance(value, Duration):
            return value.canonical()
        if isinstance(value, Entity):
            return self.store.to_text(value)
        raise InvalidCastError(f"cannot cast {type(value).__name__} to String")
