"""Safe arithmetic expression evaluator.

Replaces general code evaluation for math-pipeline step strings: supports
+ - * /, parentheses, unary minus, numeric literals, and ``{name}``
variable substitution from a ``name=value;...`` bindings string.
"""

from __future__ import annotations

from relog.errors import ForeignEvalError


def parse_bindings(bindings: str) -> dict[str, float]:
    env: dict[str, float] = {}
    for part in bindings.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ForeignEvalError("arith_eval", f"malformed binding {part!r}")
        name, _, value = part.partition("=")
        try:
            env[name.strip()] = float(value.strip())
        except ValueError:
            raise ForeignEvalError("arith_eval", f"non-numeric binding {part!r}")
    return env


class _Parser:
    def __init__(self, text: str, env: dict[str, float]):
        self.text = text
        self.env = env
        self.pos = 0

    def error(self, reason: str) -> ForeignEvalError:
        return ForeignEvalError("arith_eval", f"{reason} at offset {self.pos} in {self.text!r}")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def parse(self) -> float:
        value = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error("trailing input")
        return value

    def expr(self) -> float:
        value = self.term()
        while True:
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] in "+-":
                op = self.text[self.pos]
                self.pos += 1
                rhs = self.term()
                value = value + rhs if op == "+" else value - rhs
            else:
                return value

    def term(self) -> float:
        value = self.factor()
        while True:
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] in "*/":
                op = self.text[self.pos]
                self.pos += 1
                rhs = self.factor()
                if op == "*":
                    value = value * rhs
                else:
                    if rhs == 0.0:
                        raise self.error("division by zero")
                    value = value / rhs
            else:
                return value

    def factor(self) -> float:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of expression")
        ch = self.text[self.pos]
        if ch == "-":
            self.pos += 1
            return -self.factor()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return value
        if ch == "{":
            end = self.text.find("}", self.pos)
            if end < 0:
                raise self.error("unterminated '{name}'")
            name = self.text[self.pos + 1:end].strip()
            self.pos = end + 1
            if name not in self.env:
                raise ForeignEvalError("arith_eval", f"unbound variable {name!r}")
            return self.env[name]
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit()
                                             or self.text[self.pos] == "."):
            self.pos += 1
        token = self.text[start:self.pos]
        if not token:
            raise self.error(f"unexpected character {ch!r}")
        try:
            return float(token)
        except ValueError:
            raise self.error(f"invalid number {token!r}")


def evaluate(expression: str, bindings: str) -> float:
    return _Parser(expression, parse_bindings(bindings)).parse()
