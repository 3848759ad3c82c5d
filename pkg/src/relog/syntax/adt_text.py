"""Textual form of ADT terms.

Semantic-parse style plugins emit terms as strings like
``Exists(FilterColor(FilterShape(Scene(), "cube"), "yellow"))``; this
module parses such strings against a registered ADT and prints terms
back out in a canonical form (double-quoted strings) such that
``parse(print(t)) == t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from relog.errors import AdtParseError

TermArg = Union["TermNode", int, float, bool, str]


@dataclass(frozen=True)
class TermNode:
    adt: str
    constructor: str
    args: tuple[TermArg, ...]


def term_to_text(term: TermArg) -> str:
    if isinstance(term, TermNode):
        return f"{term.constructor}({', '.join(term_to_text(a) for a in term.args)})"
    if isinstance(term, bool):
        return "true" if term else "false"
    if isinstance(term, str):
        return json.dumps(term)
    return repr(term)


class _TermParser:
    def __init__(self, text: str, registry):
        self.text = text
        self.pos = 0
        self.registry = registry

    def error(self, reason: str) -> AdtParseError:
        return AdtParseError(f"at offset {self.pos}: {reason}", self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def parse_term(self, expected_adt: str) -> TermNode:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        name = self.text[start:self.pos]
        if not name:
            raise self.error(f"expected a constructor of '{expected_adt}'")
        constructors = dict(self.registry.constructors_of(expected_adt))
        if name not in constructors:
            raise self.error(f"'{name}' is not a constructor of '{expected_adt}'")
        arg_types = constructors[name]
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != "(":
            raise self.error(f"expected '(' after constructor '{name}'")
        self.pos += 1
        args: list[TermArg] = []
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == ")":
            self.pos += 1
        else:
            while True:
                if len(args) >= len(arg_types):
                    raise self.error(f"too many arguments for '{name}'")
                args.append(self.parse_arg(arg_types[len(args)]))
                self.skip_ws()
                if self.pos >= len(self.text):
                    raise self.error("unterminated argument list")
                ch = self.text[self.pos]
                self.pos += 1
                if ch == ")":
                    break
                if ch != ",":
                    raise self.error(f"expected ',' or ')', found {ch!r}")
        if len(args) != len(arg_types):
            raise self.error(f"'{name}' expects {len(arg_types)} arguments, got {len(args)}")
        return TermNode(expected_adt, name, tuple(args))

    def parse_arg(self, type_name: str) -> TermArg:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        if self.registry.is_adt(type_name):
            return self.parse_term(type_name)
        ch = self.text[self.pos]
        if ch in "\"'":
            value = self.parse_string(ch)
            if type_name == "char":
                if len(value) != 1:
                    raise self.error("char literal must be one character")
                return value
            if type_name != "String":
                raise self.error(f"string literal where {type_name} expected")
            return value
        if self.text.startswith("true", self.pos) or self.text.startswith("false", self.pos):
            if type_name != "bool":
                raise self.error(f"bool literal where {type_name} expected")
            if self.text.startswith("true", self.pos):
                self.pos += 4
                return True
            self.pos += 5
            return False
        return self.parse_number(type_name)

    def parse_string(self, quote: str) -> str:
        self.pos += 1
        chars: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == quote:
                self.pos += 1
                return "".join(chars)
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise self.error("unterminated escape")
                nxt = self.text[self.pos + 1]
                simple = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "'": "'", "\\": "\\"}
                if nxt == "u":
                    hex_digits = self.text[self.pos + 2:self.pos + 6]
                    if len(hex_digits) != 4:
                        raise self.error("invalid \\u escape")
                    try:
                        chars.append(chr(int(hex_digits, 16)))
                    except ValueError:
                        raise self.error("invalid \\u escape")
                    self.pos += 6
                    continue
                if nxt not in simple:
                    raise self.error(f"invalid escape '\\{nxt}'")
                chars.append(simple[nxt])
                self.pos += 2
            else:
                chars.append(ch)
                self.pos += 1

    def parse_number(self, type_name: str):
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] in ".eE+-"):
            if self.text[self.pos] in "+-" and self.text[self.pos - 1] not in "eE":
                break
            self.pos += 1
        token = self.text[start:self.pos]
        if not token:
            raise self.error(f"expected a {type_name} literal")
        is_float = type_name in ("f32", "f64")
        try:
            return float(token) if is_float else int(token)
        except ValueError:
            raise self.error(f"invalid {type_name} literal {token!r}")


def parse_adt_value(text: str, expected_type: str, registry) -> TermNode:
    """Parse ``Cons(arg, ...)`` syntax into a typed term tree.

    ``registry`` needs ``is_adt(name)`` and ``constructors_of(name)``
    (yielding ``(constructor, [arg type names])``). Raises AdtParseError
    on any malformed or ill-typed input, including trailing garbage.
    """
    if not registry.is_adt(expected_type):
        raise AdtParseError(f"'{expected_type}' is not a registered ADT")
    parser = _TermParser(text, registry)
    term = parser.parse_term(expected_type)
    parser.skip_ws()
    if parser.pos != len(text):
        raise AdtParseError(f"trailing input after term at offset {parser.pos}", parser.pos)
    return term
