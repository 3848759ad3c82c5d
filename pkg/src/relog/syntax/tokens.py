"""Token kinds for the surface language."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

from relog.syntax.source import Span


class TokenKind(enum.Enum):
    IDENT = "ident"
    DOLLAR_IDENT = "dollar_ident"
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    CHAR = "char"
    DATETIME = "datetime"
    DURATION = "duration"

    # keywords
    KW_IMPORT = "import"
    KW_TYPE = "type"
    KW_CONST = "const"
    KW_REL = "rel"
    KW_QUERY = "query"
    KW_IF = "if"
    KW_THEN = "then"
    KW_ELSE = "else"
    KW_AS = "as"
    KW_AND = "and"
    KW_OR = "or"
    KW_NOT = "not"
    KW_CASE = "case"
    KW_IS = "is"
    KW_WHERE = "where"
    KW_NEW = "new"
    KW_BOUND = "bound"
    KW_FREE = "free"
    KW_EXTERN = "extern"
    KW_TRUE = "true"
    KW_FALSE = "false"

    # punctuation and operators
    LPAREN = "("
    RPAREN = ")"
    LBRACE = "{"
    RBRACE = "}"
    LBRACKET = "["
    RBRACKET = "]"
    COMMA = ","
    SEMI = ";"
    COLON = ":"
    COLONCOLON = "::"
    COLONEQ = ":="
    EQ = "="
    EQEQ = "=="
    NEQ = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    SLASH = "/"
    PERCENT = "%"
    TILDE_EQ = "~="
    AT = "@"
    PIPE = "|"
    BANG = "!"
    ARROW = "->"
    SUBTYPE = "<:"
    UNDERSCORE = "_"

    EOF = "eof"


KEYWORDS = {
    "import": TokenKind.KW_IMPORT,
    "type": TokenKind.KW_TYPE,
    "const": TokenKind.KW_CONST,
    "rel": TokenKind.KW_REL,
    "query": TokenKind.KW_QUERY,
    "if": TokenKind.KW_IF,
    "then": TokenKind.KW_THEN,
    "else": TokenKind.KW_ELSE,
    "as": TokenKind.KW_AS,
    "and": TokenKind.KW_AND,
    "or": TokenKind.KW_OR,
    "not": TokenKind.KW_NOT,
    "case": TokenKind.KW_CASE,
    "is": TokenKind.KW_IS,
    "where": TokenKind.KW_WHERE,
    "new": TokenKind.KW_NEW,
    "bound": TokenKind.KW_BOUND,
    "free": TokenKind.KW_FREE,
    "extern": TokenKind.KW_EXTERN,
    "true": TokenKind.KW_TRUE,
    "false": TokenKind.KW_FALSE,
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span
    value: Any = None

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.lexeme!r})"
