"""Lexer for the surface language.

Supports ``//`` line comments, triple-quoted and single/double quoted
strings (``{{...}}`` template braces pass through verbatim), ``t"..."``
datetime and ``d"..."`` duration literals, dollar-prefixed foreign
function names, and the two-character operators ``::``, ``~=``, ``:=``,
``==``, ``!=``, ``<=``, ``>=``, ``->``, ``<:``.
"""

from __future__ import annotations

from relog.errors import LexError
from relog.syntax.source import SourceText
from relog.syntax.tokens import KEYWORDS, Token, TokenKind

_TWO_CHAR = {
    "::": TokenKind.COLONCOLON,
    ":=": TokenKind.COLONEQ,
    "==": TokenKind.EQEQ,
    "!=": TokenKind.NEQ,
    "<=": TokenKind.LE,
    ">=": TokenKind.GE,
    "~=": TokenKind.TILDE_EQ,
    "->": TokenKind.ARROW,
    "<:": TokenKind.SUBTYPE,
}

_ONE_CHAR = {
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    ",": TokenKind.COMMA,
    ";": TokenKind.SEMI,
    ":": TokenKind.COLON,
    "=": TokenKind.EQ,
    "<": TokenKind.LT,
    ">": TokenKind.GT,
    "+": TokenKind.PLUS,
    "-": TokenKind.MINUS,
    "*": TokenKind.STAR,
    "/": TokenKind.SLASH,
    "%": TokenKind.PERCENT,
    "@": TokenKind.AT,
    "|": TokenKind.PIPE,
    "!": TokenKind.BANG,
}

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "'": "'", "\\": "\\", "0": "\0"}

def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9" if ch else False


class Lexer:
    def __init__(self, source: SourceText):
        self.src = source
        self.text = source.text
        self.pos = 0
        self.n = len(self.text)

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < self.n else ""

    def _span(self, start: int):
        return self.src.span(start, self.pos)

    def error(self, message: str, start: int) -> LexError:
        return LexError(message, self._span(start))

    def tokenize(self) -> list[Token]:
        tokens: list[Token] = []
        while True:
            self._skip_trivia()
            if self.pos >= self.n:
                tokens.append(Token(TokenKind.EOF, "", self._span(self.pos)))
                return tokens
            tokens.append(self._next_token())

    def _skip_trivia(self) -> None:
        while self.pos < self.n:
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "/" and self._peek(1) == "/":
                while self.pos < self.n and self.text[self.pos] != "\n":
                    self.pos += 1
            else:
                return

    def _next_token(self) -> Token:
        start = self.pos
        ch = self.text[self.pos]

        if _is_digit(ch) or (ch == "." and _is_digit(self._peek(1))):
            return self._number(start)
        if ch == "t" and self._peek(1) == '"':
            self.pos += 1
            return self._quoted(start, TokenKind.DATETIME)
        if ch == "d" and self._peek(1) == '"':
            self.pos += 1
            return self._quoted(start, TokenKind.DURATION)
        if ch.isalpha() or ch == "_":
            return self._ident(start)
        if ch == "$":
            self.pos += 1
            if not (self._peek().isalpha() or self._peek() == "_"):
                raise self.error("expected identifier after '$'", start)
            while self._peek().isalnum() or self._peek() == "_":
                self.pos += 1
            name = self.text[start:self.pos]
            return Token(TokenKind.DOLLAR_IDENT, name, self._span(start), name)
        if ch in "\"'":
            return self._quoted(start, TokenKind.STRING if ch == '"' else TokenKind.CHAR)

        two = self.text[self.pos:self.pos + 2]
        if two in _TWO_CHAR:
            self.pos += 2
            return Token(_TWO_CHAR[two], two, self._span(start))
        if ch in _ONE_CHAR:
            self.pos += 1
            return Token(_ONE_CHAR[ch], ch, self._span(start))
        raise self.error(f"illegal character {ch!r}", start)

    def _ident(self, start: int) -> Token:
        while self._peek().isalnum() or self._peek() == "_":
            self.pos += 1
        name = self.text[start:self.pos]
        if name == "_":
            return Token(TokenKind.UNDERSCORE, name, self._span(start))
        kind = KEYWORDS.get(name, TokenKind.IDENT)
        value = name if kind is TokenKind.IDENT else None
        return Token(kind, name, self._span(start), value)

    def _number(self, start: int) -> Token:
        while _is_digit(self._peek()):
            self.pos += 1
        is_float = False
        # Distinguish a fractional dot from other uses; only digits may follow.
        if self._peek() == "." and _is_digit(self._peek(1)):
            is_float = True
            self.pos += 1
            while _is_digit(self._peek()):
                self.pos += 1
        if self._peek() in "eE" and (_is_digit(self._peek(1)) or (self._peek(1) in "+-" and _is_digit(self._peek(2)))):
            is_float = True
            self.pos += 1
            if self._peek() in "+-":
                self.pos += 1
            while _is_digit(self._peek()):
                self.pos += 1
        lexeme = self.text[start:self.pos]
        if is_float:
            return Token(TokenKind.FLOAT, lexeme, self._span(start), float(lexeme))
        return Token(TokenKind.INT, lexeme, self._span(start), int(lexeme))

    def _quoted(self, start: int, kind: TokenKind) -> Token:
        quote = self.text[self.pos]
        if quote == '"' and self.text[self.pos:self.pos + 3] == '"""':
            return self._triple_quoted(start, kind)
        self.pos += 1
        chars: list[str] = []
        while True:
            if self.pos >= self.n or self.text[self.pos] == "\n":
                raise self.error("unterminated string literal", start)
            ch = self.text[self.pos]
            if ch == quote:
                self.pos += 1
                break
            if ch == "\\":
                esc = self._peek(1)
                if esc == "u":
                    hex_digits = self.text[self.pos + 2:self.pos + 6]
                    if len(hex_digits) != 4 or any(c not in "0123456789abcdefABCDEF" for c in hex_digits):
                        raise self.error("invalid \\u escape", self.pos)
                    chars.append(chr(int(hex_digits, 16)))
                    self.pos += 6
                    continue
                if esc not in _ESCAPES:
                    raise self.error(f"invalid escape '\\{esc}'", self.pos)
                chars.append(_ESCAPES[esc])
                self.pos += 2
            else:
                chars.append(ch)
                self.pos += 1
        value = "".join(chars)
        lexeme = self.text[start:self.pos]
        if kind is TokenKind.CHAR:
            # Single-quoted text longer than one character is a string in
            # disguise (the worked examples quote strings either way).
            if len(value) != 1:
                kind = TokenKind.STRING
        return Token(kind, lexeme, self._span(start), value)

    def _triple_quoted(self, start: int, kind: TokenKind) -> Token:
        self.pos += 3
        chars: list[str] = []
        while True:
            if self.pos >= self.n:
                raise self.error("unterminated string literal", start)
            if self.text[self.pos:self.pos + 3] == '"""':
                self.pos += 3
                break
            ch = self.text[self.pos]
            if ch == "\\" and self._peek(1) in _ESCAPES:
                chars.append(_ESCAPES[self._peek(1)])
                self.pos += 2
            else:
                chars.append(ch)
                self.pos += 1
        return Token(kind, self.text[start:self.pos], self._span(start), "".join(chars))


def tokenize(text: str, source_name: str = "<input>") -> list[Token]:
    return Lexer(SourceText(source_name, text)).tokenize()
