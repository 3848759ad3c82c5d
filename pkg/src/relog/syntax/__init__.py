from relog.syntax.adt_text import TermNode, parse_adt_value, term_to_text
from relog.syntax.lexer import tokenize
from relog.syntax.loader import load_program
from relog.syntax.parser import parse_expression, parse_program
from relog.syntax.printer import print_program
from relog.syntax.source import Span

__all__ = [
    "TermNode", "parse_adt_value", "term_to_text", "tokenize",
    "load_program", "parse_expression", "parse_program", "print_program",
    "Span",
]
