import pytest

from relog.errors import LexError, ParseError
from relog.syntax import parse_program

from corpus import MUTANTS, SNIPPETS


@pytest.mark.parametrize("name", sorted(SNIPPETS))
def test_snippet_parses(name):
    program = parse_program(SNIPPETS[name], source_name=name)
    assert program.items


@pytest.mark.parametrize("name", sorted(MUTANTS))
def test_mutant_rejected_with_location(name):
    with pytest.raises((ParseError, LexError)) as exc:
        parse_program(MUTANTS[name], source_name=name)
    span = exc.value.span
    assert span is not None
    assert span.line >= 1 and span.col >= 1
