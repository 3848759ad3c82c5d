"""Program loading with `import` resolution.

Imports resolve relative to the importing file and splice the imported
items at the import site. A file is loaded at most once per program
(canonical-path bookkeeping doubles as cycle detection).
"""

from __future__ import annotations

import os

from relog.errors import ParseError
from relog.syntax import ast
from relog.syntax.parser import parse_program


def load_program(path: str) -> ast.SourceProgram:
    loaded: set[str] = set()
    items = _load_file(os.path.abspath(path), loaded)
    return ast.SourceProgram(items, path)


def _load_file(abs_path: str, loaded: set[str]) -> list[ast.Item]:
    canonical = os.path.realpath(abs_path)
    if canonical in loaded:
        return []
    loaded.add(canonical)
    try:
        with open(abs_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read '{abs_path}': {exc.strerror or exc}")
    program = parse_program(text, abs_path)
    items: list[ast.Item] = []
    base = os.path.dirname(abs_path)
    for item in program.items:
        if isinstance(item, ast.ImportDecl):
            target = os.path.join(base, item.path)
            items.extend(_load_file(target, loaded))
        else:
            items.append(item)
    return items
