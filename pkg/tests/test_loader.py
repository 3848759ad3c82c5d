import pytest

from relog import api
from relog.errors import ParseError
from relog.syntax import ast, load_program


def test_import_splices_at_site(tmp_path):
    (tmp_path / "kb.scl").write_text("rel base = {(1,)}\n")
    main = tmp_path / "main.scl"
    main.write_text('rel top = {(0,)}\nimport "kb.scl"\nrel q(x) = base(x)\nquery q\n')
    program = load_program(str(main))
    names = [getattr(i, "name", getattr(i, "predicate", None)) for i in program.items]
    assert names[0] == "top" and names[1] == "base"


def test_import_resolves_relative_to_importer(tmp_path):
    nested = tmp_path / "sub"
    nested.mkdir()
    (nested / "inner.scl").write_text("rel found = {(1,)}\n")
    (tmp_path / "mid.scl").write_text('import "sub/inner.scl"\n')
    main = tmp_path / "main.scl"
    main.write_text('import "mid.scl"\nrel q(x) = found(x)\nquery q\n')
    compiled = api.compile_program(path=str(main))
    _, results = api.run_program(compiled, provenance="unit")
    assert results["q"] == [(None, (1,))]


def test_import_cycle_loads_each_file_once(tmp_path):
    (tmp_path / "a.scl").write_text('import "b.scl"\nrel fa = {(1,)}\n')
    (tmp_path / "b.scl").write_text('import "a.scl"\nrel fb = {(2,)}\n')
    program = load_program(str(tmp_path / "a.scl"))
    names = [i.name for i in program.items if isinstance(i, ast.FactSetDecl)]
    assert names == ["fb", "fa"]


def test_missing_import_is_parse_error(tmp_path):
    main = tmp_path / "main.scl"
    main.write_text('import "missing.scl"\n')
    with pytest.raises(ParseError):
        load_program(str(main))
