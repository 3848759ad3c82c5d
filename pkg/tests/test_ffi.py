import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from relog import errors
from relog.ffi import arith
from relog.ffi.builtins import register_builtins
from relog.ffi.fixtures import FixtureTable, canonical_config, canonical_value_key
from relog.ffi.registry import PluginRegistry


@pytest.fixture
def registry():
    return register_builtins(PluginRegistry())


class NoAdts:
    def is_adt(self, name):
        return False


class TestForeignFunctions:
    def test_format_positional(self, registry):
        ff = registry.lookup_function("$format")
        assert ff.evaluator("the height of {{0}}", "K2") == "the height of K2"
        assert ff.evaluator("{{1}} then {{0}}", "a", "b") == "b then a"

    def test_string_builtins(self, registry):
        assert registry.lookup_function("$string_concat").evaluator("a", "b", "c") == "abc"
        assert registry.lookup_function("$string_lower").evaluator("MiXeD") == "mixed"
        assert registry.lookup_function("$abs").evaluator(-4) == 4

    def test_load_tensor(self, tmp_path):
        registry = register_builtins(PluginRegistry(), base_dir=str(tmp_path))
        (tmp_path / "t.json").write_text('{"shape": [2], "data": [1.0, 2.0]}')
        tensor = registry.lookup_function("$load_tensor").evaluator("t.json")
        assert tensor.shape == (2,) and tensor.data == (1.0, 2.0)

    def test_duplicate_registration(self, registry):
        from relog.ffi.descriptors import ForeignFunctionDescriptor
        with pytest.raises(errors.DuplicateRegistrationError):
            registry.register_function(ForeignFunctionDescriptor(
                "$abs", ["Num"], "=0", abs))

    @settings(max_examples=100, deadline=None)
    @given(st.text(max_size=10), st.text(max_size=10))
    def test_determinism(self, a, b):
        registry = register_builtins(PluginRegistry())
        concat = registry.lookup_function("$string_concat").evaluator
        lower = registry.lookup_function("$string_lower").evaluator
        assert concat(a, b) == concat(a, b)
        assert lower(a) == lower(a)


class TestArithEval:
    def test_table8_steps(self):
        v0 = arith.evaluate("1 / (18 / 3)", "")
        assert v0 == pytest.approx(1 / 6, abs=1e-9)
        v1 = arith.evaluate("{kangaroo_speed} / 2", f"kangaroo_speed={v0!r}")
        v2 = arith.evaluate("1 / {turtle_speed}", f"turtle_speed={v1!r}")
        v3 = arith.evaluate("{turtle_time} * 4", f"turtle_time={v2!r}")
        assert v3 == pytest.approx(48.0, abs=1e-9)

    def test_parentheses_and_unary_minus(self):
        assert arith.evaluate("-(2 + 3) * 4", "") == -20.0

    def test_division_by_zero(self):
        with pytest.raises(errors.ForeignEvalError):
            arith.evaluate("1 / 0", "")

    def test_unbound_variable(self):
        with pytest.raises(errors.ForeignEvalError):
            arith.evaluate("{missing} + 1", "")

    def test_no_general_code(self):
        with pytest.raises(errors.ForeignEvalError):
            arith.evaluate("__import__('os')", "")


class TestFixtures:
    def test_exact_lookup_and_miss(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps([
            {"input": ["hello"], "outputs": [{"prob": 0.5, "tuple": ["world"]}]},
        ]))
        table = FixtureTable(str(path), ["String"], NoAdts())
        rows = table.lookup(canonical_config({}), ("hello",), None)
        assert rows == [(0.5, ["world"])]
        with pytest.raises(errors.FixtureMissError):
            table.lookup(canonical_config({}), ("nope",), None)

    def test_config_mismatch_is_a_miss(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps([
            {"config": {"labels": ["a"]}, "input": ["x"],
             "outputs": [{"tuple": ["y"]}]},
        ]))
        table = FixtureTable(str(path), ["String"], NoAdts())
        ok_key = canonical_config({"labels": ["a"]})
        assert table.lookup(ok_key, ("x",), None)
        with pytest.raises(errors.FixtureMissError):
            table.lookup(canonical_config({"labels": ["b"]}), ("x",), None)

    def test_probability_sum_validated(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps([
            {"input": ["x"], "outputs": [{"prob": 0.8, "tuple": ["a"]},
                                         {"prob": 0.4, "tuple": ["b"]}]},
        ]))
        with pytest.raises(errors.FileFormatError):
            FixtureTable(str(path), ["String"], NoAdts())

    def test_tensor_keyed_by_content(self, tmp_path):
        key1 = canonical_value_key({"shape": [2], "data": [1.0, 0.0]},
                                   "Tensor", NoAdts())
        from relog.runtime.values import Tensor
        key2 = canonical_value_key(Tensor([2], [1.0, 0.0]), "Tensor", NoAdts())
        assert key1 == key2

    def test_config_canonicalization_sorts_keys(self):
        a = canonical_config({"b": 1, "a": [2, (3, 4)]})
        b = canonical_config({"a": [2, (3, 4)], "b": 1})
        assert a == b
