import json
import os

import jsonschema
import pytest

from relog import api, errors
from relog.compiler.attributes import apply_attributes
from relog.compiler.desugar import desugar_disjunctive_heads, desugar_tensor_joins
from relog.compiler.plan import compile_to_plan
from relog.compiler.stratify import stratify
from relog.ffi.builtins import register_builtins
from relog.ffi.registry import PluginRegistry
from relog.syntax import ast, parse_program
from relog.typesys.check import check_program
from relog.typesys.typed import Soft

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), os.pardir,
                           "schemas", "plan.schema.json")


def checked(text, registry=None):
    if registry is None:
        registry = register_builtins(PluginRegistry())
    program = apply_attributes(parse_program(text), registry, ".")
    return check_program(program, registry), registry


class TestAttributes:
    def test_mock_classify_produces_foreign_relation(self, tmp_path):
        fixture = tmp_path / "f.json"
        fixture.write_text("[]")
        registry = register_builtins(PluginRegistry())
        text = (f'@mock_classify(labels=["cat", "dog"], fixture="{fixture}")\n'
                'type classify(bound img: Tensor, label: String)')
        program = apply_attributes(parse_program(text), registry, ".")
        decl = program.items[0]
        assert isinstance(decl, ast.PredicateTypeDecl) and decl.extern
        fp = registry.lookup_predicate("classify")
        assert fp is not None and fp.kind == "fixture"

    def test_sanity_check_rejects_string_first_arg(self, tmp_path):
        fixture = tmp_path / "f.json"
        fixture.write_text("[]")
        registry = register_builtins(PluginRegistry())
        text = (f'@mock_classify(labels=["cat"], fixture="{fixture}")\n'
                'type classify(bound img: String, label: String)')
        with pytest.raises(errors.AttributeRejectedDecl):
            apply_attributes(parse_program(text), registry, ".")

    def test_unknown_attribute(self):
        registry = register_builtins(PluginRegistry())
        with pytest.raises(errors.UnknownAttributeError) as exc:
            apply_attributes(parse_program(
                "@nonsense\ntype p(bound x: String, y: String)"), registry, ".")
        assert "nonsense" in exc.value.message

    def test_attribute_on_non_predicate_rejected(self):
        registry = register_builtins(PluginRegistry())
        with pytest.raises(errors.AttributeRejectedDecl):
            apply_attributes(parse_program("@arith_eval\nrel p = {(1,)}"),
                             registry, ".")

    def test_application_commutes_across_decls(self, tmp_path):
        fixture = tmp_path / "f.json"
        fixture.write_text("[]")
        a = (f'@mock_llm(fixture="{fixture}")\n'
             'type p(bound x: String, y: String)')
        b = (f'@mock_encode(fixture="{fixture}")\n'
             'type q(bound x: String, e: Tensor)')
        r1 = register_builtins(PluginRegistry())
        apply_attributes(parse_program(a + "\n" + b), r1, ".")
        r2 = register_builtins(PluginRegistry())
        apply_attributes(parse_program(b + "\n" + a), r2, ".")
        assert set(r1.predicates) == set(r2.predicates)
        for name in r1.predicates:
            assert r1.predicates[name].arg_types == r2.predicates[name].arg_types


class TestTensorDesugar:
    def _encoder_registry(self, tmp_path):
        fixture = tmp_path / "enc.json"
        fixture.write_text(json.dumps([
            {"input": ["a"], "outputs": [{"tuple": [{"shape": [1], "data": [1.0]}]}]},
        ]))
        return fixture

    def test_two_occurrences_become_soft_eq(self, tmp_path):
        fixture = self._encoder_registry(tmp_path)
        typed, _ = checked(f'''
            @mock_encode(fixture="{fixture}")
            type enc(bound input: String, embed: Tensor)
            rel sim() = enc("cat", e) and enc("neko", e)
        ''')
        typed = desugar_tensor_joins(typed)
        softs = [c for c in typed.rules[0].conjuncts if isinstance(c, Soft)]
        assert len(softs) == 1
        assert {softs[0].left, softs[0].right} == {"e__1", "e__2"}

    def test_three_occurrences_chain(self, tmp_path):
        fixture = self._encoder_registry(tmp_path)
        typed, _ = checked(f'''
            @mock_encode(fixture="{fixture}")
            type enc(bound input: String, embed: Tensor)
            rel sim() = enc("a", e) and enc("b", e) and enc("c", e)
        ''')
        typed = desugar_tensor_joins(typed)
        softs = [c for c in typed.rules[0].conjuncts if isinstance(c, Soft)]
        assert [(s.left, s.right) for s in softs] == \
            [("e__1", "e__2"), ("e__2", "e__3")]

    def test_single_occurrence_untouched(self, tmp_path):
        fixture = self._encoder_registry(tmp_path)
        typed, _ = checked(f'''
            @mock_encode(fixture="{fixture}")
            type enc(bound input: String, embed: Tensor)
            rel emb(e) = enc("cat", e)
        ''')
        typed = desugar_tensor_joins(typed)
        assert not any(isinstance(c, Soft) for c in typed.rules[0].conjuncts)

    def test_non_tensor_joins_untouched(self):
        typed, _ = checked("rel q = {(1, 2)}\nrel p(x) = q(x, y) and q(y, x)")
        typed = desugar_tensor_joins(typed)
        assert not any(isinstance(c, Soft) for c in typed.rules[0].conjuncts)


class TestDisjunctiveHeads:
    def test_untagged_multi_head_splits(self):
        typed, _ = checked("rel c = {(1,)}\nrel {a(); b()} = c(x)")
        typed = desugar_disjunctive_heads(typed)
        singles = [r for r in typed.rules if len(r.heads) == 1]
        assert len(singles) == 2
        assert {r.heads[0].relation for r in singles} == {"a", "b"}

    def test_probability_sum_exceeds_one(self):
        typed, _ = checked("rel c = {(1,)}\nrel {0.7::a(); 0.7::b()} = c(x)")
        with pytest.raises(errors.ProbSumExceedsOneError):
            desugar_disjunctive_heads(typed)

    def test_mixed_tagging_rejected(self):
        typed, _ = checked("rel c = {(1,)}\nrel {0.7::a(); b()} = c(x)")
        with pytest.raises(errors.ProbSumExceedsOneError):
            desugar_disjunctive_heads(typed)

    def test_tagged_rule_stays_single_unit(self):
        typed, _ = checked('rel c = {(1,)}\nrel {0.9::a(); 0.1::b()} = c(x)')
        typed = desugar_disjunctive_heads(typed)
        assert len(typed.rules) == 1
        assert [h.prob for h in typed.rules[0].heads] == [0.9, 0.1]


class TestStratify:
    def test_negation_forces_two_strata(self):
        typed, _ = checked("""
            rel q = {(1,)}
            rel r = {(2,)}
            rel p(x) = q(x) and not r(x)
        """)
        strata = stratify(typed)
        assert [s.relations for s in strata] == [["q", "r"], ["p"]]

    def test_self_negation_unstratifiable(self):
        typed, _ = checked("rel p(x) = p(x) and not p(x)")
        with pytest.raises(errors.UnstratifiableNegationError) as exc:
            stratify(typed)
        assert "p" in exc.value.cycle

    def test_recursive_stratum_flag(self):
        typed, _ = checked("""
            rel edge = {(0, 1)}
            rel path(x, y) = edge(x, y)
            rel path(x, z) = path(x, y) and edge(y, z)
        """)
        strata = stratify(typed)
        flags = {tuple(s.relations): s.recursive for s in strata}
        assert flags[("edge",)] is False
        assert flags[("path",)] is True

    def test_aggregation_stratifies_below(self):
        typed, _ = checked("""
            rel item = {(1,), (2,)}
            rel n(c) = c := count(x: item(x))
        """)
        strata = stratify(typed)
        assert [s.relations for s in strata] == [["item"], ["n"]]

    def test_strata_are_topological(self):
        typed, _ = checked("""
            rel a = {(1,)}
            rel b(x) = a(x)
            rel c(x) = b(x) and not a(x)
            rel d(x) = c(x) and b(x)
        """)
        strata = stratify(typed)
        level = {rel: s.index for s in strata for rel in s.relations}
        assert level["a"] < level["b"] < level["c"] < level["d"]

    def test_random_programs_stratify_topologically(self):
        # structural property: every body dependency of a rule sits at or
        # below the head's stratum; negated/aggregated ones strictly below
        from datalog_gen import generate_program, render_program
        from relog.syntax import parse_program
        from relog.typesys.check import check_program
        from relog.typesys.typed import Agg, Lit

        for seed in range(60):
            program = generate_program(seed + 1_000)
            if not program.rules:
                continue
            typed = check_program(parse_program(render_program(program)))
            strata = stratify(typed)
            level = {rel: s.index for s in strata for rel in s.relations}
            for stratum in strata:
                for rule in stratum.rules:
                    head_level = level[rule.heads[0].relation]
                    for c in rule.conjuncts:
                        if isinstance(c, Lit):
                            dep = level[c.atom.predicate]
                            assert dep <= head_level
                            if not c.positive:
                                assert dep < head_level
                        elif isinstance(c, Agg):
                            for d in c.inner + (c.where or []):
                                for cc in d:
                                    if isinstance(cc, Lit):
                                        assert level[cc.atom.predicate] < head_level

    def test_scene_rules_precede_single_recursive_eval_stratum(self, programs_dir):
        compiled = api.compile_program(
            path=os.path.join(programs_dir, "clevr", "clevr.scl"))
        strata = compiled.plan.strata
        recursive = [s for s in strata if s.recursive]
        assert len(recursive) == 1
        assert recursive[0].relations == ["eval_obj"]
        eval_idx = recursive[0].index
        scene_rels = {"obj", "shape", "color", "material", "size", "relate"}
        for s in strata:
            if scene_rels & set(s.relations):
                assert s.index < eval_idx
        # aggregates over eval_obj land strictly later
        for s in strata:
            if "eval_num" in s.relations or "eval_bool" in s.relations:
                assert s.index > eval_idx


class TestPlan:
    def test_plan_json_validates_against_schema(self, programs_dir):
        with open(SCHEMA_PATH) as fh:
            schema = json.load(fh)
        for program in ["clevr/clevr.scl", "date_reasoning/date_reasoning.scl",
                        "shuffled_objects/shuffled_objects.scl",
                        "soft_join/soft_join.scl", "math_steps/math_steps.scl"]:
            compiled = api.compile_program(path=os.path.join(programs_dir, program))
            doc = compiled.plan.to_json()
            jsonschema.validate(doc, schema)

    def test_closure_plan_shape(self):
        compiled = api.compile_program(text="""
            rel edge = {(0, 1)}
            rel path(x, y) = edge(x, y)
            rel path(x, z) = path(x, y) and edge(y, z)
        """)
        doc = compiled.plan.to_json()
        recursive = [s for s in doc["strata"] if s["recursive"]][0]
        assert {r["rel"] for r in recursive["rules"]} == {"path"}
        ops = {r["children"][0]["op"] for r in recursive["rules"]}
        assert "scan" in ops

    def test_count_rule_lowered_to_aggregate(self, programs_dir):
        compiled = api.compile_program(
            path=os.path.join(programs_dir, "clevr", "clevr.scl"))
        doc = json.dumps(compiled.plan.to_json())
        assert '"aggregate"' in doc and '"termmatch"' in doc \
            and '"foreign_apply"' in doc and '"softeq"' not in doc

    def test_foreign_apply_placed_after_binder(self, tmp_path):
        fixture = tmp_path / "f.json"
        fixture.write_text("[]")
        compiled = api.compile_program(text=f'''
            @mock_classify(labels=["cat"], fixture="{fixture}")
            type classify(bound img: Tensor, label: String)
            type image(id: i32, img: Tensor)
            rel out(i, l) = classify(m, l) and image(i, m)
        ''')
        rule = compiled.plan.strata[-1].rules[0]
        kinds = [type(s).__name__ for s in rule.steps]
        assert kinds == ["RelStep", "ForeignApplyStep"]
