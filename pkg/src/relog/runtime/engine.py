"""Plan execution: stratified semi-naive fixpoint over tagged relations.

Rows flow through each rule's operator pipeline as (environment, tag)
pairs. Within a recursive stratum, one variant per recursive atom reads
the previous iteration's delta; rules that match or create ADT terms are
re-run in full each iteration since the term universe may grow. If terms
appear after a stratum that already consumed the term store, the whole
stratified run restarts with derived relations cleared (memo tables and
input variables persist, so replays are deterministic and foreign
predicates are still invoked at most once per bound tuple).
"""

from __future__ import annotations

import itertools
from typing import Optional

from relog.compiler.plan import (
    AggregateStep, BindStep, ForeignApplyStep, Plan, PlanStep, RelStep,
    RulePlan, SelectStep, SoftEqStep, StratumPlan, TermMatchStep,
)
from relog.errors import (
    AdtParseError,
    AggWorldCapExceededError,
    BridgeIoError,
    BridgeTimeoutError,
    FactTypeError,
    FixtureMissError,
    ForeignEvalError,
    InternalError,
    IterationCapExceededError,
    MalformedForeignOutput,
    UnknownRelationError,
)
from relog.provenance import ProvenanceContext, TopKProofsContext, UnitContext
from relog.runtime.database import Database, ExecutionConfig
from relog.runtime.exprs import ExprEvaluator
from relog.runtime.facts import decode_value, validate_value
from relog.runtime.values import Entity, Tensor, cosine_similarity
from relog.syntax import ast
from relog.syntax.adt_text import TermNode, parse_adt_value
from relog.typesys.typed import TypedProgram

Rows = list[tuple[dict, object]]


class Evaluator:
    def __init__(self, typed: TypedProgram, plan: Plan, registry,
                 ctx: ProvenanceContext, config: Optional[ExecutionConfig] = None):
        self.typed = typed
        self.plan = plan
        self.registry = registry
        self.ctx = ctx
        self.config = config or ExecutionConfig()
        self.db = Database(ctx)
        self.consts: dict[str, object] = {}
        self.exprs = ExprEvaluator(
            consts=self.consts,
            store=self.db.store,
            registry=typed.type_table.registry,
            ffi=registry,
            expr_type=typed.checker.expr_type,
        )
        self._edb_snapshot: Optional[dict] = None
        self._first_match_stratum: Optional[int] = None
        for i, stratum in enumerate(plan.strata):
            if any(_pipeline_has_termmatch(rule.steps) for rule in stratum.rules):
                self._first_match_stratum = i
                break
        self._derived = {h.relation for stratum in plan.strata
                         for rule in stratum.rules for h in rule.heads}
        self._prepare()

    # -- preparation ------------------------------------------------------

    def _prepare(self) -> None:
        for stratum in self.plan.strata:
            for rule in stratum.rules:
                self._prepare_steps(rule.steps, set())

    def _prepare_steps(self, steps: list[PlanStep], bound: set[str]) -> set[str]:
        for step in steps:
            if isinstance(step, RelStep):
                plan = []
                seen_here: set[str] = set()
                for arg in step.args:
                    if isinstance(arg, ast.Wildcard):
                        plan.append(("any", None))
                    elif isinstance(arg, ast.VarRef) and step.positive \
                            and arg.name not in bound \
                            and not self._is_const(arg.name):
                        # repeats within one atom also take the bind path;
                        # the per-tuple consistency check joins them
                        plan.append(("bind", arg.name))
                        seen_here.add(arg.name)
                    elif isinstance(arg, ast.VarRef) and arg.name in bound:
                        plan.append(("check_var", arg.name))
                    else:
                        plan.append(("expr", arg))
                step.argplan = plan
                if step.positive:
                    bound |= seen_here
            elif isinstance(step, BindStep):
                bound.add(step.var)
            elif isinstance(step, TermMatchStep):
                step.scrutinee_bound = step.var in bound
                bound.add(step.var)
                bound |= _pattern_var_names(step.pattern)
            elif isinstance(step, ForeignApplyStep):
                fp = self.registry.lookup_predicate(step.relation)
                if fp is None:
                    raise InternalError(
                        f"no evaluator for foreign predicate '{step.relation}'")
                step.fp = fp
                free_plan = []
                for pos in fp.free_positions():
                    arg = step.args[pos]
                    if isinstance(arg, ast.Wildcard):
                        free_plan.append(("any", None))
                    elif isinstance(arg, ast.VarRef) and arg.name not in bound \
                            and not self._is_const(arg.name):
                        free_plan.append(("bind", arg.name))
                        bound.add(arg.name)
                    else:
                        free_plan.append(("expr", arg))
                step.free_plan = free_plan
            elif isinstance(step, AggregateStep):
                exported = set(step.result_vars)
                for d in (step.where or []):
                    exported |= self._prepare_steps(d, set())
                for d in step.inner:
                    self._prepare_steps(d, set())
                step.exported = sorted(exported)
                bound |= exported
        return bound

    def _is_const(self, name: str) -> bool:
        return name in self.typed.consts

    # -- fact loading ------------------------------------------------------------

    def load_program_facts(self) -> None:
        for name, (ty, expr) in self.typed.consts.items():
            self.consts[name] = self.exprs.eval(expr, {})
        for fs in self.typed.fact_sets:
            sig = self.typed.relations[fs.relation]
            for fact in fs.facts:
                values = tuple(self.exprs.eval(v, {}) for v in fact.values)
                for v, ty in zip(values, sig.arg_types):
                    validate_value(v, ty, self.typed.registry)
                self._check_fact_prob(fs.relation, fact.prob, fact.span)
                tag = self.ctx.from_prob(fact.prob)
                self.db.insert(fs.relation, values, tag)

    def load_external_facts(self, rows) -> None:
        """rows: iterable of (relation, prob | None, value tuple)."""
        for name, prob, values in rows:
            sig = self.typed.relations[name]
            for v, ty in zip(values, sig.arg_types):
                validate_value(v, ty, self.typed.registry)
            self._check_fact_prob(name, prob)
            self.db.insert(name, values, self.ctx.from_prob(prob))

    @staticmethod
    def _check_fact_prob(relation: str, prob, span=None) -> None:
        if prob is not None and not (0.0 <= prob <= 1.0):
            raise FactTypeError(
                f"fact probability {prob} for '{relation}' outside [0, 1]", span)

    # -- top-level evaluation ---------------------------------------------------

    def evaluate(self, semi_naive: bool = True) -> Database:
        self._edb_snapshot = {name: dict(rel) for name, rel in self.db.relations.items()}
        passes = 0
        while True:
            passes += 1
            if passes > self.config.iteration_cap:
                raise IterationCapExceededError(
                    f"term-universe restarts exceeded cap {self.config.iteration_cap}")
            store_size: Optional[int] = None
            for i, stratum in enumerate(self.plan.strata):
                if i == self._first_match_stratum:
                    store_size = len(self.db.store)
                self._eval_stratum(stratum, semi_naive)
            if store_size is None or len(self.db.store) == store_size:
                return self.db
            # terms appeared after matching began: replay with the larger universe
            self.db.relations = {name: dict(rel)
                                 for name, rel in self._edb_snapshot.items()}

    def _eval_stratum(self, stratum: StratumPlan, semi_naive: bool) -> None:
        if not stratum.recursive:
            produced: dict = {}
            for rule in stratum.rules:
                self._eval_rule(rule, None, None, produced)
            for (rel, tup), tag in produced.items():
                self.db.insert(rel, tup, tag)
            return

        delta = {rel: dict(self.db.relation(rel)) for rel in stratum.relations}
        iteration = 0
        while True:
            iteration += 1
            if iteration > self.config.iteration_cap:
                raise IterationCapExceededError(
                    f"stratum {stratum.index} exceeded iteration cap "
                    f"{self.config.iteration_cap}")
            produced: dict = {}
            for rule in stratum.rules:
                recursive_positions = rule.recursive_positions
                if not semi_naive:
                    self._eval_rule(rule, None, None, produced)
                    continue
                if rule.volatile or not recursive_positions:
                    if iteration == 1 or rule.volatile:
                        self._eval_rule(rule, None, None, produced)
                if recursive_positions and not rule.volatile:
                    for pos in recursive_positions:
                        self._eval_rule(rule, pos, delta, produced)
            new_delta: dict[str, dict] = {}
            for (rel, tup), tag in produced.items():
                if self.db.insert(rel, tup, tag):
                    new_delta.setdefault(rel, {})[tup] = self.db.relation(rel)[tup]
            if not new_delta:
                return
            delta = {rel: new_delta.get(rel, {}) for rel in stratum.relations}

    # -- rule evaluation -------------------------------------------------------

    def _eval_rule(self, rule: RulePlan, delta_pos: Optional[int],
                   delta: Optional[dict], produced: dict) -> None:
        rows: Rows = [({}, self.ctx.one())]
        rows = self._run_steps(rule.steps, rows, delta_pos, delta)
        if not rows:
            return
        if rule.disjunctive:
            self._emit_disjunctive(rule, rows, produced)
        else:
            for env, tag in rows:
                for head in rule.heads:
                    values = tuple(self.exprs.eval(e, env) for e in head.exprs)
                    self._validate_emit(head.relation, values)
                    self._accumulate(produced, head.relation, values, tag)

    def _emit_disjunctive(self, rule: RulePlan, rows: Rows, produced: dict) -> None:
        probs = [h.prob for h in rule.heads]
        ctx = self.ctx
        for env, tag in rows:
            if isinstance(ctx, TopKProofsContext):
                key = (rule.rule_id,
                       tuple((v, env[v]) for v in sorted(env)))
                vars_ = self.db.disj_groups.get(key)
                if vars_ is None:
                    vars_ = ctx.var_table.add_categorical(probs)
                    self.db.disj_groups[key] = vars_
                head_tags = [ctx.tag_and(tag, ctx.from_var(v)) for v in vars_]
            elif isinstance(ctx, UnitContext):
                head_tags = [tag for _ in probs]
            else:  # min-max-prob
                head_tags = [ctx.tag_and(tag, p) for p in probs]
            for head, head_tag in zip(rule.heads, head_tags):
                if ctx.is_zero(head_tag):
                    continue
                values = tuple(self.exprs.eval(e, env) for e in head.exprs)
                self._validate_emit(head.relation, values)
                self._accumulate(produced, head.relation, values, head_tag)

    def _validate_emit(self, relation: str, values: tuple) -> None:
        sig = self.typed.relations.get(relation)
        if sig is None:
            return
        for v, ty in zip(values, sig.arg_types):
            validate_value(v, ty, self.typed.registry)

    def _accumulate(self, produced: dict, rel: str, values: tuple, tag) -> None:
        key = (rel, values)
        old = produced.get(key)
        produced[key] = tag if old is None else self.ctx.tag_or(old, tag)

    # -- pipeline ----------------------------------------------------------------

    def _run_steps(self, steps: list[PlanStep], rows: Rows,
                   delta_pos: Optional[int], delta: Optional[dict]) -> Rows:
        for idx, step in enumerate(steps):
            if not rows:
                return []
            if isinstance(step, RelStep):
                use_delta = delta_pos == idx
                source = (delta or {}).get(step.relation, {}) if use_delta \
                    else self.db.relation(step.relation)
                if step.positive:
                    rows = self._apply_rel(rows, step, source)
                else:
                    rows = self._apply_antijoin(rows, step, source)
            elif isinstance(step, SelectStep):
                rows = [(env, tag) for env, tag in rows
                        if self.exprs.eval(step.expr, env) is True]
            elif isinstance(step, BindStep):
                out = []
                for env, tag in rows:
                    env = dict(env)
                    env[step.var] = self.exprs.eval(step.expr, env)
                    out.append((env, tag))
                rows = out
            elif isinstance(step, TermMatchStep):
                rows = self._apply_termmatch(rows, step)
            elif isinstance(step, SoftEqStep):
                rows = self._apply_softeq(rows, step)
            elif isinstance(step, ForeignApplyStep):
                rows = self._apply_foreign(rows, step)
            elif isinstance(step, AggregateStep):
                rows = self._apply_aggregate(rows, step)
            else:
                raise InternalError(f"unknown plan step {type(step).__name__}")
        return rows

    def _apply_rel(self, rows: Rows, step: RelStep, source: dict) -> Rows:
        plan = step.argplan
        check_positions = [i for i, (kind, _) in enumerate(plan) if kind != "any"
                           and kind != "bind"]
        index: dict[tuple, list] = {}
        for tup, tag in source.items():
            key = tuple(tup[i] for i in check_positions)
            index.setdefault(key, []).append((tup, tag))
        out: Rows = []
        ctx = self.ctx
        for env, tag in rows:
            key = []
            for i in check_positions:
                kind, payload = plan[i]
                if kind == "check_var":
                    key.append(env[payload])
                else:
                    key.append(self.exprs.eval(payload, env))
            for tup, tup_tag in index.get(tuple(key), ()):
                new_env = None
                consistent = True
                for i, (kind, payload) in enumerate(plan):
                    if kind == "bind":
                        if new_env is None:
                            new_env = dict(env)
                        if payload in new_env and new_env[payload] != tup[i]:
                            consistent = False
                            break
                        new_env[payload] = tup[i]
                if not consistent:
                    continue
                merged = ctx.tag_and(tag, tup_tag)
                if ctx.is_zero(merged):
                    continue
                out.append((new_env if new_env is not None else env, merged))
        return out

    def _apply_antijoin(self, rows: Rows, step: RelStep, source: dict) -> Rows:
        plan = step.argplan
        check_positions = [i for i, (kind, _) in enumerate(plan) if kind != "any"]
        projected = {tuple(tup[i] for i in check_positions) for tup in source}
        out: Rows = []
        for env, tag in rows:
            key = []
            for i in check_positions:
                kind, payload = plan[i]
                if kind == "check_var":
                    key.append(env[payload])
                elif kind == "bind":
                    key.append(env[payload])
                else:
                    key.append(self.exprs.eval(payload, env))
            if tuple(key) not in projected:
                out.append((env, tag))
        return out

    def _apply_termmatch(self, rows: Rows, step: TermMatchStep) -> Rows:
        out: Rows = []
        store = self.db.store
        if step.scrutinee_bound:
            for env, tag in rows:
                updates: dict = {}
                if self._match_pattern(env[step.var], step.pattern, env, updates):
                    new_env = dict(env)
                    new_env.update(updates)
                    out.append((new_env, tag))
            return out
        candidates = store.entities_with_constructor(step.pattern.constructor)
        for env, tag in rows:
            for entity in candidates:
                updates = {step.var: entity}
                if self._match_pattern(entity, step.pattern, env, updates):
                    new_env = dict(env)
                    new_env.update(updates)
                    out.append((new_env, tag))
        return out

    def _match_pattern(self, value, pattern: ast.EntityPattern, env: dict,
                       updates: dict) -> bool:
        if not isinstance(value, Entity):
            return False
        _, constructor, args = self.db.store.lookup(value)
        if constructor != pattern.constructor:
            return False
        for arg_value, sub in zip(args, pattern.args):
            if isinstance(sub, ast.Wildcard):
                continue
            if isinstance(sub, ast.VarRef):
                existing = updates.get(sub.name, env.get(sub.name))
                if existing is not None:
                    if existing != arg_value:
                        return False
                else:
                    updates[sub.name] = arg_value
            elif isinstance(sub, ast.Constant):
                if self.exprs.constant_value(sub) != arg_value:
                    return False
            elif isinstance(sub, ast.EntityPattern):
                if not self._match_pattern(arg_value, sub, env, updates):
                    return False
            else:
                return False
        return True

    def _apply_softeq(self, rows: Rows, step: SoftEqStep) -> Rows:
        out: Rows = []
        ctx = self.ctx
        for env, tag in rows:
            a, b = env[step.left], env[step.right]
            soft = self._softeq_tag(a, b)
            merged = ctx.tag_and(tag, soft)
            if not ctx.is_zero(merged):
                out.append((env, merged))
        return out

    def _softeq_tag(self, a: Tensor, b: Tensor):
        ctx = self.ctx
        if isinstance(ctx, UnitContext):
            # similarity is ignored under plain Datalog semantics
            cosine_similarity(a, b)  # still validate shapes
            return ctx.one()
        ka = (a.shape, a.to_bytes())
        kb = (b.shape, b.to_bytes())
        key = (ka, kb) if ka <= kb else (kb, ka)
        if isinstance(ctx, TopKProofsContext):
            vid = self.db.softeq_memo.get(key)
            if vid is None:
                sim = max(0.0, cosine_similarity(a, b))
                vid = ctx.var_table.add_var(sim)
                self.db.softeq_memo[key] = vid
            return ctx.from_var(vid)
        return max(0.0, cosine_similarity(a, b))

    # -- foreign predicates ----------------------------------------------------------

    def _apply_foreign(self, rows: Rows, step: ForeignApplyStep) -> Rows:
        fp = step.fp
        bound_positions = fp.bound_positions()
        bound_types = fp.bound_types()
        out: Rows = []
        ctx = self.ctx
        for env, tag in rows:
            bound_values = tuple(
                self.exprs.eval(step.args[pos], env) for pos in bound_positions)
            results = self.eval_foreign_predicate(fp, bound_values)
            for free_values, fact_tag in results:
                new_env = dict(env)
                consistent = True
                for (kind, payload), value in zip(step.free_plan, free_values):
                    if kind == "any":
                        continue
                    if kind == "bind":
                        if payload in new_env and new_env[payload] != value:
                            consistent = False
                            break
                        new_env[payload] = value
                    else:  # expr check
                        if self.exprs.eval(payload, env) != value:
                            consistent = False
                            break
                if not consistent:
                    continue
                merged = ctx.tag_and(tag, fact_tag)
                if not ctx.is_zero(merged):
                    out.append((new_env, merged))
        return out

    def eval_foreign_predicate(self, fp, bound_values: tuple):
        """Memoized invocation; returns [(free tuple, tag)] with tags allocated."""
        key = (fp.name, bound_values)
        if self.config.memoize and key in self.db.fp_memo:
            return self.db.fp_memo[key]
        self.registry.invocation_counts[fp.name] += 1
        try:
            raw = list(fp.evaluator(bound_values))
            results = self._coerce_fp_results(fp, raw)
        except BridgeTimeoutError as exc:
            results = self._foreign_failure(fp, ForeignEvalError(fp.name, exc.message))
        except BridgeIoError:
            raise
        except (ForeignEvalError, FixtureMissError) as exc:
            results = self._foreign_failure(
                fp, exc if isinstance(exc, ForeignEvalError)
                else ForeignEvalError(fp.name, exc.message))
        if self.config.memoize:
            self.db.fp_memo[key] = results
        return results

    def _foreign_failure(self, fp, error: ForeignEvalError):
        if self.config.foreign_error_policy == "abort":
            raise error
        return []

    def _coerce_fp_results(self, fp, raw):
        free_types = fp.free_types()
        ctx = self.ctx
        merged: dict[tuple, object] = {}
        order: list[tuple] = []
        for item in raw:
            try:
                prob, values = item
            except (TypeError, ValueError):
                raise MalformedForeignOutput(
                    fp.name, f"expected (prob, tuple) pairs, got {item!r}")
            if prob is not None:
                if not isinstance(prob, (int, float)):
                    raise MalformedForeignOutput(fp.name, f"bad probability {prob!r}")
                if prob < -1e-9 or prob > 1.0 + 1e-9:
                    raise MalformedForeignOutput(
                        fp.name, f"probability {prob} outside [0, 1]")
                prob = min(1.0, max(0.0, float(prob)))
            values = tuple(values) if isinstance(values, (list, tuple)) else (values,)
            if len(values) != len(free_types):
                raise MalformedForeignOutput(
                    fp.name, f"expected {len(free_types)} free values, got {len(values)}")
            coerced = tuple(self._coerce_value(fp, v, t) for v, t in zip(values, free_types))
            tag = ctx.from_prob(prob)
            if coerced in merged:
                merged[coerced] = ctx.tag_or(merged[coerced], tag)
            else:
                merged[coerced] = tag
                order.append(coerced)
        return [(values, merged[values]) for values in order]

    def _coerce_value(self, fp, value, type_name: str):
        registry = self.typed.registry
        store = self.db.store
        try:
            if registry.is_adt(type_name):
                if isinstance(value, Entity):
                    return value
                if isinstance(value, TermNode):
                    return store.intern_tree(value)
                if isinstance(value, str):
                    return store.intern_tree(parse_adt_value(value, type_name, registry))
                raise MalformedForeignOutput(
                    fp.name, f"expected a {type_name} term, got {value!r}")
            import datetime as _dt
            from relog.runtime.values import Duration, parse_datetime
            if type_name == "DateTime":
                return value if isinstance(value, _dt.datetime) else parse_datetime(value)
            if type_name == "Duration":
                return value if isinstance(value, Duration) else Duration.parse(value)
            if type_name == "Tensor":
                if isinstance(value, Tensor):
                    return value
                if isinstance(value, dict):
                    return Tensor(value["shape"], value["data"])
                raise MalformedForeignOutput(fp.name, "expected a tensor")
            return decode_value(value, type_name, registry, store)
        except MalformedForeignOutput:
            raise
        except AdtParseError as exc:
            raise MalformedForeignOutput(fp.name, f"unparseable term: {exc.message}")
        except Exception as exc:  # noqa: BLE001 - normalize evaluator mistakes
            raise MalformedForeignOutput(fp.name, str(exc))

    # -- aggregation -----------------------------------------------------------------

    def _apply_aggregate(self, rows: Rows, step: AggregateStep) -> Rows:
        ctx = self.ctx
        inner_rows: Rows = []
        for pipeline in step.inner:
            inner_rows.extend(self._run_steps(pipeline, [({}, ctx.one())], None, None))
        if step.where is None:
            where_rows: Rows = [({}, ctx.one())]
        else:
            where_rows = []
            for pipeline in step.where:
                where_rows.extend(self._run_steps(pipeline, [({}, ctx.one())], None, None))
            where_rows = self._merge_rows(where_rows)

        members_by_key: dict[tuple, dict[tuple, object]] = {}
        for env, tag in inner_rows:
            key = tuple(env[v] for v in step.group_vars)
            binding = tuple(env[v] for v in step.binding_vars)
            group = members_by_key.setdefault(key, {})
            group[binding] = tag if binding not in group else ctx.tag_or(group[binding], tag)

        out: Rows = []
        for wenv, wtag in where_rows:
            key = tuple(wenv[v] for v in step.group_vars)
            members = members_by_key.get(key, {})
            for value, vtag in self._aggregate_outcomes(step, members):
                res_tag = ctx.tag_and(wtag, vtag)
                if ctx.is_zero(res_tag):
                    continue
                result_env = dict(wenv)
                result_env[step.result_vars[0]] = value
                for env, tag in rows:
                    merged_env = dict(env)
                    consistent = True
                    for k, v in result_env.items():
                        if k in merged_env and merged_env[k] != v:
                            consistent = False
                            break
                        merged_env[k] = v
                    if not consistent:
                        continue
                    merged = ctx.tag_and(tag, res_tag)
                    if not ctx.is_zero(merged):
                        out.append((merged_env, merged))
        return out

    def _merge_rows(self, rows: Rows) -> Rows:
        merged: dict[tuple, object] = {}
        envs: dict[tuple, dict] = {}
        ctx = self.ctx
        for env, tag in rows:
            key = tuple(sorted(env.items(), key=lambda kv: kv[0]))
            if key in merged:
                merged[key] = ctx.tag_or(merged[key], tag)
            else:
                merged[key] = tag
                envs[key] = env
        return [(envs[k], merged[k]) for k in merged]

    def _aggregate_outcomes(self, step: AggregateStep, members: dict[tuple, object]):
        ctx = self.ctx
        if isinstance(ctx, UnitContext):
            present = list(members.keys())
            return self._certain_outcomes(step, present, ctx.one())
        if isinstance(ctx, TopKProofsContext):
            return self._world_outcomes(step, members)
        # min-max-prob: possibilistic reading
        present = [b for b, t in members.items() if t > 0.0]
        if step.operator == "exists":
            outcomes = []
            if present:
                outcomes.append((True, max(members[b] for b in present)))
            else:
                outcomes.append((False, 1.0))
            return outcomes
        tag = min((members[b] for b in present), default=1.0)
        return self._certain_outcomes(step, present, tag)

    def _certain_outcomes(self, step, present: list[tuple], tag):
        op = step.operator
        if op == "count":
            return [(len(present), tag)]
        if op == "exists":
            return [(bool(present), tag)]
        values = [b[0] for b in present]
        if op == "sum":
            return [(sum(values) if values else 0, tag)]
        if not values:
            return []
        return [(min(values) if op == "min" else max(values), tag)]

    def _world_outcomes(self, step: AggregateStep, members: dict[tuple, object]):
        ctx: TopKProofsContext = self.ctx
        support: set[int] = set()
        for tag in members.values():
            support |= tag.support()
        if len(support) > self.config.agg_world_var_cap:
            raise AggWorldCapExceededError(len(support), self.config.agg_world_var_cap)
        outcomes: dict = {}
        order: list = []
        for assignment, weight, literals in _enumerate_worlds(support, ctx.var_table):
            present = [b for b, tag in members.items()
                       if _tag_true_under(tag, assignment)]
            for value, _ in self._certain_outcomes(step, present, True):
                world_tag = ctx.from_world(dict(literals))
                if value in outcomes:
                    outcomes[value] = ctx.tag_or(outcomes[value], world_tag)
                else:
                    outcomes[value] = world_tag
                    order.append(value)
        return [(value, outcomes[value]) for value in order]

    # -- results ----------------------------------------------------------------

    def run_query(self, name: str):
        if name not in self.typed.relations and name not in self.db.relations:
            raise UnknownRelationError(f"unknown relation '{name}'")
        rel = self.db.relations.get(name, {})
        rows = sorted(rel.items(), key=lambda kv: kv[0])
        out = []
        for values, tag in rows:
            prob = self.ctx.recover_probability(tag, self.config.wmc_var_cap)
            out.append((prob, values))
        return out


def _enumerate_worlds(support: set[int], table):
    """Yield (assignment, weight, literal tuple) over the support variables.

    Categorical groups branch jointly: each support member chosen, or none
    of them (covering non-support members and the leftover mass).
    """
    singles: list[int] = []
    groups: dict[int, list[int]] = {}
    for v in sorted(support):
        gid = table.group_of.get(v)
        if gid is None:
            singles.append(v)
        else:
            groups.setdefault(gid, []).append(v)
    dims = []
    for v in singles:
        p = table.probs[v]
        options = []
        if p > 0.0:
            options.append(({v: True}, p, ((v, True),)))
        if p < 1.0:
            options.append(({v: False}, 1.0 - p, ((v, False),)))
        dims.append(options)
    for gid in sorted(groups):
        members = groups[gid]
        options = []
        for m in members:
            pm = table.probs[m]
            if pm <= 0.0:
                continue
            assignment = {x: (x == m) for x in members}
            literals = tuple((x, x == m) for x in members)
            options.append((assignment, pm, literals))
        none_w = 1.0 - sum(table.probs[m] for m in members)
        if none_w > 1e-12:
            options.append(({x: False for x in members}, none_w,
                            tuple((x, False) for x in members)))
        dims.append(options)
    for combo in itertools.product(*dims):
        assignment: dict[int, bool] = {}
        weight = 1.0
        literals: list = []
        for a, w, l in combo:
            assignment.update(a)
            weight *= w
            literals.extend(l)
        if weight <= 0.0:
            continue
        yield assignment, weight, tuple(literals)


def _tag_true_under(tag, assignment: dict[int, bool]) -> bool:
    for proof in tag.proofs:
        if all(assignment.get(vid, False) == pos for vid, pos in proof):
            return True
    return False


def _pattern_var_names(p: ast.Pattern) -> set[str]:
    if isinstance(p, ast.VarRef):
        return {p.name}
    if isinstance(p, ast.EntityPattern):
        out: set[str] = set()
        for a in p.args:
            out |= _pattern_var_names(a)
        return out
    return set()


def _pipeline_has_termmatch(steps: list[PlanStep]) -> bool:
    for s in steps:
        if isinstance(s, TermMatchStep):
            return True
        if isinstance(s, AggregateStep):
            if any(_pipeline_has_termmatch(d) for d in s.inner):
                return True
            if s.where and any(_pipeline_has_termmatch(d) for d in s.where):
                return True
    return False
