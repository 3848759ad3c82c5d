"""Type inference and checking.

Relation signatures may be declared (`type p(x: i32, ...)`) or inferred
from rule heads, facts, and body uses; inference runs a union-find over
type cells with class constraints (numeric literals default to i32,
floats to f32, string literals may coerce to DateTime/Duration when the
context demands it). Rule bodies are normalized to negation-pushed DNF
and each disjunct is ordered so that every foreign predicate's bound
arguments are available when it runs.
"""

from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass
from typing import Optional

from relog.errors import (
    RangeRestrictionError,
    TypeCheckError,
    UnboundForeignArgumentError,
    UnknownRelationError,
)
from relog.syntax import ast
from relog.typesys.typed import (
    Agg, Cond, Conjunct, Lit, Match, Soft,
    TypedFact, TypedFactSet, TypedHead, TypedProgram, TypedRule,
)
from relog.typesys.types import (
    FLOAT_TYPES, INT_TYPES, NUMERIC_TYPES,
    RelationSignature, TypeTable, is_numeric_type,
)

_STRINGISH = frozenset({"String", "DateTime", "Duration"})
_CHARISH = frozenset({"char", "String"})


@dataclass
class _Cell:
    parent: Optional["_Cell"] = None
    possible: Optional[frozenset[str]] = None
    default: Optional[str] = None
    resolved: Optional[str] = None

    def find(self) -> "_Cell":
        cell = self
        while cell.parent is not None:
            cell = cell.parent
        # path compression
        node = self
        while node.parent is not None:
            nxt = node.parent
            node.parent = cell
            node = nxt
        return cell


class _Inference:
    def __init__(self, table: TypeTable):
        self.table = table
        self.cells: dict[object, _Cell] = {}
        self.expr_cells: dict[int, _Cell] = {}
        self.arith: list[tuple[str, _Cell, _Cell, _Cell, object]] = []

    def cell(self, key: object) -> _Cell:
        if key not in self.cells:
            self.cells[key] = _Cell()
        return self.cells[key]

    def fresh(self) -> _Cell:
        return _Cell()

    def constrain(self, cell: _Cell, possible: frozenset[str], span=None,
                  default: Optional[str] = None) -> None:
        root = cell.find()
        if root.possible is None:
            root.possible = possible
        else:
            merged = root.possible & possible
            if not merged:
                raise TypeCheckError(
                    f"conflicting types: expected one of {sorted(possible)}, "
                    f"inferred {sorted(root.possible)}", span)
            root.possible = merged
        if default is not None and root.default is None:
            root.default = default

    def set_concrete(self, cell: _Cell, name: str, span=None) -> None:
        self.constrain(cell, frozenset({name}), span)

    def unify(self, a: _Cell, b: _Cell, span=None) -> None:
        ra, rb = a.find(), b.find()
        if ra is rb:
            return
        possible = None
        if ra.possible is None:
            possible = rb.possible
        elif rb.possible is None:
            possible = ra.possible
        else:
            possible = ra.possible & rb.possible
            if not possible:
                raise TypeCheckError(
                    f"type mismatch: {sorted(ra.possible)} vs {sorted(rb.possible)}", span)
        rb.parent = ra
        ra.possible = possible
        if ra.default is None:
            ra.default = rb.default

    def concrete_of(self, cell: _Cell) -> Optional[str]:
        root = cell.find()
        if root.possible is not None and len(root.possible) == 1:
            return next(iter(root.possible))
        return None

    def solve_arith(self) -> None:
        changed = True
        while changed:
            changed = False
            for op, l, r, res, span in self.arith:
                tl, tr, tres = self.concrete_of(l), self.concrete_of(r), self.concrete_of(res)
                if op in ("+", "-"):
                    if tl == "DateTime":
                        if op == "-" and tr == "DateTime":
                            if tres != "Duration":
                                self.set_concrete(res, "Duration", span)
                                changed = True
                            continue
                        if tr is None and op == "-":
                            # ambiguous: DateTime - (DateTime|Duration); decide
                            # by result when known, else leave for later rounds
                            if tres == "Duration":
                                self.set_concrete(r, "DateTime", span)
                                changed = True
                                continue
                            if tres == "DateTime":
                                self.set_concrete(r, "Duration", span)
                                changed = True
                                continue
                            continue
                        if tr != "Duration":
                            self.set_concrete(r, "Duration", span)
                            changed = True
                        if tres != "DateTime":
                            self.set_concrete(res, "DateTime", span)
                            changed = True
                        continue
                    if tl == "Duration" or tr == "Duration" and tl is None:
                        if tl == "Duration" and op == "+" and tr == "DateTime":
                            if tres != "DateTime":
                                self.set_concrete(res, "DateTime", span)
                                changed = True
                            continue
                        if tl == "Duration":
                            if tr != "Duration":
                                self.set_concrete(r, "Duration", span)
                                changed = True
                            if tres != "Duration":
                                self.set_concrete(res, "Duration", span)
                                changed = True
                            continue
                if op in ("*", "/", "%") or (tl is not None and is_numeric_type(tl)):
                    self.constrain(l, NUMERIC_TYPES, span)
                    self.constrain(r, NUMERIC_TYPES, span)
                    self.constrain(res, NUMERIC_TYPES, span)
                    before = (l.find(), r.find(), res.find())
                    self.unify(l, r, span)
                    self.unify(l, res, span)
                    after = (l.find(), r.find(), res.find())
                    if before != after:
                        changed = True
        # any +/- constraint still fully unknown defaults to numeric
        for op, l, r, res, span in self.arith:
            if self.concrete_of(l) is None and self.concrete_of(r) is None:
                self.constrain(l, NUMERIC_TYPES, span, default="i32")
                self.unify(l, r, span)
                self.unify(l, res, span)

    def resolve(self, cell: _Cell, what: str, span=None) -> str:
        root = cell.find()
        if root.resolved is not None:
            return root.resolved
        if root.possible is None:
            # nothing constrains this position (e.g. a vacuous recursive
            # relation); fall back to the numeric default
            root.resolved = root.default or "i32"
            return root.resolved
        if len(root.possible) == 1:
            root.resolved = next(iter(root.possible))
        elif root.default is not None and root.default in root.possible:
            root.resolved = root.default
        elif root.possible == NUMERIC_TYPES or root.possible == frozenset(INT_TYPES):
            root.resolved = "i32"
        elif root.possible == frozenset(FLOAT_TYPES):
            root.resolved = "f32"
        elif root.possible == _STRINGISH:
            root.resolved = "String"
        elif root.possible == _CHARISH:
            root.resolved = "char"
        else:
            raise TypeCheckError(
                f"ambiguous type of {what}: one of {sorted(root.possible)}", span)
        return root.resolved


class Checker:
    def __init__(self, program: ast.SourceProgram, ffi_registry=None):
        self.program = program
        self.ffi = ffi_registry
        self.table = TypeTable()
        self.relations: dict[str, RelationSignature] = {}
        self.defined: set[str] = set()     # relations with a definition
        self.rel_arity: dict[str, int] = {}
        self.rel_cells: dict[str, list[_Cell]] = {}
        self.const_decls: dict[str, ast.ConstDecl] = {}
        self.const_cells: dict[str, _Cell] = {}
        self.queries: list[str] = []
        self.infer = _Inference(self.table)

    # -- public entry ------------------------------------------------------

    def run(self) -> TypedProgram:
        self._collect_types()
        self.infer = _Inference(self.table)
        self._collect_relation_decls()
        rules, fact_sets = self._collect_rules_and_facts()

        normalized: list[tuple[ast.RuleDecl, list[TypedHead], list[list[Conjunct]]]] = []
        for decl in rules:
            heads = [TypedHead(h.atom.predicate, h.atom.args, h.prob) for h in decl.heads]
            disjuncts = self._normalize(decl.body, positive=True)
            if len(disjuncts) > 1:
                # DNF expansion shares subtrees between disjuncts; each
                # disjunct needs its own nodes so per-disjunct expression
                # types don't clash
                disjuncts = [copy.deepcopy(d) for d in disjuncts]
            normalized.append((decl, heads, disjuncts))

        self._check_definitions(normalized, fact_sets)

        # type constraints
        for name, decl in self.const_decls.items():
            cell = self.infer.cell(("const", name))
            self.const_cells[name] = cell
            scope = _Scope(self, rule_key=("const", name), local_binds=set())
            self.infer.unify(cell, self._infer_expr(decl.value, scope), decl.span)

        typed_facts: list[TypedFactSet] = []
        for fs in fact_sets:
            if not fs.facts and fs.name not in self.rel_cells:
                raise TypeCheckError(
                    f"empty fact set for undeclared relation '{fs.name}'", fs.span)
            arity = len(fs.facts[0].values) if fs.facts else len(self.rel_cells[fs.name])
            cells = self._ensure_relation_cells(fs.name, arity, fs.span)
            facts = []
            for fact in fs.facts:
                if len(fact.values) != len(cells):
                    raise TypeCheckError(
                        f"fact arity {len(fact.values)} does not match relation "
                        f"'{fs.name}' arity {len(cells)}", fact.span)
                scope = _Scope(self, rule_key=("facts", fs.name), local_binds=set(),
                               allow_vars=False)
                for value, cell in zip(fact.values, cells):
                    self.infer.unify(cell, self._infer_expr(value, scope), fact.span)
                facts.append(TypedFact(fact.prob, fact.values, fact.span))
            typed_facts.append(TypedFactSet(fs.name, facts, fs.span))

        scopes: list[list[_Scope]] = []
        for rule_idx, (decl, heads, disjuncts) in enumerate(normalized):
            per_disjunct = []
            for di, conjuncts in enumerate(disjuncts):
                scope = _Scope(self, rule_key=("rule", rule_idx, di),
                               local_binds=self._binding_names(conjuncts))
                self._constrain_conjuncts(conjuncts, scope)
                for head in heads:
                    cells = self._ensure_relation_cells(
                        head.relation, len(head.args), decl.span)
                    if len(head.args) != len(cells):
                        raise TypeCheckError(
                            f"head arity {len(head.args)} does not match relation "
                            f"'{head.relation}' arity {len(cells)}", decl.span)
                    for arg, cell in zip(head.args, cells):
                        self.infer.unify(cell, self._infer_expr(arg, scope), decl.span)
                per_disjunct.append(scope)
            scopes.append(per_disjunct)

        self.infer.solve_arith()

        # Order bodies first: safety violations (range restriction, unbound
        # foreign arguments) take precedence over inference failures.
        ordered_bodies: list[list[list[Conjunct]]] = []
        for rule_idx, (decl, heads, disjuncts) in enumerate(normalized):
            per_disjunct = []
            for di, conjuncts in enumerate(disjuncts):
                locals_ = scopes[rule_idx][di].local_binds
                per_disjunct.append(self._order_conjuncts(conjuncts, heads, locals_, decl))
            ordered_bodies.append(per_disjunct)

        # resolve signatures, then per-rule var types
        for name, cells in sorted(self.rel_cells.items()):
            sig = self.relations.get(name)
            types = [self.infer.resolve(c, f"argument {i} of relation '{name}'",
                                        sig.span if sig else None)
                     for i, c in enumerate(cells)]
            if sig is None:
                self.relations[name] = RelationSignature(
                    name, [None] * len(cells), types,
                    [ast.Adornment.FREE] * len(cells))
            else:
                sig.arg_types = types

        consts: dict[str, tuple[str, ast.Expr]] = {}
        for name, decl in self.const_decls.items():
            ty = self.infer.resolve(self.const_cells[name], f"const '{name}'", decl.span)
            consts[name] = (ty, decl.value)

        typed_rules: list[TypedRule] = []
        rule_id = itertools.count()
        for rule_idx, (decl, heads, disjuncts) in enumerate(normalized):
            for di, conjuncts in enumerate(disjuncts):
                scope = scopes[rule_idx][di]
                var_types = {
                    v: self.infer.resolve(c, f"variable '{v}'", decl.span)
                    for v, c in sorted(scope.vars.items())
                }
                typed_rules.append(TypedRule(
                    heads=[TypedHead(h.relation, h.args, h.prob) for h in heads],
                    conjuncts=ordered_bodies[rule_idx][di],
                    var_types=var_types,
                    span=decl.span,
                    rule_id=next(rule_id),
                    source_order=rule_idx,
                ))

        self._annotate_expr_types()

        return TypedProgram(
            type_table=self.table,
            relations=self.relations,
            rules=typed_rules,
            fact_sets=typed_facts,
            queries=self.queries,
            consts=consts,
        )

    # -- collection ---------------------------------------------------------

    def _collect_types(self) -> None:
        registry = self.table.registry
        for item in self.program.items:
            if isinstance(item, ast.AdtDecl):
                registry.register(item.name, [(c, [t.name for t in args])
                                              for c, args in item.constructors], item.span)
        # canonicalize constructor arg types after all ADTs are known
        for item in self.program.items:
            if isinstance(item, ast.AliasDecl):
                self.table.define_alias(item.name, item.target.name, item.span)
            elif isinstance(item, ast.SubTypeDecl):
                self.table.define_alias(item.name, item.parent.name, item.span)
        for item in self.program.items:
            if isinstance(item, ast.AdtDecl):
                for cname, args in registry.constructors_of(item.name):
                    for ty in args:
                        self.table.canonical(ty, item.span)

    def _collect_relation_decls(self) -> None:
        for item in self.program.items:
            if not isinstance(item, ast.PredicateTypeDecl):
                continue
            if item.name in self.relations:
                raise TypeCheckError(f"relation '{item.name}' declared twice", item.span)
            adorns = []
            for a in item.args:
                if a.adornment is ast.Adornment.UNSPECIFIED:
                    adorns.append(ast.Adornment.FREE)
                else:
                    adorns.append(a.adornment)
            types = [self.table.canonical_expr(a.ty) for a in item.args]
            kind = "foreign" if item.extern else "stored"
            if kind == "stored" and any(a is ast.Adornment.BOUND for a in adorns):
                raise TypeCheckError(
                    f"relation '{item.name}' has bound arguments but no foreign "
                    "evaluator (did you forget an attribute?)", item.span)
            if kind == "foreign":
                fp = self.ffi.lookup_predicate(item.name) if self.ffi else None
                if fp is None:
                    raise UnknownRelationError(
                        f"extern relation '{item.name}' has no registered evaluator",
                        item.span)
            sig = RelationSignature(item.name, [a.name for a in item.args], types,
                                    adorns, kind, declared=True, span=item.span)
            self.relations[item.name] = sig
            self.rel_arity[item.name] = len(types)
            cells = [self.infer.fresh() for _ in types]
            for cell, ty in zip(cells, types):
                self.infer.set_concrete(cell, ty, item.span)
            self.rel_cells[item.name] = cells
            self.defined.add(item.name)

    def _collect_rules_and_facts(self):
        rules: list[ast.RuleDecl] = []
        fact_sets: list[ast.FactSetDecl] = []
        for item in self.program.items:
            if isinstance(item, ast.RuleDecl):
                rules.append(item)
            elif isinstance(item, ast.FactSetDecl):
                fact_sets.append(item)
            elif isinstance(item, ast.ConstDecl):
                if item.name in self.const_decls:
                    raise TypeCheckError(f"const '{item.name}' declared twice", item.span)
                self.const_decls[item.name] = item
            elif isinstance(item, ast.QueryDecl):
                self.queries.append(item.predicate)
        return rules, fact_sets

    def _check_definitions(self, normalized, fact_sets) -> None:
        for fs in fact_sets:
            self.defined.add(fs.name)
        for _, heads, _ in normalized:
            for head in heads:
                self.defined.add(head.relation)
        for _, _, disjuncts in normalized:
            for conjuncts in disjuncts:
                self._check_body_relations(conjuncts)
        for q in self.queries:
            if q not in self.defined:
                raise UnknownRelationError(f"query references unknown relation '{q}'")

    def _check_body_relations(self, conjuncts: list[Conjunct]) -> None:
        for c in conjuncts:
            if isinstance(c, Lit):
                name = c.atom.predicate
                if name not in self.defined and not self._adopt_registry_fp(name):
                    raise UnknownRelationError(
                        f"unknown relation '{name}'", c.atom.span)
            elif isinstance(c, Agg):
                for d in c.inner:
                    self._check_body_relations(d)
                for d in (c.where or []):
                    self._check_body_relations(d)

    def _adopt_registry_fp(self, name: str) -> bool:
        """Registered foreign predicates are usable without an extern decl."""
        if name in self.relations:
            return False
        fp = self.ffi.lookup_predicate(name) if self.ffi else None
        if fp is None:
            return False
        types = [self.table.canonical(t) for t in fp.arg_types]
        sig = RelationSignature(name, list(fp.arg_names), types,
                                list(fp.adornments), "foreign", declared=True)
        self.relations[name] = sig
        cells = [self.infer.fresh() for _ in types]
        for cell, ty in zip(cells, types):
            self.infer.set_concrete(cell, ty)
        self.rel_cells[name] = cells
        self.defined.add(name)
        return True

    def _ensure_relation_cells(self, name: str, arity: int, span) -> list[_Cell]:
        if name in self.rel_cells:
            cells = self.rel_cells[name]
            if len(cells) != arity:
                raise TypeCheckError(
                    f"relation '{name}' used with arity {arity}, "
                    f"previously {len(cells)}", span)
            return cells
        self.rel_cells[name] = [self.infer.fresh() for _ in range(arity)]
        return self.rel_cells[name]

    # -- DNF normalization ---------------------------------------------------

    def _normalize(self, f: ast.Formula, positive: bool) -> list[list[Conjunct]]:
        if isinstance(f, ast.Atom):
            return [[Lit(f, positive)]]
        if isinstance(f, ast.And):
            if positive:
                return self._cross([self._normalize(p, True) for p in f.parts])
            disjuncts = []
            for p in f.parts:
                disjuncts.extend(self._normalize(p, False))
            return disjuncts
        if isinstance(f, ast.Or):
            if positive:
                disjuncts = []
                for p in f.parts:
                    disjuncts.extend(self._normalize(p, True))
                return disjuncts
            return self._cross([self._normalize(p, False) for p in f.parts])
        if isinstance(f, ast.Not):
            return self._normalize(f.operand, not positive)
        if isinstance(f, ast.Constraint):
            if positive:
                return [[Cond(f.expr)]]
            return [[Cond(ast.Unary("!", f.expr, f.span))]]
        if isinstance(f, ast.CaseIs):
            if not positive:
                raise TypeCheckError("negation over 'case ... is' is not supported", f.span)
            return [[Match(f.var, f.pattern)]]
        if isinstance(f, ast.SoftEq):
            if not positive:
                raise TypeCheckError("negation over '~=' is not supported", f.span)
            return [[Soft(f.left, f.right)]]
        if isinstance(f, ast.Aggregate):
            if not positive:
                raise TypeCheckError("negation over an aggregate is not supported", f.span)
            inner = self._normalize(f.inner, True)
            where = self._normalize(f.where, True) if f.where is not None else None
            inner_vars = set()
            for d in inner:
                inner_vars |= _conjunct_vars(d)
            where_vars: set[str] = set()
            if where is not None:
                for d in where:
                    where_vars |= _conjunct_vars(d)
            group_vars = sorted((inner_vars & where_vars) | set(f.where_vars) & inner_vars)
            exported = sorted(set(f.result_vars) | where_vars)
            return [[Agg(f.operator, f.result_vars, f.binding_vars, inner, where,
                         group_vars, exported, f.span)]]
        raise TypeCheckError(f"unsupported formula {type(f).__name__}", getattr(f, "span", None))

    @staticmethod
    def _cross(parts: list[list[list[Conjunct]]]) -> list[list[Conjunct]]:
        result = [[]]
        for disjuncts in parts:
            result = [r + d for r in result for d in disjuncts]
        return result

    # -- constraints -----------------------------------------------------------

    def _binding_names(self, conjuncts: list[Conjunct]) -> set[str]:
        names: set[str] = set()
        for c in conjuncts:
            if isinstance(c, Lit) and c.positive:
                for arg in c.atom.args:
                    if isinstance(arg, ast.VarRef):
                        names.add(arg.name)
            elif isinstance(c, Match):
                names.add(c.var)
                names |= _pattern_vars(c.pattern)
            elif isinstance(c, Agg):
                names |= set(c.result_vars)
                names |= set(c.exported_vars)
            elif isinstance(c, Cond):
                e = c.expr
                if isinstance(e, ast.Binary) and e.op == "==":
                    if isinstance(e.left, ast.VarRef):
                        names.add(e.left.name)
                    if isinstance(e.right, ast.VarRef):
                        names.add(e.right.name)
        return names

    def _constrain_conjuncts(self, conjuncts: list[Conjunct], scope: "_Scope") -> None:
        for c in conjuncts:
            if isinstance(c, Lit):
                cells = self._ensure_relation_cells(
                    c.atom.predicate, len(c.atom.args), c.atom.span)
                sig = self.relations.get(c.atom.predicate)
                if sig is not None and len(sig.arg_types) != len(c.atom.args):
                    raise TypeCheckError(
                        f"atom '{c.atom.predicate}' has arity {len(c.atom.args)}, "
                        f"declared {len(sig.arg_types)}", c.atom.span)
                for arg, cell in zip(c.atom.args, cells):
                    if isinstance(arg, ast.Wildcard):
                        continue  # matches anything, constrains nothing
                    self.infer.unify(cell, self._infer_expr(arg, scope), c.atom.span)
            elif isinstance(c, Cond):
                cell = self._infer_expr(c.expr, scope)
                self.infer.set_concrete(cell, "bool", getattr(c.expr, "span", None))
            elif isinstance(c, Match):
                self._constrain_pattern_root(c, scope)
            elif isinstance(c, Soft):
                self.infer.set_concrete(scope.var(c.left), "Tensor")
                self.infer.set_concrete(scope.var(c.right), "Tensor")
            elif isinstance(c, Agg):
                for d in c.inner:
                    self._constrain_conjuncts(d, scope)
                for d in (c.where or []):
                    self._constrain_conjuncts(d, scope)
                for rv in c.result_vars:
                    cell = scope.var(rv)
                    if c.operator == "count":
                        self.infer.set_concrete(cell, "usize", c.span)
                    elif c.operator == "exists":
                        self.infer.set_concrete(cell, "bool", c.span)
                    else:  # min/max/sum follow the binding variable
                        if len(c.binding_vars) != 1 or len(c.result_vars) != 1:
                            raise TypeCheckError(
                                f"aggregator '{c.operator}' takes exactly one "
                                "binding and one result variable", c.span)
                        self.infer.unify(cell, scope.var(c.binding_vars[0]), c.span)

    def _constrain_pattern_root(self, match: Match, scope: "_Scope") -> None:
        registry = self.table.registry
        owner = registry.owner_of(match.pattern.constructor, match.pattern.span)
        self.infer.set_concrete(scope.var(match.var), owner, match.pattern.span)
        self._constrain_pattern(match.pattern, owner, scope)

    def _constrain_pattern(self, pattern: ast.EntityPattern, expected_adt: str,
                           scope: "_Scope") -> None:
        registry = self.table.registry
        owner = registry.owner_of(pattern.constructor, pattern.span)
        if owner != expected_adt:
            raise TypeCheckError(
                f"constructor '{pattern.constructor}' belongs to '{owner}', "
                f"expected '{expected_adt}'", pattern.span)
        arg_types = registry.constructor_args(pattern.constructor, pattern.span)
        if len(pattern.args) != len(arg_types):
            raise TypeCheckError(
                f"constructor '{pattern.constructor}' expects {len(arg_types)} "
                f"arguments, pattern has {len(pattern.args)}", pattern.span)
        for sub, ty_name in zip(pattern.args, arg_types):
            ty = self.table.canonical(ty_name, pattern.span)
            if isinstance(sub, ast.EntityPattern):
                if not registry.is_adt(ty):
                    raise TypeCheckError(
                        f"nested pattern where primitive '{ty}' expected", sub.span)
                self._constrain_pattern(sub, ty, scope)
            elif isinstance(sub, ast.VarRef):
                self.infer.set_concrete(scope.var(sub.name), ty, sub.span)
            elif isinstance(sub, ast.Wildcard):
                pass
            elif isinstance(sub, ast.Constant):
                cell = self._infer_expr(sub, scope)
                self.infer.set_concrete(cell, ty, sub.span)
            else:
                raise TypeCheckError("invalid pattern argument", getattr(sub, "span", None))

    # -- expressions --------------------------------------------------------------

    def _infer_expr(self, e: ast.Expr, scope: "_Scope") -> _Cell:
        cell = self._infer_expr_inner(e, scope)
        self.infer.expr_cells[id(e)] = cell
        return cell

    def _infer_expr_inner(self, e: ast.Expr, scope: "_Scope") -> _Cell:
        infer = self.infer
        if isinstance(e, ast.Constant):
            cell = infer.fresh()
            if e.kind is ast.ConstKind.INT:
                infer.constrain(cell, NUMERIC_TYPES, e.span, default="i32")
            elif e.kind is ast.ConstKind.FLOAT:
                infer.constrain(cell, frozenset(FLOAT_TYPES), e.span, default="f32")
            elif e.kind is ast.ConstKind.BOOL:
                infer.set_concrete(cell, "bool", e.span)
            elif e.kind is ast.ConstKind.CHAR:
                infer.constrain(cell, _CHARISH, e.span, default="char")
            elif e.kind is ast.ConstKind.STRING:
                infer.constrain(cell, _STRINGISH, e.span, default="String")
            elif e.kind is ast.ConstKind.DATETIME:
                infer.set_concrete(cell, "DateTime", e.span)
            elif e.kind is ast.ConstKind.DURATION:
                infer.set_concrete(cell, "Duration", e.span)
            return cell
        if isinstance(e, ast.VarRef):
            if e.name in self.const_decls and not scope.is_local(e.name):
                return self.infer.cell(("const", e.name))
            if not scope.allow_vars:
                raise TypeCheckError(f"variable '{e.name}' not allowed here", e.span)
            return scope.var(e.name)
        if isinstance(e, ast.ConstRef):
            return self.infer.cell(("const", e.name))
        if isinstance(e, ast.Wildcard):
            raise TypeCheckError(
                "'_' is only allowed as a direct atom or pattern argument", e.span)
        if isinstance(e, ast.Binary):
            lcell = self._infer_expr(e.left, scope)
            rcell = self._infer_expr(e.right, scope)
            cell = infer.fresh()
            if e.op in ("+", "-", "*", "/", "%"):
                infer.arith.append((e.op, lcell, rcell, cell, e.span))
            elif e.op in ("==", "!=", "<", "<=", ">", ">="):
                infer.unify(lcell, rcell, e.span)
                infer.set_concrete(cell, "bool", e.span)
            else:
                raise TypeCheckError(f"unknown operator '{e.op}'", e.span)
            return cell
        if isinstance(e, ast.Unary):
            operand = self._infer_expr(e.operand, scope)
            if e.op == "-":
                infer.constrain(operand, NUMERIC_TYPES, e.span, default="i32")
                return operand
            if e.op == "!":
                infer.set_concrete(operand, "bool", e.span)
                return operand
            raise TypeCheckError(f"unknown unary operator '{e.op}'", e.span)
        if isinstance(e, ast.IfThenElse):
            cond = self._infer_expr(e.cond, scope)
            infer.set_concrete(cond, "bool", e.span)
            tcell = self._infer_expr(e.then, scope)
            ecell = self._infer_expr(e.orelse, scope)
            infer.unify(tcell, ecell, e.span)
            return tcell
        if isinstance(e, ast.Cast):
            self._infer_expr(e.operand, scope)
            cell = infer.fresh()
            infer.set_concrete(cell, self.table.canonical_expr(e.ty), e.span)
            return cell
        if isinstance(e, ast.ForeignFnCall):
            ff = self.ffi.lookup_function(e.name) if self.ffi else None
            if ff is None:
                raise TypeCheckError(f"unknown foreign function '{e.name}'", e.span)
            if len(e.args) < len(ff.arg_types) or (
                    len(e.args) > len(ff.arg_types) and not ff.variadic):
                raise TypeCheckError(
                    f"'{e.name}' expects {len(ff.arg_types)} arguments, "
                    f"got {len(e.args)}", e.span)
            arg_cells = []
            for i, arg in enumerate(e.args):
                declared = ff.arg_types[min(i, len(ff.arg_types) - 1)]
                acell = self._infer_expr(arg, scope)
                arg_cells.append(acell)
                if declared == "Any":
                    pass
                elif declared == "Num":
                    infer.constrain(acell, NUMERIC_TYPES, e.span, default="i32")
                else:
                    infer.set_concrete(acell, declared, e.span)
            if ff.ret_type == "=0":  # polymorphic: return type follows arg 0
                return arg_cells[0]
            cell = infer.fresh()
            infer.set_concrete(cell, ff.ret_type, e.span)
            return cell
        if isinstance(e, ast.NewEntity):
            registry = self.table.registry
            owner = registry.owner_of(e.constructor, e.span)
            arg_types = registry.constructor_args(e.constructor, e.span)
            if len(e.args) != len(arg_types):
                raise TypeCheckError(
                    f"constructor '{e.constructor}' expects {len(arg_types)} "
                    f"arguments, got {len(e.args)}", e.span)
            for arg, ty in zip(e.args, arg_types):
                acell = self._infer_expr(arg, scope)
                infer.set_concrete(acell, self.table.canonical(ty, e.span), e.span)
            cell = infer.fresh()
            infer.set_concrete(cell, owner, e.span)
            return cell
        raise TypeCheckError(f"unsupported expression {type(e).__name__}",
                             getattr(e, "span", None))

    def _annotate_expr_types(self) -> None:
        for cell in self.infer.expr_cells.values():
            if cell.find().resolved is None:
                try:
                    self.infer.resolve(cell, "expression")
                except TypeCheckError:
                    continue

    def expr_type(self, e: ast.Expr) -> Optional[str]:
        cell = self.infer.expr_cells.get(id(e))
        if cell is None:
            return None
        return cell.find().resolved

    # -- ordering and safety ------------------------------------------------------

    def _order_conjuncts(self, conjuncts: list[Conjunct], heads: list[TypedHead],
                         locals_: set[str], decl) -> list[Conjunct]:
        ordered = self._order(list(conjuncts), set(), locals_, decl)
        bound: set[str] = set()
        for c in ordered:
            bound |= self._binds_of(c)
        head_vars: set[str] = set()
        for head in heads:
            for arg in head.args:
                head_vars |= _expr_vars(arg)
        missing = sorted(v for v in head_vars
                         if v not in bound and not self._is_const_name(v, locals_))
        if missing:
            raise RangeRestrictionError(
                f"head variable(s) {', '.join(missing)} not bound by a positive "
                "body position", decl.span)
        return ordered

    def _order(self, remaining: list[Conjunct], initial_bound: set[str],
               locals_: set[str], decl) -> list[Conjunct]:
        ordered: list[Conjunct] = []
        bound = set(initial_bound)
        while remaining:
            placed = None
            for i, c in enumerate(remaining):
                if self._placeable(c, bound, locals_):
                    placed = i
                    break
            if placed is None:
                self._raise_stuck(remaining, bound, locals_, decl)
            c = remaining.pop(placed)
            c = self._finalize_conjunct(c, bound, locals_, decl)
            ordered.append(c)
            bound |= self._binds_of(c)
        return ordered

    def _raise_stuck(self, remaining, bound, locals_, decl):
        for c in remaining:
            if isinstance(c, Lit) and c.positive \
                    and self._sig_of(c.atom.predicate).kind == "foreign":
                sig = self._sig_of(c.atom.predicate)
                for pos in sig.bound_positions():
                    needed = self._needed_vars(c.atom.args[pos], locals_) - bound
                    if needed:
                        raise UnboundForeignArgumentError(
                            f"bound argument {pos} of foreign predicate "
                            f"'{c.atom.predicate}' depends on unbound "
                            f"variable(s) {', '.join(sorted(needed))}", c.atom.span)
        for c in remaining:
            if isinstance(c, Lit) and not c.positive:
                needed = set()
                for a in c.atom.args:
                    needed |= self._needed_vars(a, locals_) - bound
                if needed:
                    raise RangeRestrictionError(
                        f"variable(s) {', '.join(sorted(needed))} occur only under "
                        f"negation of '{c.atom.predicate}'", c.atom.span)
        raise RangeRestrictionError(
            "cannot order rule body: unbound variables in constraints", decl.span)

    def _sig_of(self, name: str) -> RelationSignature:
        sig = self.relations.get(name)
        if sig is None:
            # inferred stored relation
            cells = self.rel_cells[name]
            sig = RelationSignature(name, [None] * len(cells), ["?"] * len(cells),
                                    [ast.Adornment.FREE] * len(cells))
        return sig

    def _needed_vars(self, e: ast.Expr, locals_: set[str]) -> set[str]:
        """Variables an expression needs before it can be evaluated.

        Names resolved as constants are always available.
        """
        return {v for v in _expr_vars(e) if not self._is_const_name(v, locals_)}

    def _is_const_name(self, name: str, locals_: set[str]) -> bool:
        return name in self.const_decls and name not in locals_

    def _placeable(self, c: Conjunct, bound: set[str], locals_: set[str]) -> bool:
        if isinstance(c, Lit):
            sig = self._sig_of(c.atom.predicate)
            if not c.positive:
                return all(self._needed_vars(a, locals_) <= bound for a in c.atom.args)
            if sig.kind == "foreign":
                for pos, adorn in enumerate(sig.adornments):
                    arg = c.atom.args[pos]
                    if adorn is ast.Adornment.BOUND:
                        if not self._needed_vars(arg, locals_) <= bound:
                            return False
                    else:
                        if not isinstance(arg, (ast.VarRef, ast.Wildcard)) \
                                and not self._needed_vars(arg, locals_) <= bound:
                            return False
                return True
            # stored atom: expression args need their variables bound
            for arg in c.atom.args:
                if isinstance(arg, (ast.VarRef, ast.Wildcard)):
                    continue
                if not self._needed_vars(arg, locals_) <= bound:
                    return False
            return True
        if isinstance(c, Cond):
            e = c.expr
            if self._needed_vars(e, locals_) <= bound:
                return True
            if isinstance(e, ast.Binary) and e.op == "==":
                if isinstance(e.left, ast.VarRef) and e.left.name not in bound \
                        and self._needed_vars(e.right, locals_) <= bound:
                    return True
                if isinstance(e.right, ast.VarRef) and e.right.name not in bound \
                        and self._needed_vars(e.left, locals_) <= bound:
                    return True
            return False
        if isinstance(c, Match):
            return True
        if isinstance(c, Soft):
            return c.left in bound and c.right in bound
        if isinstance(c, Agg):
            return True
        return False

    def _finalize_conjunct(self, c: Conjunct, bound: set[str], locals_: set[str],
                           decl) -> Conjunct:
        if isinstance(c, Cond):
            e = c.expr
            if isinstance(e, ast.Binary) and e.op == "==" \
                    and not self._needed_vars(e, locals_) <= bound:
                if isinstance(e.left, ast.VarRef) and e.left.name not in bound \
                        and not self._is_const_name(e.left.name, locals_):
                    return Cond(e, binds=e.left.name, rhs=e.right)
                if isinstance(e.right, ast.VarRef) and e.right.name not in bound \
                        and not self._is_const_name(e.right.name, locals_):
                    return Cond(e, binds=e.right.name, rhs=e.left)
        if isinstance(c, Agg):
            inner = [self._order(list(d), set(), locals_, decl) for d in c.inner]
            where = None
            if c.where is not None:
                where = [self._order(list(d), set(), locals_, decl) for d in c.where]
            return Agg(c.operator, c.result_vars, c.binding_vars, inner, where,
                       c.group_vars, c.exported_vars, c.span)
        return c

    def _binds_of(self, c: Conjunct) -> set[str]:
        if isinstance(c, Lit) and c.positive:
            return {arg.name for arg in c.atom.args if isinstance(arg, ast.VarRef)}
        if isinstance(c, Cond) and c.binds is not None:
            return {c.binds}
        if isinstance(c, Match):
            return {c.var} | _pattern_vars(c.pattern)
        if isinstance(c, Agg):
            return set(c.result_vars) | set(c.exported_vars)
        return set()


class _Scope:
    def __init__(self, checker: Checker, rule_key, local_binds: set[str],
                 allow_vars: bool = True):
        self.checker = checker
        self.rule_key = rule_key
        self.local_binds = local_binds
        self.allow_vars = allow_vars
        self.vars: dict[str, _Cell] = {}

    def var(self, name: str) -> _Cell:
        if name not in self.vars:
            self.vars[name] = self.checker.infer.cell((*self.rule_key, name))
        return self.vars[name]

    def is_local(self, name: str) -> bool:
        return name in self.local_binds


def _expr_vars(e: ast.Expr) -> set[str]:
    out: set[str] = set()

    def walk(node):
        if isinstance(node, ast.VarRef):
            out.add(node.name)
        elif isinstance(node, ast.Binary):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, ast.Unary):
            walk(node.operand)
        elif isinstance(node, ast.IfThenElse):
            walk(node.cond)
            walk(node.then)
            walk(node.orelse)
        elif isinstance(node, ast.Cast):
            walk(node.operand)
        elif isinstance(node, (ast.ForeignFnCall, ast.NewEntity)):
            for a in node.args:
                walk(a)

    walk(e)
    return out


def _pattern_vars(p: ast.Pattern) -> set[str]:
    if isinstance(p, ast.VarRef):
        return {p.name}
    if isinstance(p, ast.EntityPattern):
        out: set[str] = set()
        for a in p.args:
            out |= _pattern_vars(a)
        return out
    return set()


def _conjunct_vars(conjuncts: list[Conjunct]) -> set[str]:
    out: set[str] = set()
    for c in conjuncts:
        if isinstance(c, Lit):
            for a in c.atom.args:
                out |= _expr_vars(a)
        elif isinstance(c, Cond):
            out |= _expr_vars(c.expr)
        elif isinstance(c, Match):
            out.add(c.var)
            out |= _pattern_vars(c.pattern)
        elif isinstance(c, Soft):
            out |= {c.left, c.right}
        elif isinstance(c, Agg):
            out |= set(c.exported_vars)
    return out


def check_program(program: ast.SourceProgram, ffi_registry=None) -> TypedProgram:
    """Type-check a (post-attribute) AST into a TypedProgram."""
    checker = Checker(program, ffi_registry)
    typed = checker.run()
    typed.checker = checker  # expose expr_type for the compiler
    return typed


def check_adornment(typed: TypedProgram) -> dict[int, list[Conjunct]]:
    """Expose the per-rule evaluation order chosen during checking."""
    return {rule.rule_id: rule.conjuncts for rule in typed.rules}
