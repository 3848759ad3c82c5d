"""Recursive-descent parser for the surface grammar.

Formula parsing resolves the ambiguity between parenthesized formulas and
expression constraints by attempting an expression parse first and
backtracking on failure. Expressions use a Pratt parser with C-like
precedence: arithmetic > relational > equality (so ``l == size > A``
reads as ``l == (size > A)``, matching the worked examples).
"""

from __future__ import annotations

from typing import Optional

from relog.errors import ParseError
from relog.syntax import ast
from relog.syntax.lexer import Lexer
from relog.syntax.source import SourceText, Span
from relog.syntax.tokens import Token, TokenKind as T

# (left, right) binding powers; larger binds tighter
_BINARY_BP = {
    "==": (10, 11), "!=": (10, 11),
    "<": (20, 21), "<=": (20, 21), ">": (20, 21), ">=": (20, 21),
    "+": (30, 31), "-": (30, 31),
    "*": (40, 41), "/": (40, 41), "%": (40, 41),
}

_AGGREGATORS = {"count", "exists", "min", "max", "sum"}


class Parser:
    def __init__(self, text: str, source_name: str = "<input>"):
        self.source = SourceText(source_name, text)
        self.tokens = Lexer(self.source).tokenize()
        self.pos = 0

    # -- token helpers ---------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def at(self, kind: T, offset: int = 0) -> bool:
        return self.peek(offset).kind is kind

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not T.EOF:
            self.pos += 1
        return tok

    def expect(self, kind: T, what: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind is not kind:
            expected = what or kind.value
            raise ParseError(
                f"expected {expected}, found {tok.lexeme or 'end of input'!r}",
                tok.span, expected={kind.value})
        return self.advance()

    def error(self, message: str, expected: Optional[set[str]] = None) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.span, expected=expected)

    def _span_from(self, start: Span) -> Span:
        end = self.tokens[self.pos - 1].span if self.pos > 0 else start
        return start.merge(end)

    # -- program ----------------------------------------------------------

    def parse_program(self) -> ast.SourceProgram:
        items: list[ast.Item] = []
        while not self.at(T.EOF):
            items.append(self.parse_item())
        return ast.SourceProgram(items, self.source.name)

    def parse_item(self) -> ast.Item:
        attrs = []
        while self.at(T.AT):
            attrs.append(self.parse_attribute())
        item = self.parse_decl()
        item.attributes = attrs
        return item

    def parse_attribute(self) -> ast.AttributeUse:
        start = self.expect(T.AT).span
        name = self.expect(T.IDENT, "attribute name").value
        pos_args: list[object] = []
        kw_args: dict[str, object] = {}
        if self.at(T.LPAREN):
            self.advance()
            while not self.at(T.RPAREN):
                if self.at(T.IDENT) and self.at(T.EQ, 1):
                    key = self.advance().value
                    self.advance()
                    if key in kw_args:
                        raise self.error(f"duplicate keyword argument '{key}'")
                    kw_args[key] = self.parse_attr_value()
                else:
                    if kw_args:
                        raise self.error("positional attribute argument after keyword argument")
                    pos_args.append(self.parse_attr_value())
                if not self.at(T.RPAREN):
                    self.expect(T.COMMA)
            self.expect(T.RPAREN)
        return ast.AttributeUse(name, pos_args, kw_args, self._span_from(start))

    def parse_attr_value(self) -> object:
        tok = self.peek()
        if tok.kind in (T.INT, T.FLOAT, T.STRING, T.CHAR):
            self.advance()
            return tok.value
        if tok.kind is T.KW_TRUE:
            self.advance()
            return True
        if tok.kind is T.KW_FALSE:
            self.advance()
            return False
        if tok.kind is T.MINUS:
            self.advance()
            num = self.peek()
            if num.kind in (T.INT, T.FLOAT):
                self.advance()
                return -num.value
            raise self.error("expected number after '-'")
        if tok.kind is T.LBRACKET:
            self.advance()
            values = []
            while not self.at(T.RBRACKET):
                values.append(self.parse_attr_value())
                if not self.at(T.RBRACKET):
                    self.expect(T.COMMA)
            self.expect(T.RBRACKET)
            return values
        if tok.kind is T.LPAREN:
            self.advance()
            values = []
            while not self.at(T.RPAREN):
                values.append(self.parse_attr_value())
                if not self.at(T.RPAREN):
                    self.expect(T.COMMA)
            self.expect(T.RPAREN)
            return tuple(values)
        raise self.error(f"invalid attribute argument {tok.lexeme!r}",
                         expected={"literal", "list", "tuple"})

    # -- declarations -----------------------------------------------------

    def parse_decl(self) -> ast.Item:
        tok = self.peek()
        if tok.kind is T.KW_IMPORT:
            return self.parse_import()
        if tok.kind is T.KW_EXTERN:
            self.advance()
            if not self.at(T.KW_TYPE):
                raise self.error("expected 'type' after 'extern'")
            return self.parse_type_decl(extern=True)
        if tok.kind is T.KW_TYPE:
            return self.parse_type_decl(extern=False)
        if tok.kind is T.KW_CONST:
            return self.parse_const_decl()
        if tok.kind is T.KW_REL:
            return self.parse_rel_decl()
        if tok.kind is T.KW_QUERY:
            start = self.advance().span
            name = self.expect(T.IDENT, "relation name").value
            return ast.QueryDecl(name, self._span_from(start))
        raise self.error(
            f"expected a declaration, found {tok.lexeme!r}",
            expected={"import", "type", "const", "rel", "query"})

    def parse_import(self) -> ast.ImportDecl:
        start = self.expect(T.KW_IMPORT).span
        path = self.expect(T.STRING, "file path string").value
        return ast.ImportDecl(path, self._span_from(start))

    def parse_type_decl(self, extern: bool) -> ast.Item:
        start = self.expect(T.KW_TYPE).span
        if self.at(T.DOLLAR_IDENT):
            return self.parse_foreign_fn_decl(start)
        name = self.expect(T.IDENT, "type or relation name").value
        if self.at(T.SUBTYPE):
            self.advance()
            parent = self.parse_type_expr()
            return ast.SubTypeDecl(name, parent, self._span_from(start))
        if self.at(T.EQ):
            self.advance()
            return self.parse_type_rhs(name, start)
        if self.at(T.LPAREN):
            return self.parse_predicate_decl(name, start, extern)
        raise self.error("expected '=', '<:' or '(' in type declaration")

    def parse_foreign_fn_decl(self, start: Span) -> ast.ForeignFunctionTypeDecl:
        name = self.advance().value
        self.expect(T.LPAREN)
        args: list[tuple[Optional[str], ast.TypeExpr]] = []
        while not self.at(T.RPAREN):
            if self.at(T.IDENT) and self.at(T.COLON, 1):
                arg_name = self.advance().value
                self.advance()
                args.append((arg_name, self.parse_type_expr()))
            else:
                args.append((None, self.parse_type_expr()))
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
        self.expect(T.RPAREN)
        self.expect(T.ARROW)
        ret = self.parse_type_expr()
        return ast.ForeignFunctionTypeDecl(name, args, ret, self._span_from(start))

    def parse_type_rhs(self, name: str, start: Span) -> ast.Item:
        # ADT when the right side is one or more `Cons(...)` alternatives.
        if self.at(T.IDENT) and self.at(T.LPAREN, 1):
            constructors = [self.parse_constructor_decl()]
            while self.at(T.PIPE):
                self.advance()
                constructors.append(self.parse_constructor_decl())
            span = self._span_from(start)
            seen = set()
            for cname, _ in constructors:
                if cname in seen:
                    raise ParseError(f"duplicate constructor '{cname}' in type '{name}'", span)
                seen.add(cname)
            return ast.AdtDecl(name, constructors, span)
        target = self.parse_type_expr()
        return ast.AliasDecl(name, target, self._span_from(start))

    def parse_constructor_decl(self) -> tuple[str, list[ast.TypeExpr]]:
        cname = self.expect(T.IDENT, "constructor name").value
        self.expect(T.LPAREN)
        args = []
        while not self.at(T.RPAREN):
            args.append(self.parse_type_expr())
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
        self.expect(T.RPAREN)
        return cname, args

    def parse_predicate_decl(self, name: str, start: Span, extern: bool) -> ast.PredicateTypeDecl:
        self.expect(T.LPAREN)
        args: list[ast.PredicateArg] = []
        while not self.at(T.RPAREN):
            arg_start = self.peek().span
            adorn = ast.Adornment.UNSPECIFIED
            if self.at(T.KW_BOUND):
                self.advance()
                adorn = ast.Adornment.BOUND
            elif self.at(T.KW_FREE):
                self.advance()
                adorn = ast.Adornment.FREE
            if self.at(T.IDENT) and self.at(T.COLON, 1):
                arg_name = self.advance().value
                self.advance()
                ty = self.parse_type_expr()
            else:
                arg_name = None
                ty = self.parse_type_expr()
            args.append(ast.PredicateArg(arg_name, ty, adorn, self._span_from(arg_start)))
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
        self.expect(T.RPAREN)
        return ast.PredicateTypeDecl(name, args, extern, self._span_from(start))

    def parse_type_expr(self) -> ast.TypeExpr:
        tok = self.expect(T.IDENT, "type name")
        return ast.TypeExpr(tok.value, tok.span)

    def parse_const_decl(self) -> ast.ConstDecl:
        start = self.expect(T.KW_CONST).span
        name = self.expect(T.IDENT, "constant name").value
        self.expect(T.EQ)
        value = self.parse_expr()
        return ast.ConstDecl(name, value, self._span_from(start))

    # -- relation declarations ---------------------------------------------

    def parse_rel_decl(self) -> ast.Item:
        start = self.expect(T.KW_REL).span
        if self.at(T.LBRACE):
            return self.parse_multi_head_rule(start)

        prob = self.parse_optional_prob()
        name = self.expect(T.IDENT, "relation name").value

        if self.at(T.EQ) and prob is None:
            self.advance()
            return self.parse_fact_set(name, start)

        head = self.parse_atom_with_name(name)
        if self.at(T.EQ):
            self.advance()
            body = self.parse_formula()
            rule_head = ast.RuleHead(prob, head, head.span)
            return ast.RuleDecl([rule_head], body, self._span_from(start))
        # Singleton fact written in atom form.
        fact = ast.FactSpec(prob, head.args, head.span)
        return ast.FactSetDecl(name, [fact], self._span_from(start))

    def parse_optional_prob(self) -> Optional[float]:
        if self.peek().kind in (T.FLOAT, T.INT) and self.at(T.COLONCOLON, 1):
            value = float(self.advance().value)
            self.advance()
            return value
        return None

    def parse_fact_set(self, name: str, start: Span) -> ast.FactSetDecl:
        self.expect(T.LBRACE)
        facts: list[ast.FactSpec] = []
        while not self.at(T.RBRACE):
            facts.append(self.parse_fact_spec())
            if not self.at(T.RBRACE):
                self.expect(T.COMMA)
        self.expect(T.RBRACE)
        return ast.FactSetDecl(name, facts, self._span_from(start))

    def parse_fact_spec(self) -> ast.FactSpec:
        fact_start = self.peek().span
        prob = self.parse_optional_prob()
        self.expect(T.LPAREN)
        values: list[ast.Expr] = []
        while not self.at(T.RPAREN):
            values.append(self.parse_expr())
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
            elif self.at(T.COMMA):  # tolerate the 1-tuple trailing comma
                self.advance()
        self.expect(T.RPAREN)
        return ast.FactSpec(prob, values, self._span_from(fact_start))

    def parse_multi_head_rule(self, start: Span) -> ast.RuleDecl:
        self.expect(T.LBRACE)
        heads: list[ast.RuleHead] = []
        while not self.at(T.RBRACE):
            head_start = self.peek().span
            prob = self.parse_optional_prob()
            name = self.expect(T.IDENT, "relation name").value
            atom = self.parse_atom_with_name(name)
            heads.append(ast.RuleHead(prob, atom, self._span_from(head_start)))
            if not self.at(T.RBRACE):
                self.expect(T.SEMI)
            elif self.at(T.SEMI):
                self.advance()
        self.expect(T.RBRACE)
        self.expect(T.EQ)
        body = self.parse_formula()
        return ast.RuleDecl(heads, body, self._span_from(start), multi_head_braced=True)

    def parse_atom_with_name(self, name: str) -> ast.Atom:
        start = self.tokens[self.pos - 1].span
        self.expect(T.LPAREN)
        args: list[ast.Expr] = []
        while not self.at(T.RPAREN):
            args.append(self.parse_expr())
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
        self.expect(T.RPAREN)
        return ast.Atom(name, args, self._span_from(start))

    # -- formulas -----------------------------------------------------------

    def parse_formula(self) -> ast.Formula:
        return self.parse_or()

    def parse_or(self) -> ast.Formula:
        start = self.peek().span
        parts = [self.parse_and()]
        while self.at(T.KW_OR):
            self.advance()
            parts.append(self.parse_and())
        if len(parts) == 1:
            return parts[0]
        return ast.Or(parts, self._span_from(start))

    def parse_and(self) -> ast.Formula:
        start = self.peek().span
        parts = [self.parse_formula_unary()]
        while self.at(T.KW_AND):
            self.advance()
            parts.append(self.parse_formula_unary())
        if len(parts) == 1:
            return parts[0]
        return ast.And(parts, self._span_from(start))

    def parse_formula_unary(self) -> ast.Formula:
        if self.at(T.KW_NOT):
            start = self.advance().span
            operand = self.parse_formula_unary()
            return ast.Not(operand, self._span_from(start))
        return self.parse_formula_primary()

    def parse_formula_primary(self) -> ast.Formula:
        tok = self.peek()
        if tok.kind is T.KW_CASE:
            return self.parse_case_is()
        if tok.kind is T.IDENT:
            if self.at(T.LPAREN, 1):
                name = self.advance().value
                return self.parse_atom_with_name(name)
            if self.at(T.TILDE_EQ, 1):
                start = tok.span
                left = self.advance().value
                self.advance()
                right = self.expect(T.IDENT, "variable").value
                return ast.SoftEq(left, right, self._span_from(start))
            if self._at_aggregate_head():
                return self.parse_aggregate()
        # Expression constraint, with fallback to a parenthesized formula.
        saved = self.pos
        try:
            expr = self.parse_expr()
            return ast.Constraint(expr, getattr(expr, "span", tok.span))
        except ParseError:
            self.pos = saved
        if self.at(T.LPAREN):
            self.advance()
            inner = self.parse_formula()
            self.expect(T.RPAREN)
            return inner
        raise self.error(f"expected a formula, found {tok.lexeme!r}",
                         expected={"atom", "expression", "case", "aggregate", "("})

    def _at_aggregate_head(self) -> bool:
        # IDENT (, IDENT)* := AGG(
        i = 0
        while True:
            if not self.at(T.IDENT, i):
                return False
            i += 1
            if self.at(T.COLONEQ, i):
                return True
            if self.at(T.COMMA, i):
                i += 1
                continue
            return False

    def parse_aggregate(self) -> ast.Aggregate:
        start = self.peek().span
        result_vars = [self.expect(T.IDENT).value]
        while self.at(T.COMMA):
            self.advance()
            result_vars.append(self.expect(T.IDENT).value)
        self.expect(T.COLONEQ)
        op_tok = self.expect(T.IDENT, "aggregator name")
        if op_tok.value not in _AGGREGATORS:
            raise ParseError(f"unknown aggregator '{op_tok.value}'", op_tok.span,
                             expected=_AGGREGATORS)
        self.expect(T.LPAREN)
        binding_vars = []
        # binding vars: VAR (, VAR)* ':'  (may be empty for `exists(: F)`? keep >=1)
        binding_vars.append(self.expect(T.IDENT, "binding variable").value)
        while self.at(T.COMMA):
            self.advance()
            binding_vars.append(self.expect(T.IDENT).value)
        self.expect(T.COLON)
        inner = self.parse_formula()
        where_vars: list[str] = []
        where: Optional[ast.Formula] = None
        if self.at(T.KW_WHERE):
            self.advance()
            where_vars.append(self.expect(T.IDENT, "where variable").value)
            while self.at(T.COMMA):
                self.advance()
                where_vars.append(self.expect(T.IDENT).value)
            self.expect(T.COLON)
            where = self.parse_formula()
        self.expect(T.RPAREN)
        return ast.Aggregate(result_vars, op_tok.value, binding_vars, inner,
                             where_vars, where, self._span_from(start))

    def parse_case_is(self) -> ast.CaseIs:
        start = self.expect(T.KW_CASE).span
        var = self.expect(T.IDENT, "variable").value
        self.expect(T.KW_IS)
        pattern = self.parse_entity_pattern()
        return ast.CaseIs(var, pattern, self._span_from(start))

    def parse_entity_pattern(self) -> ast.EntityPattern:
        tok = self.expect(T.IDENT, "constructor name")
        self.expect(T.LPAREN)
        args: list[ast.Pattern] = []
        while not self.at(T.RPAREN):
            args.append(self.parse_pattern())
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
        self.expect(T.RPAREN)
        return ast.EntityPattern(tok.value, args, self._span_from(tok.span))

    def parse_pattern(self) -> ast.Pattern:
        tok = self.peek()
        if tok.kind is T.IDENT:
            if self.at(T.LPAREN, 1):
                return self.parse_entity_pattern()
            self.advance()
            return ast.VarRef(tok.value, tok.span)
        if tok.kind is T.UNDERSCORE:
            self.advance()
            return ast.Wildcard(tok.span)
        return self.parse_literal_constant()

    # -- expressions -----------------------------------------------------------

    def parse_expr(self) -> ast.Expr:
        return self.parse_expr_bp(0)

    def parse_expr_bp(self, min_bp: int) -> ast.Expr:
        if self.at(T.KW_IF):
            return self.parse_if_expr()
        lhs = self.parse_unary_expr()
        while True:
            op_tok = self.peek()
            op = op_tok.lexeme
            if op not in _BINARY_BP:
                break
            left_bp, right_bp = _BINARY_BP[op]
            if left_bp < min_bp:
                break
            self.advance()
            rhs = self.parse_expr_bp(right_bp)
            lhs = ast.Binary(op, lhs, rhs, lhs.span.merge(rhs.span))
        return lhs

    def parse_if_expr(self) -> ast.Expr:
        start = self.expect(T.KW_IF).span
        cond = self.parse_expr()
        self.expect(T.KW_THEN)
        then = self.parse_expr()
        self.expect(T.KW_ELSE)
        orelse = self.parse_expr()
        return ast.IfThenElse(cond, then, orelse, self._span_from(start))

    def parse_unary_expr(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind is T.MINUS:
            self.advance()
            operand = self.parse_unary_expr()
            return ast.Unary("-", operand, tok.span.merge(operand.span))
        if tok.kind is T.BANG:
            self.advance()
            operand = self.parse_unary_expr()
            return ast.Unary("!", operand, tok.span.merge(operand.span))
        expr = self.parse_primary_expr()
        while self.at(T.KW_AS):
            self.advance()
            ty = self.parse_type_expr()
            expr = ast.Cast(expr, ty, expr.span.merge(ty.span))
        return expr

    def parse_primary_expr(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind is T.KW_IF:
            return self.parse_if_expr()
        if tok.kind in (T.INT, T.FLOAT, T.STRING, T.CHAR, T.DATETIME, T.DURATION,
                        T.KW_TRUE, T.KW_FALSE):
            return self.parse_literal_constant()
        if tok.kind is T.UNDERSCORE:
            self.advance()
            return ast.Wildcard(tok.span)
        if tok.kind is T.DOLLAR_IDENT:
            self.advance()
            args = self.parse_call_args()
            return ast.ForeignFnCall(tok.value, args, self._span_from(tok.span))
        if tok.kind is T.KW_NEW:
            self.advance()
            cons = self.expect(T.IDENT, "constructor name")
            args = self.parse_call_args()
            return ast.NewEntity(cons.value, args, self._span_from(tok.span))
        if tok.kind is T.IDENT:
            self.advance()
            if self.at(T.LPAREN):
                args = self.parse_call_args()
                return ast.NewEntity(tok.value, args, self._span_from(tok.span))
            return ast.VarRef(tok.value, tok.span)
        if tok.kind is T.LPAREN:
            self.advance()
            inner = self.parse_expr()
            self.expect(T.RPAREN)
            return inner
        raise self.error(f"expected an expression, found {tok.lexeme or 'end of input'!r}",
                         expected={"expression"})

    def parse_call_args(self) -> list[ast.Expr]:
        self.expect(T.LPAREN)
        args: list[ast.Expr] = []
        while not self.at(T.RPAREN):
            args.append(self.parse_expr())
            if not self.at(T.RPAREN):
                self.expect(T.COMMA)
        self.expect(T.RPAREN)
        return args

    def parse_literal_constant(self) -> ast.Constant:
        tok = self.peek()
        mapping = {
            T.INT: ast.ConstKind.INT,
            T.FLOAT: ast.ConstKind.FLOAT,
            T.STRING: ast.ConstKind.STRING,
            T.CHAR: ast.ConstKind.CHAR,
            T.DATETIME: ast.ConstKind.DATETIME,
            T.DURATION: ast.ConstKind.DURATION,
        }
        if tok.kind in mapping:
            self.advance()
            return ast.Constant(mapping[tok.kind], tok.value, tok.span)
        if tok.kind is T.KW_TRUE:
            self.advance()
            return ast.Constant(ast.ConstKind.BOOL, True, tok.span)
        if tok.kind is T.KW_FALSE:
            self.advance()
            return ast.Constant(ast.ConstKind.BOOL, False, tok.span)
        if tok.kind is T.MINUS:
            self.advance()
            inner = self.parse_literal_constant()
            if inner.kind not in (ast.ConstKind.INT, ast.ConstKind.FLOAT):
                raise ParseError("'-' requires a numeric literal", tok.span)
            return ast.Constant(inner.kind, -inner.value, tok.span.merge(inner.span))
        raise self.error(f"expected a literal, found {tok.lexeme!r}", expected={"literal"})


def parse_program(text: str, source_name: str = "<input>") -> ast.SourceProgram:
    return Parser(text, source_name).parse_program()


def parse_expression(text: str, source_name: str = "<expr>") -> ast.Expr:
    parser = Parser(text, source_name)
    expr = parser.parse_expr()
    parser.expect(T.EOF, "end of input")
    return expr
