"""Concrete syntax for `.adl` files: lexer, parser, desugarer, renderer.

A source unit is a sequence of `def name : type = term` items followed by
an optional `main = term`.  Parsing produces fully desugared core terms:

  * `let x = t in s`        becomes `(fun (x : T) => s) t` with T inferred,
  * `t - u`                 becomes `t + (-1.0) * u`,
  * `fun ((x, y) : T) => t` becomes a lambda over a fresh tuple variable,
  * references to earlier definitions are substituted in,
  * shadowing binders are renamed apart.

Names starting with `_` are reserved for generated binders: user binders
of that shape are renamed on sight and free occurrences are rejected.

Operator precedence: application binds tightest, then `*`, then `+`/`-`.
Comments run from `--` to end of line.  Negative literals are written in
parentheses: `(-1.0)`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import typecheck
from .ops import OPS
from .terms import (App, Arrow, Cons, Const, Context, Fold, FreshNames, fresh,
                    Inject, Lam, ListOf, MatchTuple, MatchVariant, Nil, Prim,
                    Prod, REAL, Term, Tuple, Type, Var, Variant)


@dataclass(frozen=True)
class Definition:
    name: str
    declared: Type
    body: Term


@dataclass(frozen=True)
class SourceUnit:
    defs: tuple[Definition, ...]
    main: Term | None


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"{line}:{col}: {message}")


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {"def", "main", "fun", "match", "with", "inj", "as", "nil", "cons",
            "fold", "over", "from", "end", "let", "in", "real", "list"}

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>=>|->|[()\[\]<>,:|=+\-*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "id", "sym", "eof"
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise ParseError(line, col, f"unexpected character {c!r}")
        text = m.group(0)
        kind = "num" if m.lastgroup == "num" else (
            "id" if m.lastgroup == "id" else "sym")
        tokens.append(Token(kind, text, line, col))
        col += len(text)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser / desugarer

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        # definitions seen so far: name -> (closed core term, declared type)
        self.defs: dict[str, tuple[Term, Type]] = {}

    # -- token plumbing

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.cur
        raise ParseError(tok.line, tok.col, message)

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def at_sym(self, text: str) -> bool:
        return self.cur.kind == "sym" and self.cur.text == text

    def at_kw(self, text: str) -> bool:
        return self.cur.kind == "id" and self.cur.text == text

    def eat_sym(self, text: str) -> Token:
        if not self.at_sym(text):
            self.error(f"expected {text!r}, found {self.cur.text!r}")
        return self.advance()

    def eat_kw(self, text: str) -> Token:
        if not self.at_kw(text):
            self.error(f"expected {text!r}, found {self.cur.text!r}")
        return self.advance()

    def eat_name(self, what: str = "name") -> str:
        tok = self.cur
        if tok.kind != "id":
            self.error(f"expected {what}, found {tok.text!r}")
        if tok.text in KEYWORDS:
            self.error(f"keyword {tok.text!r} cannot be used as a {what}")
        if tok.text in OPS:
            self.error(f"operation name {tok.text!r} is reserved")
        self.advance()
        return tok.text

    def eat_binder(self, env: dict) -> tuple[str, str]:
        """Parse one binder; returns (surface name, core name).

        Renames on shadowing or reserved shape so core terms never shadow.
        """
        tok = self.cur
        surface = self.eat_name("binder")
        if surface in env or FreshNames.is_reserved(surface):
            return surface, fresh(surface)
        del tok
        return surface, surface

    # -- types

    def parse_type(self) -> Type:
        ty = self.parse_type_atom()
        if self.at_sym("->"):
            self.advance()
            return Arrow(ty, self.parse_type())
        return ty

    def parse_type_atom(self) -> Type:
        if self.at_kw("real"):
            self.advance()
            return REAL
        if self.at_kw("list"):
            self.advance()
            return ListOf(self.parse_type_atom())
        if self.at_sym("("):
            self.advance()
            if self.at_sym(")"):
                self.advance()
                return Prod(())
            first = self.parse_type()
            if self.at_sym(")"):
                self.advance()
                return first  # grouping
            items = [first]
            while self.at_sym(","):
                self.advance()
                if self.at_sym(")"):
                    break
                items.append(self.parse_type())
            self.eat_sym(")")
            return Prod(tuple(items))
        if self.at_sym("<"):
            self.advance()
            cases = []
            while True:
                ctor = self.eat_name("constructor")
                self.eat_sym(":")
                cases.append((ctor, self.parse_type()))
                if self.at_sym("|"):
                    self.advance()
                    continue
                break
            self.eat_sym(">")
            seen = [c for c, _ in cases]
            if len(set(seen)) != len(seen):
                self.error(f"duplicate constructor in variant: {seen}")
            return Variant(tuple(cases))
        self.error(f"expected a type, found {self.cur.text!r}")

    # -- terms; env maps surface name -> (core name, type)

    def _context(self, env: dict) -> Context:
        ctx = Context()
        for core_name, ty in env.values():
            ctx = ctx.extend(core_name, ty)
        return ctx

    def parse_expr(self, env: dict) -> Term:
        if self.at_kw("fun"):
            return self.parse_fun(env)
        if self.at_kw("let"):
            return self.parse_let(env)
        if self.at_kw("match"):
            return self.parse_match(env)
        if self.at_kw("inj"):
            return self.parse_inj(env)
        if self.at_kw("fold"):
            return self.parse_fold(env)
        return self.parse_additive(env)

    def parse_fun(self, env: dict) -> Term:
        self.eat_kw("fun")
        self.eat_sym("(")
        if self.at_sym("("):  # tuple-pattern sugar
            self.advance()
            binders = [self.eat_name("binder")]
            while self.at_sym(","):
                self.advance()
                binders.append(self.eat_name("binder"))
            self.eat_sym(")")
            self.eat_sym(":")
            ty = self.parse_type()
            self.eat_sym(")")
            self.eat_sym("=>")
            tup = fresh("p")
            inner_env = dict(env)
            core_names = []
            for surface in binders:
                core = (fresh(surface)
                        if surface in inner_env or FreshNames.is_reserved(surface)
                        else surface)
                inner_env[surface] = (core, REAL)  # type fixed below
                core_names.append(core)
            if not isinstance(ty, Prod) or len(ty.items) != len(binders):
                self.error(f"tuple pattern of width {len(binders)} needs a "
                           f"product annotation of the same width")
            for surface, core, item_ty in zip(binders, core_names, ty.items):
                inner_env[surface] = (core, item_ty)
            body = self.parse_expr(inner_env)
            return Lam(tup, ty, MatchTuple(Var(tup), tuple(core_names), body))
        surface, core = self.eat_binder(env)
        self.eat_sym(":")
        ty = self.parse_type()
        self.eat_sym(")")
        self.eat_sym("=>")
        body = self.parse_expr(env | {surface: (core, ty)})
        return Lam(core, ty, body)

    def parse_let(self, env: dict) -> Term:
        tok = self.cur
        self.eat_kw("let")
        surface, core = self.eat_binder(env)
        self.eat_sym("=")
        rhs = self.parse_expr(env)
        try:
            rhs_ty = typecheck.infer(self._context(env), rhs)
        except typecheck.TypeMismatch as e:
            raise ParseError(tok.line, tok.col,
                             f"cannot type let binding: {e}") from e
        self.eat_kw("in")
        body = self.parse_expr(env | {surface: (core, rhs_ty)})
        return App(Lam(core, rhs_ty, body), rhs)

    def parse_match(self, env: dict) -> Term:
        self.eat_kw("match")
        scrut = self.parse_expr(env)
        self.eat_kw("with")
        if self.at_sym("("):
            self.advance()
            binders = []
            if not self.at_sym(")"):
                binders.append(self.eat_name("binder"))
                while self.at_sym(","):
                    self.advance()
                    binders.append(self.eat_name("binder"))
            self.eat_sym(")")
            self.eat_sym("=>")
            inner_env = dict(env)
            core_names = []
            for surface in binders:
                core = (fresh(surface)
                        if surface in inner_env or FreshNames.is_reserved(surface)
                        else surface)
                # binder types are unknown here; record a placeholder and
                # rely on let-inference never looking at these before the
                # typechecker assigns real types
                inner_env[surface] = (core, REAL)
                core_names.append(core)
            body = self._parse_match_tuple_body(env, scrut, binders, core_names)
            return MatchTuple(scrut, tuple(core_names), body)
        if self.at_sym("|"):
            branches = []
            while self.at_sym("|"):
                self.advance()
                ctor = self.eat_name("constructor")
                surface, core = self.eat_binder(env)
                self.eat_sym("=>")
                body = self.parse_expr(
                    env | {surface: (core, self._branch_type(env, scrut, ctor))})
                branches.append((ctor, core, body))
            self.eat_kw("end")
            seen = [c for c, _, _ in branches]
            if len(set(seen)) != len(seen):
                self.error(f"duplicate branch constructor: {seen}")
            return MatchVariant(scrut, tuple(branches))
        self.error("expected '(' or '|' after 'with'")

    def _parse_match_tuple_body(self, env, scrut, binders, core_names) -> Term:
        # binder types come from the scrutinee's product type
        try:
            scrut_ty = typecheck.infer(self._context(env), scrut)
        except typecheck.TypeMismatch as e:
            raise ParseError(self.cur.line, self.cur.col,
                             f"cannot type match scrutinee: {e}") from e
        if not isinstance(scrut_ty, Prod) or len(scrut_ty.items) != len(binders):
            self.error("tuple match shape does not fit scrutinee type")
        inner_env = dict(env)
        for surface, core, ty in zip(binders, core_names, scrut_ty.items):
            inner_env[surface] = (core, ty)
        return self.parse_expr(inner_env)

    def _branch_type(self, env, scrut, ctor) -> Type:
        try:
            scrut_ty = typecheck.infer(self._context(env), scrut)
        except typecheck.TypeMismatch as e:
            raise ParseError(self.cur.line, self.cur.col,
                             f"cannot type match scrutinee: {e}") from e
        if not isinstance(scrut_ty, Variant):
            self.error("variant match on non-variant scrutinee")
        ty = scrut_ty.case_type(ctor)
        if ty is None:
            self.error(f"constructor {ctor} not in scrutinee variant")
        return ty

    def parse_inj(self, env: dict) -> Term:
        self.eat_kw("inj")
        ctor = self.eat_name("constructor")
        payload = self.parse_atom(env)
        self.eat_kw("as")
        ty = self.parse_type()
        if not isinstance(ty, Variant):
            self.error("inj annotation must be a variant type")
        return Inject(ty, ctor, payload)

    def parse_fold(self, env: dict) -> Term:
        self.eat_kw("fold")
        self.eat_sym("(")
        h_surface, h_core = self.eat_binder(env)
        self.eat_sym(",")
        a_surface, a_core = self.eat_binder(env | {h_surface: (h_core, REAL)})
        self.eat_sym("=>")
        # binder types become known once `over` and `from` are parsed, but
        # the step body may need them for inner lets; parse the pieces in
        # source order by deferring the step with a token bookmark
        step_start = self.pos
        self._skip_expr(env | {h_surface: (h_core, REAL),
                               a_surface: (a_core, REAL)})
        self.eat_sym(")")
        self.eat_kw("over")
        over = self.parse_expr(env)
        self.eat_kw("from")
        base = self.parse_expr(env)
        try:
            ctx = self._context(env)
            over_ty = typecheck.infer(ctx, over)
            base_ty = typecheck.infer(ctx, base)
        except typecheck.TypeMismatch as e:
            raise ParseError(self.cur.line, self.cur.col,
                             f"cannot type fold operands: {e}") from e
        if not isinstance(over_ty, ListOf):
            self.error("fold over non-list")
        end = self.pos
        self.pos = step_start
        step = self.parse_expr(env | {h_surface: (h_core, over_ty.elem),
                                      a_surface: (a_core, base_ty)})
        self.pos = end
        return Fold(h_core, a_core, step, over, base)

    def _skip_expr(self, env: dict) -> None:
        """Parse an expression only to find where it ends."""
        self.parse_expr(env)

    def parse_additive(self, env: dict) -> Term:
        t = self.parse_mult(env)
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            u = self.parse_mult(env)
            if op == "+":
                t = Prim("add", (t, u))
            else:
                t = Prim("add", (t, Prim("mul", (Const(-1.0), u))))
        return t

    def parse_mult(self, env: dict) -> Term:
        t = self.parse_app(env)
        while self.at_sym("*"):
            self.advance()
            t = Prim("mul", (t, self.parse_app(env)))
        return t

    def _starts_atom(self) -> bool:
        tok = self.cur
        if tok.kind == "num":
            return True
        if tok.kind == "sym":
            return tok.text == "("
        if tok.kind == "id":
            return tok.text not in KEYWORDS or tok.text in ("nil", "cons")
        return False

    def parse_app(self, env: dict) -> Term:
        t = self.parse_atom(env)
        while self._starts_atom():
            t = App(t, self.parse_atom(env))
        return t

    def parse_atom(self, env: dict) -> Term:
        tok = self.cur
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text))
        if self.at_kw("nil"):
            self.advance()
            self.eat_sym("[")
            ty = self.parse_type()
            self.eat_sym("]")
            return Nil(ty)
        if self.at_kw("cons"):
            self.advance()
            self.eat_sym("(")
            head = self.parse_expr(env)
            self.eat_sym(",")
            tail = self.parse_expr(env)
            self.eat_sym(")")
            return Cons(head, tail)
        if tok.kind == "id":
            name = tok.text
            if name in KEYWORDS:
                self.error(f"unexpected keyword {name!r}")
            if name in OPS:
                self.advance()
                self.eat_sym("(")
                args = [self.parse_expr(env)]
                while self.at_sym(","):
                    self.advance()
                    args.append(self.parse_expr(env))
                self.eat_sym(")")
                sig = OPS[name]
                if len(args) != sig.arity:
                    self.error(f"{name} expects {sig.arity} arguments, "
                               f"got {len(args)}", tok)
                return Prim(name, tuple(args))
            self.advance()
            if name in env:
                return Var(env[name][0])
            if name in self.defs:
                return self.defs[name][0]
            if FreshNames.is_reserved(name):
                self.error(f"name {name!r} is reserved for generated binders",
                           tok)
            return Var(name)
        if self.at_sym("("):
            self.advance()
            if self.at_sym(")"):
                self.advance()
                return Tuple(())
            if self.at_sym("-"):
                self.advance()
                num = self.cur
                if num.kind != "num":
                    self.error("expected a number after '-'")
                self.advance()
                self.eat_sym(")")
                return Const(-float(num.text))
            first = self.parse_expr(env)
            if self.at_sym(")"):
                self.advance()
                return first  # grouping
            items = [first]
            while self.at_sym(","):
                self.advance()
                if self.at_sym(")"):
                    break
                items.append(self.parse_expr(env))
            self.eat_sym(")")
            return Tuple(tuple(items))
        self.error(f"expected a term, found {tok.text!r}")

    # -- units

    def parse_unit(self) -> SourceUnit:
        defs: list[Definition] = []
        while self.at_kw("def"):
            self.advance()
            tok = self.cur
            name = self.eat_name("definition name")
            if name in self.defs:
                self.error(f"duplicate definition {name!r}", tok)
            self.eat_sym(":")
            declared = self.parse_type()
            self.eat_sym("=")
            body = self.parse_expr({})
            defs.append(Definition(name, declared, body))
            self.defs[name] = (body, declared)
        main = None
        if not self.cur.kind == "eof":
            if self.at_kw("main"):
                self.advance()
                self.eat_sym("=")
            main = self.parse_expr({})
        if self.cur.kind != "eof":
            self.error(f"unexpected input after unit: {self.cur.text!r}")
        return SourceUnit(tuple(defs), main)


def parse(source: str) -> SourceUnit:
    """Parse a source unit; raises ParseError (or TypeMismatch from
    desugaring `let`/`match`/`fold` operand typing)."""
    return _Parser(tokenize(source)).parse_unit()


def parse_term_text(source: str) -> Term:
    """Parse a single term with no definitions in scope."""
    parser = _Parser(tokenize(source))
    term = parser.parse_expr({})
    if parser.cur.kind != "eof":
        parser.error(f"unexpected input after term: {parser.cur.text!r}")
    return term


# ---------------------------------------------------------------------------
# Rendering

def render(unit: SourceUnit) -> str:
    from .terms import pretty, type_to_str
    blocks = []
    for d in unit.defs:
        blocks.append(f"def {d.name} : {type_to_str(d.declared)} =\n"
                      f"  {pretty(d.body)}\n")
    if unit.main is not None:
        blocks.append(f"main = {pretty(unit.main)}\n")
    return "\n".join(blocks)
