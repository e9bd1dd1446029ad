"""Object-language syntax: types, terms, contexts, substitution, printing.

Everything here is immutable.  Terms use named variables; shadowing is
eliminated by the parser, and all operations that invent binders draw
from the global fresh-name supply, whose names live in a reserved
namespace (leading underscore) that the parser keeps user code out of.
"""

from __future__ import annotations

import itertools
import sys
import threading
from dataclasses import dataclass

# Macro output and the evaluator recurse over deeply nested terms.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))


# ---------------------------------------------------------------------------
# Types

class Type:
    pass


@dataclass(frozen=True)
class Real(Type):
    pass


@dataclass(frozen=True)
class Prod(Type):
    items: tuple[Type, ...]


@dataclass(frozen=True)
class Arrow(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class Variant(Type):
    cases: tuple[tuple[str, Type], ...]

    def __post_init__(self):
        names = [c for c, _ in self.cases]
        if not names:
            raise ValueError("variant needs at least one constructor")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate constructor in variant: {names}")

    def case_type(self, ctor: str) -> Type | None:
        for name, ty in self.cases:
            if name == ctor:
                return ty
        return None


@dataclass(frozen=True)
class ListOf(Type):
    elem: Type


REAL = Real()
UNIT = Prod(())


def is_first_order(ty: Type) -> bool:
    """True iff ty contains no function arrows."""
    match ty:
        case Real():
            return True
        case Prod(items):
            return all(is_first_order(t) for t in items)
        case Arrow():
            return False
        case Variant(cases):
            return all(is_first_order(t) for _, t in cases)
        case ListOf(elem):
            return is_first_order(elem)
    raise TypeError(f"not a Type: {ty!r}")


# ---------------------------------------------------------------------------
# Terms

class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    value: float


@dataclass(frozen=True)
class Prim(Term):
    op: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Lam(Term):
    var: str
    var_type: Type
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Tuple(Term):
    items: tuple[Term, ...]


@dataclass(frozen=True)
class MatchTuple(Term):
    scrutinee: Term
    names: tuple[str, ...]
    body: Term


@dataclass(frozen=True)
class Inject(Term):
    variant: Type
    ctor: str
    payload: Term


@dataclass(frozen=True)
class MatchVariant(Term):
    scrutinee: Term
    branches: tuple[tuple[str, str, Term], ...]  # (ctor, var, body)

    def __post_init__(self):
        names = [c for c, _, _ in self.branches]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate branch constructor: {names}")


@dataclass(frozen=True)
class Nil(Term):
    elem: Type


@dataclass(frozen=True)
class Cons(Term):
    head: Term
    tail: Term


@dataclass(frozen=True)
class Fold(Term):
    head_var: str
    acc_var: str
    step: Term
    over: Term
    base: Term


# ---------------------------------------------------------------------------
# Contexts

class Context:
    """Ordered typing context with distinct names.

    Extension with an existing name replaces the binding (the innermost
    binder wins), which keeps inference sane even for hand-built terms
    that shadow.
    """

    __slots__ = ("_entries", "_index")

    def __init__(self, entries: tuple[tuple[str, Type], ...] = ()):
        self._entries = entries
        self._index = {name: ty for name, ty in entries}

    @property
    def entries(self) -> tuple[tuple[str, Type], ...]:
        return self._entries

    def lookup(self, name: str) -> Type | None:
        return self._index.get(name)

    def extend(self, name: str, ty: Type) -> "Context":
        kept = tuple((n, t) for n, t in self._entries if n != name)
        return Context(kept + ((name, ty),))

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        inner = ", ".join(f"{n}: {type_to_str(t)}" for n, t in self._entries)
        return f"Context({inner})"


# ---------------------------------------------------------------------------
# Fresh names

class FreshNames:
    """Monotone counter of generated names; safe for concurrent draws."""

    RESERVED_PREFIX = "_"

    def __init__(self):
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def fresh(self, hint: str = "v") -> str:
        with self._lock:
            n = next(self._counter)
        hint = hint.lstrip("_") or "v"
        return f"_{hint}{n}"

    def reset(self) -> None:
        with self._lock:
            self._counter = itertools.count(1)

    @classmethod
    def is_reserved(cls, name: str) -> bool:
        return name.startswith(cls.RESERVED_PREFIX)


FRESH = FreshNames()


def fresh(hint: str = "v") -> str:
    return FRESH.fresh(hint)


# ---------------------------------------------------------------------------
# Free variables

def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Const():
            return frozenset()
        case Prim(_, args):
            out: frozenset[str] = frozenset()
            for a in args:
                out |= free_vars(a)
            return out
        case Lam(var, _, body):
            return free_vars(body) - {var}
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case Tuple(items):
            out = frozenset()
            for a in items:
                out |= free_vars(a)
            return out
        case MatchTuple(scrut, names, body):
            return free_vars(scrut) | (free_vars(body) - set(names))
        case Inject(_, _, payload):
            return free_vars(payload)
        case MatchVariant(scrut, branches):
            out = free_vars(scrut)
            for _, var, body in branches:
                out |= free_vars(body) - {var}
            return out
        case Nil():
            return frozenset()
        case Cons(head, tail):
            return free_vars(head) | free_vars(tail)
        case Fold(hv, av, step, over, base):
            return (free_vars(step) - {hv, av}) | free_vars(over) | free_vars(base)
    raise TypeError(f"not a Term: {t!r}")


# ---------------------------------------------------------------------------
# Capture-avoiding substitution

def subst(t: Term, name: str, repl: Term) -> Term:
    """t with free occurrences of name replaced by repl, capture-avoiding."""
    return _subst(t, name, repl, free_vars(repl))


def _rename_binder(var: str, bodies: list[Term], name: str, repl_fvs: frozenset[str]):
    """Decide whether binder var must be renamed before substituting under it.

    Returns (new_var, renamed_bodies).  Renaming is needed exactly when the
    substitution will go under the binder and the binder would capture a
    free variable of the replacement.
    """
    if var in repl_fvs and any(name in free_vars(b) for b in bodies):
        new = fresh(var)
        return new, [subst(b, var, Var(new)) for b in bodies]
    return var, bodies


def _subst(t: Term, name: str, repl: Term, repl_fvs: frozenset[str]) -> Term:
    match t:
        case Var(n):
            return repl if n == name else t
        case Const():
            return t
        case Prim(op, args):
            return Prim(op, tuple(_subst(a, name, repl, repl_fvs) for a in args))
        case Lam(var, ty, body):
            if var == name:
                return t
            var, [body] = _rename_binder(var, [body], name, repl_fvs)
            return Lam(var, ty, _subst(body, name, repl, repl_fvs))
        case App(fn, arg):
            return App(_subst(fn, name, repl, repl_fvs),
                       _subst(arg, name, repl, repl_fvs))
        case Tuple(items):
            return Tuple(tuple(_subst(a, name, repl, repl_fvs) for a in items))
        case MatchTuple(scrut, names, body):
            scrut = _subst(scrut, name, repl, repl_fvs)
            if name in names:
                return MatchTuple(scrut, names, body)
            new_names = []
            for var in names:
                var, [body] = _rename_binder(var, [body], name, repl_fvs)
                new_names.append(var)
            return MatchTuple(scrut, tuple(new_names),
                              _subst(body, name, repl, repl_fvs))
        case Inject(vt, ctor, payload):
            return Inject(vt, ctor, _subst(payload, name, repl, repl_fvs))
        case MatchVariant(scrut, branches):
            scrut = _subst(scrut, name, repl, repl_fvs)
            out = []
            for ctor, var, body in branches:
                if var == name:
                    out.append((ctor, var, body))
                    continue
                var, [body] = _rename_binder(var, [body], name, repl_fvs)
                out.append((ctor, var, _subst(body, name, repl, repl_fvs)))
            return MatchVariant(scrut, tuple(out))
        case Nil():
            return t
        case Cons(head, tail):
            return Cons(_subst(head, name, repl, repl_fvs),
                        _subst(tail, name, repl, repl_fvs))
        case Fold(hv, av, step, over, base):
            over = _subst(over, name, repl, repl_fvs)
            base = _subst(base, name, repl, repl_fvs)
            if name in (hv, av):
                return Fold(hv, av, step, over, base)
            hv, [step] = _rename_binder(hv, [step], name, repl_fvs)
            av, [step] = _rename_binder(av, [step], name, repl_fvs)
            return Fold(hv, av, _subst(step, name, repl, repl_fvs), over, base)
    raise TypeError(f"not a Term: {t!r}")


# ---------------------------------------------------------------------------
# Alpha equivalence

def alpha_eq(t: Term, u: Term) -> bool:
    """True iff t and u agree up to consistent renaming of bound variables."""
    return _alpha(t, u, {}, {}, 0)


def _const_eq(a: float, b: float) -> bool:
    # Literals are syntax: distinguish 0.0 from -0.0, identify nan with nan.
    return repr(a) == repr(b)


def _alpha(t: Term, u: Term, env_t: dict, env_u: dict, depth: int) -> bool:
    if type(t) is not type(u):
        return False
    match t, u:
        case Var(a), Var(b):
            da, db = env_t.get(a), env_u.get(b)
            if da is None and db is None:
                return a == b
            return da == db
        case Const(a), Const(b):
            return _const_eq(a, b)
        case Prim(op1, args1), Prim(op2, args2):
            return (op1 == op2 and len(args1) == len(args2)
                    and all(_alpha(a, b, env_t, env_u, depth)
                            for a, b in zip(args1, args2)))
        case Lam(v1, ty1, b1), Lam(v2, ty2, b2):
            if ty1 != ty2:
                return False
            return _alpha(b1, b2, env_t | {v1: depth}, env_u | {v2: depth},
                          depth + 1)
        case App(f1, a1), App(f2, a2):
            return (_alpha(f1, f2, env_t, env_u, depth)
                    and _alpha(a1, a2, env_t, env_u, depth))
        case Tuple(xs), Tuple(ys):
            return len(xs) == len(ys) and all(
                _alpha(a, b, env_t, env_u, depth) for a, b in zip(xs, ys))
        case MatchTuple(s1, n1, b1), MatchTuple(s2, n2, b2):
            if len(n1) != len(n2):
                return False
            if not _alpha(s1, s2, env_t, env_u, depth):
                return False
            et = env_t | {v: depth + i for i, v in enumerate(n1)}
            eu = env_u | {v: depth + i for i, v in enumerate(n2)}
            return _alpha(b1, b2, et, eu, depth + len(n1))
        case Inject(vt1, c1, p1), Inject(vt2, c2, p2):
            return (vt1 == vt2 and c1 == c2
                    and _alpha(p1, p2, env_t, env_u, depth))
        case MatchVariant(s1, br1), MatchVariant(s2, br2):
            if len(br1) != len(br2):
                return False
            if not _alpha(s1, s2, env_t, env_u, depth):
                return False
            for (c1, v1, b1), (c2, v2, b2) in zip(br1, br2):
                if c1 != c2:
                    return False
                if not _alpha(b1, b2, env_t | {v1: depth},
                              env_u | {v2: depth}, depth + 1):
                    return False
            return True
        case Nil(e1), Nil(e2):
            return e1 == e2
        case Cons(h1, t1), Cons(h2, t2):
            return (_alpha(h1, h2, env_t, env_u, depth)
                    and _alpha(t1, t2, env_t, env_u, depth))
        case Fold(h1, a1, s1, o1, b1), Fold(h2, a2, s2, o2, b2):
            if not _alpha(o1, o2, env_t, env_u, depth):
                return False
            if not _alpha(b1, b2, env_t, env_u, depth):
                return False
            et = env_t | {h1: depth, a1: depth + 1}
            eu = env_u | {h2: depth, a2: depth + 1}
            return _alpha(s1, s2, et, eu, depth + 2)
    return False


# ---------------------------------------------------------------------------
# Printing (re-parseable concrete syntax; the parser lives in syntax.py)

def format_real(v: float) -> str:
    """Shortest decimal that round-trips; negative literals get parens."""
    s = repr(v)
    return f"({s})" if s.startswith("-") else s


def type_to_str(ty: Type) -> str:
    match ty:
        case Real():
            return "real"
        case Prod(items):
            if len(items) == 1:
                return f"({type_to_str(items[0])},)"
            return "(" + ", ".join(type_to_str(t) for t in items) + ")"
        case Arrow(dom, cod):
            d = type_to_str(dom)
            if isinstance(dom, Arrow):
                d = f"({d})"
            return f"{d} -> {type_to_str(cod)}"
        case Variant(cases):
            inner = " | ".join(f"{c}: {type_to_str(t)}" for c, t in cases)
            return f"< {inner} >"
        case ListOf(elem):
            e = type_to_str(elem)
            if isinstance(elem, (Arrow, ListOf)):
                e = f"({e})"
            return f"list {e}"
    raise TypeError(f"not a Type: {ty!r}")


# Precedence levels used by pretty: 0 open keyword forms, 1 additive,
# 2 multiplicative, 3 application, 4 atoms.
_LEVEL_OPEN, _LEVEL_ADD, _LEVEL_MUL, _LEVEL_APP, _LEVEL_ATOM = range(5)


def pretty(t: Term) -> str:
    """Concrete syntax for t; parses back to an alpha-equal term."""
    return _pretty(t, _LEVEL_OPEN)


def _wrap(s: str, level: int, minimum: int) -> str:
    return f"({s})" if level < minimum else s


def _pretty(t: Term, minimum: int) -> str:
    match t:
        case Var(name):
            return name
        case Const(v):
            return format_real(v)
        case Prim("add", (a, b)):
            s = f"{_pretty(a, _LEVEL_ADD)} + {_pretty(b, _LEVEL_MUL)}"
            return _wrap(s, _LEVEL_ADD, minimum)
        case Prim("mul", (a, b)):
            s = f"{_pretty(a, _LEVEL_MUL)} * {_pretty(b, _LEVEL_APP)}"
            return _wrap(s, _LEVEL_MUL, minimum)
        case Prim(op, args):
            inner = ", ".join(_pretty(a, _LEVEL_OPEN) for a in args)
            return f"{op}({inner})"
        case Lam(var, ty, body):
            s = f"fun ({var} : {type_to_str(ty)}) => {_pretty(body, _LEVEL_OPEN)}"
            return _wrap(s, _LEVEL_OPEN, minimum)
        case App(fn, arg):
            s = f"{_pretty(fn, _LEVEL_APP)} {_pretty(arg, _LEVEL_ATOM)}"
            return _wrap(s, _LEVEL_APP, minimum)
        case Tuple(items):
            if len(items) == 1:
                return f"({_pretty(items[0], _LEVEL_OPEN)},)"
            return "(" + ", ".join(_pretty(a, _LEVEL_OPEN) for a in items) + ")"
        case MatchTuple(scrut, names, body):
            s = (f"match {_pretty(scrut, _LEVEL_ADD)} with "
                 f"({', '.join(names)}) => {_pretty(body, _LEVEL_OPEN)}")
            return _wrap(s, _LEVEL_OPEN, minimum)
        case Inject(vt, ctor, payload):
            s = (f"inj {ctor} {_pretty(payload, _LEVEL_ATOM)} "
                 f"as {type_to_str(vt)}")
            return _wrap(s, _LEVEL_OPEN, minimum)
        case MatchVariant(scrut, branches):
            bs = " ".join(
                f"| {c} {v} => {_pretty(b, _LEVEL_OPEN)}"
                for c, v, b in branches)
            s = f"match {_pretty(scrut, _LEVEL_ADD)} with {bs} end"
            return _wrap(s, _LEVEL_OPEN, minimum)
        case Nil(elem):
            return f"nil[{type_to_str(elem)}]"
        case Cons(head, tail):
            return (f"cons({_pretty(head, _LEVEL_OPEN)}, "
                    f"{_pretty(tail, _LEVEL_OPEN)})")
        case Fold(hv, av, step, over, base):
            s = (f"fold ({hv}, {av} => {_pretty(step, _LEVEL_OPEN)}) "
                 f"over {_pretty(over, _LEVEL_ADD)} "
                 f"from {_pretty(base, _LEVEL_OPEN)}")
            return _wrap(s, _LEVEL_OPEN, minimum)
    raise TypeError(f"not a Term: {t!r}")
