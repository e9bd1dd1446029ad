"""Call-by-value interpreter and value utilities.

Evaluation of a well-typed closed term always terminates (the language
is total) and produces a value matching the term's type.  IEEE infinities
and NaNs propagate silently through primitive operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ops import op_sig
from .terms import (App, Cons, Const, Fold, Inject, Lam, ListOf, MatchTuple,
                    MatchVariant, Nil, Prim, Term, Tuple, Type, Var)


class Value:
    pass


@dataclass(frozen=True)
class VReal(Value):
    val: float


@dataclass(frozen=True)
class VTuple(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class VClosure(Value):
    var: str
    body: Term
    env: dict

    def __eq__(self, other):  # closures have no useful equality
        return self is other

    def __hash__(self):
        return id(self)


@dataclass(frozen=True)
class VTag(Value):
    variant: Type
    ctor: str
    payload: Value


@dataclass(frozen=True)
class VList(Value):
    elem: Type
    items: tuple[Value, ...]


class EvalError(Exception):
    """Internal failure: unreachable on typechecked closed input."""


def eval_term(env: dict, t: Term) -> Value:
    match t:
        case Var(name):
            try:
                return env[name]
            except KeyError:
                raise EvalError(f"unbound variable {name}") from None
        case Const(v):
            return VReal(v)
        case Prim(op, args):
            sig = op_sig(op)
            xs = []
            for a in args:
                v = eval_term(env, a)
                if not isinstance(v, VReal):
                    raise EvalError(f"{op} applied to non-real {v!r}")
                xs.append(v.val)
            return VReal(sig.fn(*xs))
        case Lam(var, _, body):
            return VClosure(var, body, env)
        case App(fn, arg):
            fnv = eval_term(env, fn)
            argv = eval_term(env, arg)
            return apply(fnv, argv)
        case Tuple(items):
            return VTuple(tuple(eval_term(env, a) for a in items))
        case MatchTuple(scrut, names, body):
            sv = eval_term(env, scrut)
            if not isinstance(sv, VTuple) or len(sv.items) != len(names):
                raise EvalError(f"tuple match shape mismatch: {sv!r}")
            inner = dict(env)
            for n, v in zip(names, sv.items):
                inner[n] = v
            return eval_term(inner, body)
        case Inject(vt, ctor, payload):
            return VTag(vt, ctor, eval_term(env, payload))
        case MatchVariant(scrut, branches):
            sv = eval_term(env, scrut)
            if not isinstance(sv, VTag):
                raise EvalError(f"variant match on non-tag: {sv!r}")
            for ctor, var, body in branches:
                if ctor == sv.ctor:
                    return eval_term(env | {var: sv.payload}, body)
            raise EvalError(f"no branch for constructor {sv.ctor}")
        case Nil(elem):
            return VList(elem, ())
        case Cons(head, tail):
            hv = eval_term(env, head)
            tv = eval_term(env, tail)
            if not isinstance(tv, VList):
                raise EvalError(f"cons onto non-list: {tv!r}")
            return VList(tv.elem, (hv,) + tv.items)
        case Fold(hv_name, av_name, step, over, base):
            lv = eval_term(env, over)
            if not isinstance(lv, VList):
                raise EvalError(f"fold over non-list: {lv!r}")
            acc = eval_term(env, base)
            for item in reversed(lv.items):  # right fold
                acc = eval_term(env | {hv_name: item, av_name: acc}, step)
            return acc
    raise EvalError(f"not a Term: {t!r}")


def apply(fnv: Value, argv: Value) -> Value:
    if not isinstance(fnv, VClosure):
        raise EvalError(f"application of non-closure: {fnv!r}")
    return eval_term(fnv.env | {fnv.var: argv}, fnv.body)


# ---------------------------------------------------------------------------
# Real slots: addressing the real-number positions of closure-free values.
# A path is a tuple of steps; a step is an int (tuple/list index) or a
# constructor name (descending into a tag payload).

Path = tuple

def real_slots(v: Value) -> list[Path]:
    """Left-to-right depth-first paths of every real in v (closure-free)."""
    out: list[Path] = []
    _walk_slots(v, (), out)
    return out


def _walk_slots(v: Value, path: Path, out: list[Path]) -> None:
    match v:
        case VReal():
            out.append(path)
        case VTuple(items):
            for i, item in enumerate(items):
                _walk_slots(item, path + (i,), out)
        case VTag(_, ctor, payload):
            _walk_slots(payload, path + (ctor,), out)
        case VList(_, items):
            for i, item in enumerate(items):
                _walk_slots(item, path + (i,), out)
        case VClosure():
            raise EvalError("real_slots: closure encountered")
        case _:
            raise EvalError(f"not a Value: {v!r}")


def path_str(path: Path) -> str:
    if not path:
        return "."
    return "." + ".".join(str(s) for s in path)


def get_slot(v: Value, path: Path) -> float:
    match v:
        case VReal(x):
            if path:
                raise EvalError(f"path too long at real: {path}")
            return x
        case VTuple(items) | VList(_, items):
            return get_slot(items[path[0]], path[1:])
        case VTag(_, ctor, payload):
            if path[0] != ctor:
                raise EvalError(f"path {path} does not match tag {ctor}")
            return get_slot(payload, path[1:])
    raise EvalError(f"bad slot path {path} in {v!r}")


def update_slot(v: Value, path: Path, x: float) -> Value:
    """v with the real at path replaced by x; structure preserved."""
    match v:
        case VReal():
            if path:
                raise EvalError(f"path too long at real: {path}")
            return VReal(x)
        case VTuple(items):
            i = path[0]
            return VTuple(items[:i] + (update_slot(items[i], path[1:], x),)
                          + items[i + 1:])
        case VList(elem, items):
            i = path[0]
            return VList(elem, items[:i]
                         + (update_slot(items[i], path[1:], x),)
                         + items[i + 1:])
        case VTag(vt, ctor, payload):
            if path[0] != ctor:
                raise EvalError(f"path {path} does not match tag {ctor}")
            return VTag(vt, ctor, update_slot(payload, path[1:], x))
    raise EvalError(f"bad slot path {path} in {v!r}")


def with_tangents(v: Value, k: int, assignment) -> Value:
    """Attach k-wide tangents: each real r at path p becomes the dual value
    (r, assignment[p]) where the tangent is bare for k = 1 and a k-tuple
    otherwise.  assignment maps every slot path to a k-sequence of reals.
    """
    return _attach(v, k, assignment, ())


def _attach(v: Value, k: int, assignment, path: Path) -> Value:
    match v:
        case VReal():
            try:
                ts = assignment[path]
            except KeyError:
                raise EvalError(f"no tangent assigned to slot {path_str(path)}") \
                    from None
            if len(ts) != k:
                raise EvalError(f"tangent at {path_str(path)} has width "
                                f"{len(ts)}, expected {k}")
            if k == 1:
                return VTuple((v, VReal(ts[0])))
            return VTuple((v, VTuple(tuple(VReal(t) for t in ts))))
        case VTuple(items):
            return VTuple(tuple(_attach(a, k, assignment, path + (i,))
                                for i, a in enumerate(items)))
        case VTag(vt, ctor, payload):
            return VTag(vt, ctor, _attach(payload, k, assignment, path + (ctor,)))
        case VList(elem, items):
            # the element type of the attached list is not tracked; callers
            # that need it work type-directed (see harness.collect_duals)
            return VList(elem, tuple(_attach(a, k, assignment, path + (i,))
                                     for i, a in enumerate(items)))
        case VClosure():
            raise EvalError("with_tangents: closure encountered")
    raise EvalError(f"not a Value: {v!r}")


def one_hot(slots: list[Path]) -> dict[Path, tuple[float, ...]]:
    """Basis-vector tangent assignment: slot i gets e_i of width len(slots)."""
    k = len(slots)
    return {p: tuple(1.0 if j == i else 0.0 for j in range(k))
            for i, p in enumerate(slots)}


def values_equal_bits(a: Value, b: Value) -> bool:
    """Structural equality with bit-level float comparison."""
    if type(a) is not type(b):
        return False
    match a, b:
        case VReal(x), VReal(y):
            if math.isnan(x) or math.isnan(y):
                return math.isnan(x) and math.isnan(y)
            return x == y and math.copysign(1.0, x) == math.copysign(1.0, y)
        case VTuple(xs), VTuple(ys):
            return len(xs) == len(ys) and all(
                values_equal_bits(p, q) for p, q in zip(xs, ys))
        case VTag(vt1, c1, p1), VTag(vt2, c2, p2):
            return vt1 == vt2 and c1 == c2 and values_equal_bits(p1, p2)
        case VList(e1, xs), VList(e2, ys):
            return e1 == e2 and len(xs) == len(ys) and all(
                values_equal_bits(p, q) for p, q in zip(xs, ys))
        case VClosure(), VClosure():
            return a is b
    return False
