"""Registry of smooth n-ary primitives and their partial-derivative builders.

Each operation carries its numeric semantics (used by the evaluator and
the finite-difference oracle alike) and, per argument, a builder that
produces a term denoting the partial derivative at the given argument
terms.  Division follows IEEE-754 at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .terms import Const, Prim, Term


def add_t(a: Term, b: Term) -> Term:
    return Prim("add", (a, b))


def mul_t(a: Term, b: Term) -> Term:
    return Prim("mul", (a, b))


def sub_t(a: Term, b: Term) -> Term:
    # t - u is sugar for t + (-1) * u
    return add_t(a, mul_t(Const(-1.0), b))


def sum_t(parts: Sequence[Term]) -> Term:
    acc = parts[0]
    for p in parts[1:]:
        acc = add_t(acc, p)
    return acc


@dataclass(frozen=True)
class OpSig:
    name: str
    arity: int
    fn: Callable[..., float]
    # partials[i](args) builds a term for the i-th partial derivative;
    # applied to real-typed variables it must be typable as real.
    partials: tuple[Callable[[tuple[Term, ...]], Term], ...]

    def __post_init__(self):
        if self.arity < 1 or len(self.partials) != self.arity:
            raise ValueError(f"bad signature for op {self.name}")


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _ieee_div(a: float, b: float) -> float:
    if b != 0.0:
        return a / b
    if a == 0.0 or math.isnan(a):
        return math.nan
    return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _sigmoid_partial(args):
    (x,) = args
    s = Prim("sigmoid", (x,))
    return mul_t(s, sub_t(Const(1.0), Prim("sigmoid", (x,))))


OPS: dict[str, OpSig] = {
    op.name: op
    for op in (
        OpSig("add", 2, lambda a, b: a + b,
              (lambda args: Const(1.0), lambda args: Const(1.0))),
        OpSig("mul", 2, lambda a, b: a * b,
              (lambda args: args[1], lambda args: args[0])),
        OpSig("sigmoid", 1, sigmoid, (_sigmoid_partial,)),
        OpSig("neg", 1, lambda a: -a, (lambda args: Const(-1.0),)),
        OpSig("exp", 1, _exp, (lambda args: Prim("exp", (args[0],)),)),
        OpSig("sin", 1, math.sin, (lambda args: Prim("cos", (args[0],)),)),
        OpSig("cos", 1, math.cos,
              (lambda args: Prim("neg", (Prim("sin", (args[0],)),)),)),
        OpSig("div", 2, _ieee_div,
              (lambda args: Prim("div", (Const(1.0), args[1])),
               lambda args: Prim("div", (Prim("neg", (args[0],)),
                                         mul_t(args[1], args[1]))))),
    )
}


class UnknownOp(Exception):
    def __init__(self, name: str):
        super().__init__(f"unknown operation: {name}")
        self.name = name


def op_sig(name: str) -> OpSig:
    try:
        return OPS[name]
    except KeyError:
        raise UnknownOp(name) from None
