"""Syntax-directed typechecker.

All binders are annotated, so inference needs no unification: every term
has at most one type in a given context.  Type equality is structural,
including variant case order.

Errors carry a path from the root to the offending subterm.  Path steps
are child indices in a fixed order per former: App(fn=0, arg=1),
Prim/Tuple by argument position, Lam(body=0), MatchTuple(scrutinee=0,
body=1), Inject(payload=0), MatchVariant(scrutinee=0, branch i body=i+1),
Cons(head=0, tail=1), Fold(step=0, over=1, base=2).
"""

from __future__ import annotations

from .ops import OPS
from .terms import (App, Arrow, Cons, Const, Context, Fold, Inject, Lam,
                    ListOf, MatchTuple, MatchVariant, Nil, Prim, Prod, Real,
                    REAL, Term, Tuple, Type, Var, Variant, type_to_str)


class TypeMismatch(Exception):
    """Typechecking failure at a located subterm."""

    def __init__(self, path: tuple[int, ...], message: str,
                 expected: Type | str | None = None,
                 found: Type | None = None):
        self.path = path
        self.message = message
        self.expected = expected
        self.found = found
        loc = "." + ".".join(str(p) for p in path) if path else "root"
        detail = message
        if expected is not None:
            want = expected if isinstance(expected, str) else type_to_str(expected)
            detail += f" (expected {want}"
            if found is not None:
                detail += f", found {type_to_str(found)}"
            detail += ")"
        elif found is not None:
            detail += f" (found {type_to_str(found)})"
        super().__init__(f"type error at {loc}: {detail}")


def infer(ctx: Context, t: Term) -> Type:
    """The unique type of t in ctx, or raise TypeMismatch."""
    return _infer(ctx, t, ())


def _expect(path, got: Type, want: Type, what: str):
    if got != want:
        raise TypeMismatch(path, what, expected=want, found=got)


def _infer(ctx: Context, t: Term, path: tuple[int, ...]) -> Type:
    match t:
        case Var(name):
            ty = ctx.lookup(name)
            if ty is None:
                raise TypeMismatch(path, f"unbound variable {name}")
            return ty
        case Const():
            return REAL
        case Prim(op, args):
            sig = OPS.get(op)
            if sig is None:
                raise TypeMismatch(path, f"unknown operation {op}")
            if len(args) != sig.arity:
                raise TypeMismatch(
                    path, f"{op} expects {sig.arity} arguments, got {len(args)}")
            for i, a in enumerate(args):
                _expect(path + (i,), _infer(ctx, a, path + (i,)), REAL,
                        f"argument of {op}")
            return REAL
        case Lam(var, ty, body):
            return Arrow(ty, _infer(ctx.extend(var, ty), body, path + (0,)))
        case App(fn, arg):
            fn_ty = _infer(ctx, fn, path + (0,))
            if not isinstance(fn_ty, Arrow):
                raise TypeMismatch(path + (0,), "non-arrow applied",
                                   expected="a function type", found=fn_ty)
            arg_ty = _infer(ctx, arg, path + (1,))
            _expect(path + (1,), arg_ty, fn_ty.dom, "function argument")
            return fn_ty.cod
        case Tuple(items):
            return Prod(tuple(_infer(ctx, a, path + (i,))
                              for i, a in enumerate(items)))
        case MatchTuple(scrut, names, body):
            scrut_ty = _infer(ctx, scrut, path + (0,))
            if not isinstance(scrut_ty, Prod):
                raise TypeMismatch(path + (0,), "tuple match on non-product",
                                   expected="a product type", found=scrut_ty)
            if len(scrut_ty.items) != len(names):
                raise TypeMismatch(
                    path, f"tuple match binds {len(names)} names but "
                          f"scrutinee has width {len(scrut_ty.items)}",
                    found=scrut_ty)
            inner = ctx
            for var, ty in zip(names, scrut_ty.items):
                inner = inner.extend(var, ty)
            return _infer(inner, body, path + (1,))
        case Inject(vt, ctor, payload):
            if not isinstance(vt, Variant):
                raise TypeMismatch(path, "inj annotation is not a variant type",
                                   found=vt)
            case_ty = vt.case_type(ctor)
            if case_ty is None:
                raise TypeMismatch(
                    path, f"constructor {ctor} not in annotated variant",
                    expected=vt)
            _expect(path + (0,), _infer(ctx, payload, path + (0,)), case_ty,
                    f"payload of {ctor}")
            return vt
        case MatchVariant(scrut, branches):
            scrut_ty = _infer(ctx, scrut, path + (0,))
            if not isinstance(scrut_ty, Variant):
                raise TypeMismatch(path + (0,), "variant match on non-variant",
                                   expected="a variant type", found=scrut_ty)
            if len(branches) != len(scrut_ty.cases) or any(
                    bc != cc for (bc, _, _), (cc, _) in
                    zip(branches, scrut_ty.cases)):
                have = [c for c, _, _ in branches]
                want = [c for c, _ in scrut_ty.cases]
                raise TypeMismatch(
                    path, f"branches {have} do not match variant cases {want}")
            result: Type | None = None
            for i, ((_, var, body), (_, case_ty)) in enumerate(
                    zip(branches, scrut_ty.cases)):
                body_ty = _infer(ctx.extend(var, case_ty), body,
                                 path + (i + 1,))
                if result is None:
                    result = body_ty
                else:
                    _expect(path + (i + 1,), body_ty, result, "branch result")
            assert result is not None
            return result
        case Nil(elem):
            return ListOf(elem)
        case Cons(head, tail):
            head_ty = _infer(ctx, head, path + (0,))
            tail_ty = _infer(ctx, tail, path + (1,))
            _expect(path + (1,), tail_ty, ListOf(head_ty), "cons tail")
            return tail_ty
        case Fold(hv, av, step, over, base):
            over_ty = _infer(ctx, over, path + (1,))
            if not isinstance(over_ty, ListOf):
                raise TypeMismatch(path + (1,), "fold over non-list",
                                   expected="a list type", found=over_ty)
            base_ty = _infer(ctx, base, path + (2,))
            step_ctx = ctx.extend(hv, over_ty.elem).extend(av, base_ty)
            step_ty = _infer(step_ctx, step, path + (0,))
            _expect(path + (0,), step_ty, base_ty, "fold step result")
            return base_ty
    raise TypeMismatch(path, f"unrecognized term {t!r}")


def check_unit(unit) -> dict[str | None, Type]:
    """Check every definition body against its declared type and the main
    term (if any) in the empty context.

    Returns {name: type} with the main term's type under key None.
    Raises TypeMismatch with a path on the first failure.
    """
    out: dict[str | None, Type] = {}
    empty = Context()
    for d in unit.defs:
        got = infer(empty, d.body)
        if got != d.declared:
            raise TypeMismatch(
                (), f"definition {d.name} does not match its declaration",
                expected=d.declared, found=got)
        out[d.name] = got
    if unit.main is not None:
        out[None] = infer(empty, unit.main)
    return out
