"""IEEE-double evaluation of expression trees, with a codegen fast path."""

from __future__ import annotations

import cmath

from .nodes import Expr, VarTable, to_text


class EvalError(ArithmeticError):
    """Division by zero at the evaluation point; carries the subtree."""

    def __init__(self, subtree):
        super().__init__(f"division by zero while evaluating {to_text(subtree)}")
        self.subtree = subtree


def eval_tree(e: Expr, vars: VarTable, point):
    """Direct tree-walking evaluation; `point` follows the VarTable order."""
    if len(point) != len(vars):
        raise ValueError("point length does not match VarTable")
    return _ev(e, vars.index, point)


def _ev(e, index, point):
    k = e.kind
    if k == "const":
        return complex(e.payload)
    if k == "var":
        return complex(point[index[e.payload[0]]])
    if k == "cvar":
        return complex(point[index[e.payload[0]]]).conjugate()
    if k == "add":
        return sum(_ev(c, index, point) for c in e.children)
    if k == "mul":
        out = 1 + 0j
        for c in e.children:
            out *= _ev(c, index, point)
        return out
    if k == "neg":
        return -_ev(e.children[0], index, point)
    if k == "recip":
        d = _ev(e.children[0], index, point)
        if d == 0:
            raise EvalError(e.children[0])
        return 1 / d
    if k == "pow":
        b = _ev(e.children[0], index, point)
        if e.payload < 0 and b == 0:
            raise EvalError(e)
        return b ** e.payload
    if k == "exp":
        return cmath.exp(_ev(e.children[0], index, point))
    if k == "sin":
        return cmath.sin(_ev(e.children[0], index, point))
    if k == "cos":
        return cmath.cos(_ev(e.children[0], index, point))
    if k == "re":
        return complex(_ev(e.children[0], index, point).real)
    if k == "im":
        return complex(_ev(e.children[0], index, point).imag)
    raise ValueError(f"eval: unhandled kind {k}")


def _emit(e, index):
    k = e.kind
    if k == "const":
        c = complex(e.payload)
        return f"complex({c.real!r},{c.imag!r})"
    if k == "var":
        return f"p[{index[e.payload[0]]}]"
    if k == "cvar":
        return f"p[{index[e.payload[0]]}].conjugate()"
    if k == "add":
        return "(" + "+".join(_emit(c, index) for c in e.children) + ")"
    if k == "mul":
        return "(" + "*".join(_emit(c, index) for c in e.children) + ")"
    if k == "neg":
        return f"(-{_emit(e.children[0], index)})"
    if k == "recip":
        return f"(1/{_emit(e.children[0], index)})"
    if k == "pow":
        return f"({_emit(e.children[0], index)}**{e.payload})"
    if k in ("exp", "sin", "cos"):
        return f"_{k}({_emit(e.children[0], index)})"
    if k == "re":
        return f"complex({_emit(e.children[0], index)}.real)"
    if k == "im":
        return f"complex({_emit(e.children[0], index)}.imag)"
    raise ValueError(f"codegen: unhandled kind {k}")


def compile_exprs(exprs, vars: VarTable):
    """Compile several expressions into one callable point -> tuple.

    On a ZeroDivisionError the compiled path falls back to tree evaluation
    so the error can name the offending subtree.
    """
    exprs = tuple(exprs)
    body = ",".join(_emit(e, vars.index) for e in exprs)
    src = f"def _f(p):\n    return ({body}{',' if len(exprs) == 1 else ''})"
    ns = {"_exp": cmath.exp, "_sin": cmath.sin, "_cos": cmath.cos,
          "complex": complex}
    exec(src, ns)
    fast = ns["_f"]

    def call(point):
        try:
            return fast(point)
        except ZeroDivisionError:
            # slow path pinpoints the subtree
            return tuple(eval_tree(e, vars, point) for e in exprs)
        except OverflowError:
            return tuple(eval_tree(e, vars, point) for e in exprs)

    return call
