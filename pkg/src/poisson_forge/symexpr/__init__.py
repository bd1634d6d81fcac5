"""Exact symbolic scalar expressions with Wirtinger calculus."""

from .gaussian import GaussianRational
from .nodes import (
    Expr,
    ExprError,
    VarTable,
    add,
    conj,
    const,
    cos,
    cvar,
    diff,
    exp,
    expand_re_im,
    im_part,
    imag_unit,
    is_real_typed,
    mul,
    neg,
    pow_int,
    rational,
    re_part,
    recip,
    sin,
    substitute,
    to_text,
    var,
    variables_of,
)
from .parse import ParseError, parse
from .evaluate import EvalError, compile_exprs, eval_tree
from .zero import ZeroDecision, ZeroStatus, decide_zero, expand, is_zero

__all__ = [
    "Expr", "ExprError", "GaussianRational", "VarTable", "ParseError",
    "EvalError", "ZeroDecision", "ZeroStatus",
    "add", "conj", "const", "cos", "cvar", "diff", "exp", "expand_re_im",
    "im_part", "imag_unit", "is_real_typed", "mul", "neg", "pow_int",
    "rational", "re_part", "recip", "sin", "substitute", "to_text", "var",
    "variables_of", "parse", "compile_exprs", "eval_tree", "decide_zero",
    "is_zero", "expand",
]
