"""Zero-testing via a canonical normal form.

An expression is flattened into a fraction of polynomials whose indeterminate
"atoms" are variables, conjugated variables, and opaque exp/sin/cos symbols
keyed by the canonical form of their argument.  The normal form is exact and
quotients out exactly these identities:

  * ring arithmetic over Gaussian rationals,
  * exp(u)*exp(v) = exp(u+v)  (and exp(0) = 1),
  * cos(u)^2 = 1 - sin(u)^2,  sin(-u) = -sin(u),  cos(-u) = cos(u),
  * re/im/conj elimination through structural conjugation.

`proven-zero` is sound: every rewrite above is an identity.  Expressions
outside this fragment (e.g. genuinely transcendental relations) come back
`unknown` and are settled by seeded witness sampling, never silently.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

from .gaussian import GaussianRational, ONE, ZERO
from .evaluate import EvalError, eval_tree
from .nodes import Expr, VarTable, expand_re_im, variables_of
from ..rng import SplitMix64

_ONE_MONO = ()


class ZeroStatus(enum.Enum):
    PROVEN_ZERO = "proven-zero"
    PROVEN_NONZERO = "proven-nonzero"
    UNKNOWN = "unknown"


class ZeroDecision:
    __slots__ = ("status", "witness_point", "witness_value", "witness_vars")

    def __init__(self, status, witness_point=None, witness_value=None,
                 witness_vars=None):
        self.status = status
        self.witness_point = witness_point
        self.witness_value = witness_value
        self.witness_vars = witness_vars

    def __repr__(self):
        return f"ZeroDecision({self.status.value})"


class IllFormed(ArithmeticError):
    """A denominator canonicalized to the zero polynomial."""


# -- polynomials over atoms -------------------------------------------------
# poly: dict {monomial: GaussianRational}; monomial: sorted tuple of
# (atom, positive int exponent); atom: nested hashable tuple.


def _padd(a, b):
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, ZERO) + c
        if s.is_zero:
            out.pop(m, None)
        else:
            out[m] = s
    return out


def _pscale(a, c):
    if c.is_zero:
        return {}
    return {m: v * c for m, v in a.items()}


def _normalize_monomial(atoms, coeff):
    """Merge exp atoms and reduce cos powers; returns a poly."""
    exp_arg = None
    plain = []
    cos_reduce = []
    for atom, n in atoms.items():
        if n == 0:
            continue
        if atom[0] == "exp":
            contrib = _frac_int_scale(_arg_of(atom), n)
            exp_arg = contrib if exp_arg is None else _frac_add(exp_arg, contrib)
        elif atom[0] == "cos" and n >= 2:
            cos_reduce.append((atom, n))
        else:
            plain.append((atom, n))
    if exp_arg is not None and not _frac_is_zero(exp_arg):
        plain.append((("exp", _frac_key(exp_arg)), 1))
    base = {tuple(sorted(plain)): coeff}
    for atom, n in cos_reduce:
        # cos^n = cos^(n mod 2) * (1 - sin^2)^(n // 2)
        sin_atom = ("sin",) + atom[1:]
        binom = {_ONE_MONO: ONE}
        one_minus_sin2 = {_ONE_MONO: ONE, ((sin_atom, 2),): -ONE}
        for _ in range(n // 2):
            binom = _pmul_raw(binom, one_minus_sin2)
        if n % 2:
            binom = _pmul_raw(binom, {((atom, 1),): ONE})
        base = _pmul(base, binom)
    return base


def _pmul_raw(a, b):
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            atoms = {}
            for atom, n in m1:
                atoms[atom] = atoms.get(atom, 0) + n
            for atom, n in m2:
                atoms[atom] = atoms.get(atom, 0) + n
            mono = tuple(sorted((a_, n) for a_, n in atoms.items() if n))
            c = c1 * c2
            s = out.get(mono, ZERO) + c
            if s.is_zero:
                out.pop(mono, None)
            else:
                out[mono] = s
    return out


def _pmul(a, b):
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            atoms = {}
            for atom, n in m1:
                atoms[atom] = atoms.get(atom, 0) + n
            for atom, n in m2:
                atoms[atom] = atoms.get(atom, 0) + n
            piece = _normalize_monomial(atoms, c1 * c2)
            out = _padd(out, piece)
    return out


def _ppow(a, n):
    out = {_ONE_MONO: ONE}
    base = a
    while n:
        if n & 1:
            out = _pmul(out, base)
        base = _pmul(base, base)
        n >>= 1
    return out


def _pfreeze(a):
    return tuple(sorted((m, c.key()) for m, c in a.items()))


# -- fractions --------------------------------------------------------------
# frac: (num_poly, den_poly), canonicalized.


def _frac_is_zero(f):
    return not f[0]


_ARG_REGISTRY: dict = {}


def _frac_key(f):
    key = (_pfreeze(f[0]), _pfreeze(f[1]))
    _ARG_REGISTRY.setdefault(key, f)
    return key


def _arg_of(atom):
    return _ARG_REGISTRY[atom[1]]


def _content(polys):
    """Atom-wise minimal exponents common to every monomial of every poly."""
    common = None
    for p in polys:
        for mono in p:
            d = dict(mono)
            if common is None:
                common = d
            else:
                common = {a: min(n, d[a]) for a, n in common.items() if a in d}
            if not common:
                return {}
    return common or {}


def _divide_content(p, content):
    out = {}
    for mono, c in p.items():
        d = dict(mono)
        for a, n in content.items():
            d[a] -= n
            if d[a] == 0:
                del d[a]
        out[tuple(sorted(d.items()))] = c
    return out


def _make_frac(num, den):
    if not den:
        raise IllFormed("zero denominator in canonical form")
    if not num:
        return ({}, {_ONE_MONO: ONE})
    content = _content([num, den])
    if content:
        num = _divide_content(num, content)
        den = _divide_content(den, content)
    # a single-monomial denominator made of exp atoms is a unit: shift it up
    if len(den) == 1:
        (mono, dc), = den.items()
        exps = [(a, n) for a, n in mono if a[0] == "exp"]
        if exps:
            rest = tuple((a, n) for a, n in mono if a[0] != "exp")
            shift = {_ONE_MONO: ONE}
            for atom, n in exps:
                inv_arg = _frac_int_scale(_arg_of(atom), -n)
                shift = _pmul(shift, _exp_poly(inv_arg))
            num = _pmul(num, shift)
            den = {rest: dc}
    # scale so the leading denominator coefficient is one
    lead = min(den)
    c = den[lead]
    if c != ONE:
        inv = c.reciprocal()
        num = _pscale(num, inv)
        den = _pscale(den, inv)
    return (num, den)


def _frac_add(f, g):
    num = _padd(_pmul(f[0], g[1]), _pmul(g[0], f[1]))
    den = _pmul(f[1], g[1])
    return _make_frac(num, den)


def _frac_mul(f, g):
    return _make_frac(_pmul(f[0], g[0]), _pmul(f[1], g[1]))


def _frac_scale(f, c):
    return _make_frac(_pscale(f[0], c), dict(f[1]))


def _frac_int_scale(f, n):
    return _frac_scale(f, GaussianRational(n))


def _frac_recip(f):
    if not f[0]:
        raise IllFormed("reciprocal of a proven-zero expression")
    return _make_frac(dict(f[1]), dict(f[0]))


def _frac_pow(f, n):
    if n < 0:
        return _frac_recip(_frac_pow(f, -n))
    return _make_frac(_ppow(f[0], n), _ppow(f[1], n))


def _frac_const(c):
    if c.is_zero:
        return ({}, {_ONE_MONO: ONE})
    return ({_ONE_MONO: c}, {_ONE_MONO: ONE})


def _frac_atom(atom):
    return ({((atom, 1),): ONE}, {_ONE_MONO: ONE})


def _exp_poly(arg):
    """Polynomial for exp(arg-frac), folding exp(0) = 1."""
    if _frac_is_zero(arg):
        return {_ONE_MONO: ONE}
    return {((("exp", _frac_key(arg)), 1),): ONE}


def _frac_lead_sign(f):
    if not f[0]:
        return 0
    return f[0][min(f[0])].sort_sign()


def _frac_neg(f):
    return (_pscale(f[0], -ONE), dict(f[1]))


# -- canonicalization of expressions ----------------------------------------

_canon_cache: dict = {}


def canonical_fraction(e: Expr):
    """Canonical (num, den) pair of `e`; raises IllFormed on 1/0 structure."""
    hit = _canon_cache.get(e)
    if hit is not None:
        return hit
    out = _canon(e)
    _canon_cache[e] = out
    return out


def _canon(e):
    k = e.kind
    if k == "const":
        return _frac_const(e.payload)
    if k == "var":
        return _frac_atom(("v", e.payload[0]))
    if k == "cvar":
        return _frac_atom(("cv", e.payload[0]))
    if k == "add":
        out = _frac_const(ZERO)
        for c in e.children:
            out = _frac_add(out, canonical_fraction(c))
        return out
    if k == "mul":
        out = _frac_const(ONE)
        for c in e.children:
            out = _frac_mul(out, canonical_fraction(c))
        return out
    if k == "neg":
        return _frac_neg(canonical_fraction(e.children[0]))
    if k == "recip":
        return _frac_recip(canonical_fraction(e.children[0]))
    if k == "pow":
        return _frac_pow(canonical_fraction(e.children[0]), e.payload)
    if k == "exp":
        arg = canonical_fraction(e.children[0])
        return _make_frac(_exp_poly(arg), {_ONE_MONO: ONE})
    if k in ("sin", "cos"):
        arg = canonical_fraction(e.children[0])
        if _frac_is_zero(arg):
            return _frac_const(ZERO if k == "sin" else ONE)
        sign = _frac_lead_sign(arg)
        flip = sign < 0
        if flip:
            arg = _frac_neg(arg)
        atom = (k, _frac_key(arg))
        f = _frac_atom(atom)
        if flip and k == "sin":
            f = _frac_neg(f)
        return f
    if k in ("re", "im"):
        return canonical_fraction(expand_re_im(e))
    raise ValueError(f"canon: unhandled kind {k}")


# -- witness sampling --------------------------------------------------------


def _witness_hunt(e, tol, tries=48, seed=0x5EED):
    pairs = sorted(variables_of(e))
    vt = VarTable([(n, "complex" if c else "real") for n, c in pairs])
    rng = SplitMix64(seed)
    special = [0.5, 1.0, math.pi / 2, -1.5, math.pi / 3]
    for trial in range(tries):
        point = []
        for j, (_, is_c) in enumerate(vt):
            if trial < len(special):
                base = special[trial] + 0.3 * j
                point.append(complex(base, 0.7 * base if is_c else 0.0))
            else:
                re = rng.uniform(-2.0, 2.0)
                im = rng.uniform(-2.0, 2.0) if is_c else 0.0
                point.append(complex(re, im))
        try:
            v = eval_tree(e, vt, point)
        except EvalError:
            continue
        if abs(v) > tol and math.isfinite(abs(v)):
            return tuple(point), v, vt
    return None


def decide_zero(e: Expr, tol=1e-8) -> ZeroDecision:
    """Classify `e` as proven-zero / proven-nonzero (with witness) / unknown."""
    try:
        f = canonical_fraction(e)
    except IllFormed:
        return ZeroDecision(ZeroStatus.UNKNOWN)
    if _frac_is_zero(f):
        return ZeroDecision(ZeroStatus.PROVEN_ZERO)
    hit = _witness_hunt(e, tol)
    if hit is not None:
        point, value, vt = hit
        return ZeroDecision(ZeroStatus.PROVEN_NONZERO, point, value, vt)
    return ZeroDecision(ZeroStatus.UNKNOWN)


def is_zero(e: Expr, tol=1e-8) -> ZeroStatus:
    return decide_zero(e, tol).status

# -- resynthesis -------------------------------------------------------------


def _mono_to_expr(mono, kinds):
    from . import nodes
    factors = []
    for atom, n in mono:
        tag = atom[0]
        if tag == "v":
            base = nodes.var(atom[1], "complex" if kinds.get(atom[1]) else "real")
        elif tag == "cv":
            base = nodes.cvar(atom[1])
        else:
            arg = _frac_to_expr(_ARG_REGISTRY[atom[1]], kinds)
            base = {"exp": nodes.exp, "sin": nodes.sin, "cos": nodes.cos}[tag](arg)
        factors.append(nodes.pow_int(base, n))
    return nodes.mul(*factors) if factors else nodes.rational(1)


def _poly_to_expr(p, kinds):
    from . import nodes
    terms = [nodes.mul(nodes.const(c), _mono_to_expr(m, kinds))
             for m, c in sorted(p.items())]
    return nodes.add(*terms)


def _frac_to_expr(f, kinds):
    from . import nodes
    num = _poly_to_expr(f[0], kinds)
    if f[1] == {_ONE_MONO: ONE}:
        return num
    return nodes.mul(num, nodes.recip(_poly_to_expr(f[1], kinds)))


def expand(e: Expr) -> Expr:
    """Resynthesize `e` from its canonical fraction (sums of monomials)."""
    kinds = {name: is_c for name, is_c in variables_of(e)}
    return _frac_to_expr(canonical_fraction(e), kinds)
