"""Immutable expression trees over real/complex chart variables.

Node kinds: const, var, cvar (conjugated complex variable), add, mul, neg,
recip, pow (integer exponent), exp, sin, cos, re, im.

Variables carry their kind (real/complex) in the node itself, so conjugation
and re/im extraction are decidable structurally.  Constants are exact
Gaussian rationals; floats never enter a tree.
"""

from __future__ import annotations

from fractions import Fraction

from .gaussian import GaussianRational, ONE, ZERO

_CONST, _VAR, _CVAR = "const", "var", "cvar"
_ADD, _MUL, _NEG, _RECIP, _POW = "add", "mul", "neg", "recip", "pow"
_EXP, _SIN, _COS, _RE, _IM = "exp", "sin", "cos", "re", "im"

_KIND_ORDER = {
    _CONST: 0, _VAR: 1, _CVAR: 2, _ADD: 3, _MUL: 4, _NEG: 5, _RECIP: 6,
    _POW: 7, _EXP: 8, _SIN: 9, _COS: 10, _RE: 11, _IM: 12,
}


class ExprError(ValueError):
    pass


class Expr:
    __slots__ = ("kind", "children", "payload", "_hash", "_key")

    def __init__(self, kind, children=(), payload=None):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "children", tuple(children))
        object.__setattr__(self, "payload", payload)
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def sort_key(self):
        k = self._key
        if k is None:
            if self.kind == _CONST:
                k = (0, self.payload.key())
            elif self.kind in (_VAR, _CVAR):
                k = (_KIND_ORDER[self.kind], self.payload[0])
            elif self.kind == _POW:
                k = (_KIND_ORDER[_POW], self.children[0].sort_key(), self.payload)
            else:
                k = (_KIND_ORDER[self.kind],) + tuple(c.sort_key() for c in self.children)
            object.__setattr__(self, "_key", k)
        return k

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (self.kind == other.kind and self.payload == other.payload
                and self.children == other.children)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.kind, self.payload, self.children))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    # operator sugar, mirrors what the parser builds
    def __add__(self, other):
        return add(self, _as_expr(other))

    def __radd__(self, other):
        return add(_as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(_as_expr(other)))

    def __rsub__(self, other):
        return add(_as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, _as_expr(other))

    def __rmul__(self, other):
        return mul(_as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, recip(_as_expr(other)))

    def __rtruediv__(self, other):
        return mul(_as_expr(other), recip(self))

    def __pow__(self, n):
        return pow_int(self, n)

    def __neg__(self):
        return neg(self)


def _as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return const(GaussianRational(x))
    if isinstance(x, GaussianRational):
        return const(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as Expr")


# -- variable tables -------------------------------------------------------


class VarTable:
    """Ordered (name, kind) list fixing the evaluation-point layout."""

    def __init__(self, entries):
        names = []
        kinds = {}
        for name, kind in entries:
            if kind not in ("real", "complex"):
                raise ExprError(f"unknown variable kind {kind!r}")
            if name in kinds:
                raise ExprError(f"duplicate variable {name!r}")
            names.append(name)
            kinds[name] = kind
        self.names = tuple(names)
        self.kinds = kinds
        self.index = {n: i for i, n in enumerate(names)}

    @classmethod
    def reals(cls, *names):
        return cls([(n, "real") for n in names])

    @classmethod
    def complexes(cls, *names):
        return cls([(n, "complex") for n in names])

    def is_complex(self, name):
        return self.kinds[name] == "complex"

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter((n, self.kinds[n]) for n in self.names)

    def __contains__(self, name):
        return name in self.kinds

    def __eq__(self, other):
        return isinstance(other, VarTable) and self.names == other.names \
            and self.kinds == other.kinds

    def __repr__(self):
        inner = ", ".join(f"{n}:{self.kinds[n][0]}" for n in self.names)
        return f"VarTable({inner})"

    def point(self, **values):
        """Build an evaluation point from keyword values."""
        return tuple(complex(values[n]) for n in self.names)


# -- constructors ----------------------------------------------------------


def const(value):
    if isinstance(value, (int, Fraction)):
        value = GaussianRational(value)
    if not isinstance(value, GaussianRational):
        raise ExprError("const payload must be exact")
    return Expr(_CONST, (), value)


_ZERO_E = const(0)
_ONE_E = const(1)


def rational(p, q=1):
    return const(GaussianRational(Fraction(p, q)))


def imag_unit():
    return const(GaussianRational(0, 1))


def var(name, kind="real"):
    if kind not in ("real", "complex"):
        raise ExprError(f"unknown variable kind {kind!r}")
    return Expr(_VAR, (), (name, kind == "complex"))


def cvar(name):
    """Conjugate of the complex variable `name`."""
    return Expr(_CVAR, (), (name, True))


def add(*terms):
    flat = []
    acc = ZERO
    for t in terms:
        t = _as_expr(t)
        if t.kind == _ADD:
            flat.extend(t.children)
        elif t.kind == _CONST:
            acc = acc + t.payload
        else:
            flat.append(t)
    merged = []
    for t in flat:
        if t.kind == _CONST:
            acc = acc + t.payload
        else:
            merged.append(t)
    if acc != ZERO:
        merged.append(const(acc))
    if not merged:
        return _ZERO_E
    if len(merged) == 1:
        return merged[0]
    merged.sort(key=Expr.sort_key)
    return Expr(_ADD, merged)


def mul(*factors):
    flat = []
    acc = ONE
    for f in factors:
        f = _as_expr(f)
        if f.kind == _MUL:
            flat.extend(f.children)
        else:
            flat.append(f)
    rest = []
    for f in flat:
        if f.kind == _CONST:
            acc = acc * f.payload
        else:
            rest.append(f)
    if acc.is_zero:
        return _ZERO_E
    if not rest:
        return const(acc)
    if acc != ONE:
        rest.append(const(acc))
    if len(rest) == 1:
        return rest[0]
    rest.sort(key=Expr.sort_key)
    return Expr(_MUL, rest)


def neg(e):
    e = _as_expr(e)
    if e.kind == _CONST:
        return const(-e.payload)
    if e.kind == _NEG:
        return e.children[0]
    return Expr(_NEG, (e,))


def recip(e):
    e = _as_expr(e)
    if e.kind == _CONST:
        if e.payload.is_zero:
            raise ExprError("reciprocal of the zero constant")
        return const(e.payload.reciprocal())
    if e.kind == _RECIP:
        return e.children[0]
    return Expr(_RECIP, (e,))


def pow_int(e, n):
    e = _as_expr(e)
    if not isinstance(n, int):
        raise ExprError("exponents must be integers")
    if n == 0:
        return _ONE_E
    if n == 1:
        return e
    if e.kind == _CONST:
        return const(e.payload ** n)
    if e.kind == _POW:
        return pow_int(e.children[0], e.payload * n)
    if n < 0:
        return recip(pow_int(e, -n))
    return Expr(_POW, (e,), n)


def exp(e):
    e = _as_expr(e)
    if e.kind == _CONST and e.payload.is_zero:
        return _ONE_E
    return Expr(_EXP, (e,))


def sin(e):
    e = _as_expr(e)
    if e.kind == _CONST and e.payload.is_zero:
        return _ZERO_E
    return Expr(_SIN, (e,))


def cos(e):
    e = _as_expr(e)
    if e.kind == _CONST and e.payload.is_zero:
        return _ONE_E
    return Expr(_COS, (e,))


def is_real_typed(e):
    """True when the tree provably takes real values (syntactic check)."""
    if e.kind == _CONST:
        return e.payload.is_real
    if e.kind == _VAR:
        return not e.payload[1]
    if e.kind == _CVAR:
        return False
    if e.kind in (_RE, _IM):
        return True
    return all(is_real_typed(c) for c in e.children)


def conj(e):
    """Structural conjugation; conj nodes never survive on composites."""
    e = _as_expr(e)
    if e.kind == _CONST:
        return const(e.payload.conjugate())
    if e.kind == _VAR:
        name, is_c = e.payload
        if not is_c:
            return e
        return cvar(name)
    if e.kind == _CVAR:
        return var(e.payload[0], "complex")
    if e.kind == _ADD:
        return add(*[conj(c) for c in e.children])
    if e.kind == _MUL:
        return mul(*[conj(c) for c in e.children])
    if e.kind == _NEG:
        return neg(conj(e.children[0]))
    if e.kind == _RECIP:
        return recip(conj(e.children[0]))
    if e.kind == _POW:
        return pow_int(conj(e.children[0]), e.payload)
    if e.kind == _EXP:
        return exp(conj(e.children[0]))
    if e.kind == _SIN:
        return sin(conj(e.children[0]))
    if e.kind == _COS:
        return cos(conj(e.children[0]))
    if e.kind in (_RE, _IM):
        return e
    raise ExprError(f"conj: unhandled kind {e.kind}")


def re_part(e):
    e = _as_expr(e)
    if is_real_typed(e):
        return e
    if e.kind == _CONST:
        return const(GaussianRational(e.payload.re))
    return Expr(_RE, (e,))


def im_part(e):
    e = _as_expr(e)
    if is_real_typed(e):
        return _ZERO_E
    if e.kind == _CONST:
        return const(GaussianRational(e.payload.im))
    return Expr(_IM, (e,))


def expand_re_im(e):
    """Rewrite re/im nodes via structural conjugation: re(u)=(u+conj u)/2."""
    if e.kind == _RE:
        u = expand_re_im(e.children[0])
        return mul(rational(1, 2), add(u, conj(u)))
    if e.kind == _IM:
        u = expand_re_im(e.children[0])
        return mul(const(GaussianRational(0, Fraction(-1, 2))), add(u, neg(conj(u))))
    if not e.children:
        return e
    kids = tuple(expand_re_im(c) for c in e.children)
    if kids == e.children:
        return e
    if e.kind == _ADD:
        return add(*kids)
    if e.kind == _MUL:
        return mul(*kids)
    if e.kind == _NEG:
        return neg(kids[0])
    if e.kind == _RECIP:
        return recip(kids[0])
    if e.kind == _POW:
        return pow_int(kids[0], e.payload)
    if e.kind == _EXP:
        return exp(kids[0])
    if e.kind == _SIN:
        return sin(kids[0])
    if e.kind == _COS:
        return cos(kids[0])
    raise ExprError(f"expand_re_im: unhandled kind {e.kind}")


def variables_of(e, acc=None):
    """Set of (name, is_complex) pairs appearing in the tree."""
    if acc is None:
        acc = set()
    if e.kind in (_VAR, _CVAR):
        acc.add(e.payload)
    for c in e.children:
        variables_of(c, acc)
    return acc


def substitute(e, mapping):
    """Replace variables by expressions.

    `mapping` sends a variable name to an Expr; the conjugate variable is
    substituted by the structural conjugate of that Expr.
    """
    if e.kind == _VAR:
        r = mapping.get(e.payload[0])
        return e if r is None else r
    if e.kind == _CVAR:
        r = mapping.get(e.payload[0])
        return e if r is None else conj(r)
    if not e.children:
        return e
    kids = [substitute(c, mapping) for c in e.children]
    if e.kind == _ADD:
        return add(*kids)
    if e.kind == _MUL:
        return mul(*kids)
    if e.kind == _NEG:
        return neg(kids[0])
    if e.kind == _RECIP:
        return recip(kids[0])
    if e.kind == _POW:
        return pow_int(kids[0], e.payload)
    if e.kind == _EXP:
        return exp(kids[0])
    if e.kind == _SIN:
        return sin(kids[0])
    if e.kind == _COS:
        return cos(kids[0])
    if e.kind == _RE:
        return re_part(kids[0])
    if e.kind == _IM:
        return im_part(kids[0])
    raise ExprError(f"substitute: unhandled kind {e.kind}")


# -- differentiation (Wirtinger convention) --------------------------------


def diff(e, v):
    """Exact derivative of `e` with respect to a var or cvar node `v`.

    Complex z and conj(z) are independent directions; d(conj z)/dz = 0.
    """
    if v.kind not in (_VAR, _CVAR):
        raise ExprError("diff direction must be a variable or conj-variable")
    return _diff(e, v.kind, v.payload[0])


def _diff(e, vkind, vname):
    k = e.kind
    if k == _CONST:
        return _ZERO_E
    if k in (_VAR, _CVAR):
        return _ONE_E if (k == vkind and e.payload[0] == vname) else _ZERO_E
    if k == _ADD:
        return add(*[_diff(c, vkind, vname) for c in e.children])
    if k == _NEG:
        return neg(_diff(e.children[0], vkind, vname))
    if k == _MUL:
        terms = []
        kids = e.children
        for i, c in enumerate(kids):
            d = _diff(c, vkind, vname)
            if d is _ZERO_E or (d.kind == _CONST and d.payload.is_zero):
                continue
            terms.append(mul(*kids[:i], d, *kids[i + 1:]))
        return add(*terms)
    if k == _RECIP:
        u = e.children[0]
        return neg(mul(_diff(u, vkind, vname), recip(pow_int(u, 2))))
    if k == _POW:
        u, n = e.children[0], e.payload
        return mul(rational(n), pow_int(u, n - 1), _diff(u, vkind, vname))
    if k == _EXP:
        u = e.children[0]
        return mul(e, _diff(u, vkind, vname))
    if k == _SIN:
        u = e.children[0]
        return mul(cos(u), _diff(u, vkind, vname))
    if k == _COS:
        u = e.children[0]
        return neg(mul(sin(u), _diff(u, vkind, vname)))
    if k in (_RE, _IM):
        return _diff(expand_re_im(e), vkind, vname)
    raise ExprError(f"diff: unhandled kind {k}")


# -- printer ---------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def to_text(e):
    """Render to the documented grammar; parses back to the same tree."""
    return _print(e, 0)


def _print_const(c):
    re, im = c.re, c.im
    def frac(f):
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    if im == 0:
        return frac(re), (re.denominator != 1), re < 0
    if re == 0:
        if im == 1:
            return "i", False, False
        if im == -1:
            return "-i", False, True
        return f"{frac(abs(im))}*i", True, im < 0
    # generic a+bi rendered as a sum
    rs, _, _ = _print_const(GaussianRational(re))
    is_, _, ineg = _print_const(GaussianRational(0, abs(im)))
    op = "-" if im < 0 else "+"
    return f"{rs}{op}{is_}", True, False


def _print(e, ctx):
    k = e.kind
    if k == _CONST:
        s, composite, negative = _print_const(e.payload)
        if negative and "-" in s and ctx >= _PREC_MUL:
            return f"({s})"
        if composite and ctx >= _PREC_POW:
            return f"({s})"
        if composite and ctx >= _PREC_MUL and ("+" in s[1:] or "-" in s[1:]):
            return f"({s})"
        return s
    if k == _VAR:
        return e.payload[0]
    if k == _CVAR:
        return f"conj({e.payload[0]})"
    if k == _ADD:
        s = " + ".join(_print(c, _PREC_ADD + 1) for c in e.children)
        s = s.replace("+ -", "- ")
        return f"({s})" if ctx > _PREC_ADD else s
    if k == _MUL:
        s = "*".join(_print(c, _PREC_MUL + 1) for c in e.children)
        return f"({s})" if ctx > _PREC_MUL else s
    if k == _NEG:
        s = f"-{_print(e.children[0], _PREC_NEG)}"
        return f"({s})" if ctx > _PREC_MUL else s
    if k == _RECIP:
        return f"1/{_print(e.children[0], _PREC_POW + 1)}"
    if k == _POW:
        base = _print(e.children[0], _PREC_POW + 1)
        n = e.payload
        return f"{base}^{n}" if n >= 0 else f"{base}^({n})"
    if k in (_EXP, _SIN, _COS, _RE, _IM):
        return f"{k}({_print(e.children[0], 0)})"
    raise ExprError(f"print: unhandled kind {k}")
