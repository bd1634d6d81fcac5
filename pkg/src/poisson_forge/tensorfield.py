"""Charts, multivector fields, forms, Schouten calculus and reduction.

Everything lives on one chart at a time.  Complex charts are treated
holomorphically (each complex variable is one coordinate slot); where
anti-holomorphic directions matter the chart is expanded to real
coordinates first (`realify_*` helpers).

Sign conventions, pinned by the test suite:
  * sharp:  (pi^# alpha)_i = sum_j Pi_ij alpha_j, so pi = da^db sends
    db to +da-direction and {a,b} = Pi_ab.
  * invert_form_at: Pi = -W^{-1}, so omega = da^db inverts to
    pi = the da^db-dual bivector with {a,b} = 1.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from . import symexpr as sx
from .report import FAIL, PASS, PROVEN, UNKNOWN_ESCALATED, CheckRecord, Report, Witness
from .rng import SplitMix64, substream
from .symexpr import Expr, VarTable


class ChartError(ValueError):
    pass


class SingularFormError(ArithmeticError):
    def __init__(self, cond):
        super().__init__(f"2-form is singular at the point (cond ~ {cond:.3e})")
        self.cond = cond


class ReductionHypothesisViolated(ArithmeticError):
    pass


class SamplingError(RuntimeError):
    pass


class Chart:
    """Named coordinate domain with optional nonvanishing constraints."""

    def __init__(self, name, vars: VarTable, nonzero=()):
        self.name = name
        self.vars = vars
        self.nonzero = tuple(nonzero)
        self._nonzero_fn = None

    @property
    def dim(self):
        return len(self.vars)

    @property
    def real_dim(self):
        return sum(2 if k == "complex" else 1 for _, k in self.vars)

    def coordinate(self, i):
        name = self.vars.names[i]
        return sx.var(name, self.vars.kinds[name])

    def coordinates(self):
        return [self.coordinate(i) for i in range(self.dim)]

    def parse(self, text):
        return sx.parse(text, self.vars)

    def in_domain(self, point, guard=1e-3):
        if not self.nonzero:
            return True
        if self._nonzero_fn is None:
            self._nonzero_fn = sx.compile_exprs(self.nonzero, self.vars)
        return all(abs(v) > guard for v in self._nonzero_fn(point))

    def sample_point(self, rng: SplitMix64, spread=1.2, guard=0.2, tries=64):
        for _ in range(tries):
            point = []
            for _, kind in self.vars:
                re = rng.uniform(-spread, spread)
                im = rng.uniform(-spread, spread) if kind == "complex" else 0.0
                point.append(complex(re, im))
            point = tuple(point)
            if self.in_domain(point, guard):
                return point
        raise SamplingError(f"cannot sample inside the domain of chart {self.name}")

    def __repr__(self):
        return f"Chart({self.name}, {self.vars!r})"


class ChartMap:
    """Map between charts given by one component Expr per target coordinate."""

    def __init__(self, source: Chart, target: Chart, components):
        components = tuple(components)
        if len(components) != target.dim:
            raise ChartError("component count must match target dimension")
        for comp in components:
            for name, _ in sx.variables_of(comp):
                if name not in source.vars:
                    raise ChartError(f"component uses unknown variable {name!r}")
        self.source = source
        self.target = target
        self.components = components
        self._fn = None
        self._jac = None
        self._jac_fn = None

    @classmethod
    def from_text(cls, source, target, texts):
        return cls(source, target, [source.parse(t) for t in texts])

    @classmethod
    def identity(cls, chart):
        return cls(chart, chart, chart.coordinates())

    def at(self, point):
        if self._fn is None:
            self._fn = sx.compile_exprs(self.components, self.source.vars)
        return self._fn(point)

    def pullback(self, expr):
        """expr over the target chart composed with this map."""
        mapping = dict(zip(self.target.vars.names, self.components))
        return sx.substitute(expr, mapping)

    def compose(self, inner: "ChartMap"):
        """self o inner (inner applied first)."""
        if inner.target.vars.names != self.source.vars.names:
            raise ChartError("charts do not chain")
        mapping = dict(zip(self.source.vars.names, inner.components))
        return ChartMap(inner.source, self.target,
                        [sx.substitute(c, mapping) for c in self.components])

    def jacobian_exprs(self):
        if self._jac is None:
            cols = self.source.coordinates()
            self._jac = tuple(tuple(sx.diff(comp, v) for v in cols)
                              for comp in self.components)
        return self._jac

    def jacobian_at(self, point):
        if self._jac_fn is None:
            flat = [e for row in self.jacobian_exprs() for e in row]
            self._jac_fn = sx.compile_exprs(flat, self.source.vars)
        vals = self._jac_fn(point)
        n, m = self.target.dim, self.source.dim
        return np.array(vals, dtype=complex).reshape(n, m)

    def __repr__(self):
        comps = ", ".join(sx.to_text(c) for c in self.components)
        return f"ChartMap({self.source.name} -> {self.target.name}: {comps})"


def _normalized_indices(idx):
    idx = tuple(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    order = tuple(sorted(idx))
    perm = list(idx)
    sign = 1
    for i in range(len(perm)):
        j = perm.index(order[i], i)
        if j != i:
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return order, sign


class _CoeffField:
    """Shared machinery for multivector fields and differential forms."""

    def __init__(self, chart: Chart, degree, coeffs):
        self.chart = chart
        self.degree = int(degree)
        clean = {}
        for idx, e in coeffs.items():
            order, sign = _normalized_indices(idx)
            if order is None:
                continue
            if len(order) != self.degree:
                raise ChartError("index length must equal the degree")
            if any(i < 0 or i >= chart.dim for i in order):
                raise ChartError("coordinate index out of range")
            e = sx.mul(sx.rational(sign), e) if sign < 0 else e
            cur = clean.get(order)
            clean[order] = e if cur is None else sx.add(cur, e)
        self.coeffs = {idx: e for idx, e in clean.items()
                       if not (e.kind == "const" and e.payload.is_zero)}
        self._fns = None

    def _evaluator(self):
        if self._fns is None:
            items = sorted(self.coeffs.items())
            keys = [k for k, _ in items]
            fn = sx.compile_exprs([e for _, e in items], self.chart.vars) \
                if items else (lambda p: ())
            self._fns = (keys, fn)
        return self._fns

    def values_at(self, point):
        keys, fn = self._evaluator()
        return dict(zip(keys, fn(point)))

    def matrix_at(self, point):
        if self.degree != 2:
            raise ChartError("matrix_at requires degree 2")
        n = self.chart.dim
        m = np.zeros((n, n), dtype=complex)
        for (i, j), v in self.values_at(point).items():
            m[i, j] = v
            m[j, i] = -v
        return m

    def is_zero_field(self):
        return all(sx.is_zero(e) is sx.ZeroStatus.PROVEN_ZERO
                   for e in self.coeffs.values())

    def map_coeffs(self, f):
        return type(self)(self.chart, self.degree,
                          {k: f(e) for k, e in self.coeffs.items()})

    def __add__(self, other):
        if not isinstance(other, type(self)) or other.chart is not self.chart:
            raise ChartError("can only add fields of one kind on one chart")
        if other.degree != self.degree:
            raise ChartError("degree mismatch")
        out = dict(self.coeffs)
        for k, e in other.coeffs.items():
            out[k] = sx.add(out[k], e) if k in out else e
        return type(self)(self.chart, self.degree, out)

    def scale(self, c):
        return self.map_coeffs(lambda e: sx.mul(sx.const(sx.GaussianRational(c))
                                                if not isinstance(c, Expr) else c, e))

    def _pretty(self, symbol, wedge):
        if not self.coeffs:
            return "0"
        names = self.chart.vars.names
        parts = []
        for idx, e in sorted(self.coeffs.items()):
            basis = wedge.join(f"{symbol}{names[i]}" for i in idx)
            parts.append(f"({sx.to_text(e)}) {basis}" if basis else sx.to_text(e))
        return " + ".join(parts)


class MultiVectorField(_CoeffField):
    def __repr__(self):
        return f"MVF[{self.chart.name}] " + self._pretty("d/d", "^")


class DifferentialForm(_CoeffField):
    def __repr__(self):
        return f"Form[{self.chart.name}] " + self._pretty("d", "^")


def mvf_from_text(chart, degree, table):
    return MultiVectorField(chart, degree, {
        tuple(chart.vars.index[n] for n in names): chart.parse(text)
        for names, text in table.items()})


def form_from_text(chart, degree, table):
    return DifferentialForm(chart, degree, {
        tuple(chart.vars.index[n] for n in names): chart.parse(text)
        for names, text in table.items()})


# -- Schouten calculus -------------------------------------------------------


def _xi_derivative(coeffs, l):
    out = {}
    for idx, e in coeffs.items():
        if l not in idx:
            continue
        j = idx.index(l)
        rest = idx[:j] + idx[j + 1:]
        term = e if j % 2 == 0 else sx.neg(e)
        out[rest] = sx.add(out[rest], term) if rest in out else term
    return out


def _wedge_dicts(a, b):
    out = {}
    for i1, c1 in a.items():
        for i2, c2 in b.items():
            if set(i1) & set(i2):
                continue
            order, sign = _normalized_indices(i1 + i2)
            term = sx.mul(c1, c2)
            if sign < 0:
                term = sx.neg(term)
            out[order] = sx.add(out[order], term) if order in out else term
    return out


def schouten(P: MultiVectorField, Q: MultiVectorField) -> MultiVectorField:
    """Schouten-Nijenhuis bracket; degree deg P + deg Q - 1.

    Odd-coordinate formula [P,Q] = dP/dxi_l . d_l Q
    - (-1)^((p-1)(q-1)) dQ/dxi_l . d_l P.
    """
    if P.chart is not Q.chart and P.chart.vars != Q.chart.vars:
        raise ChartError("schouten requires both fields on one chart")
    chart = P.chart
    p, q = P.degree, Q.degree
    sign = -1 if ((p - 1) * (q - 1)) % 2 else 1
    acc = {}
    for l in range(chart.dim):
        v = chart.coordinate(l)
        dP = _xi_derivative(P.coeffs, l)
        dQx = {idx: sx.diff(e, v) for idx, e in Q.coeffs.items()}
        for idx, e in _wedge_dicts(dP, dQx).items():
            acc[idx] = sx.add(acc[idx], e) if idx in acc else e
        dQ = _xi_derivative(Q.coeffs, l)
        dPx = {idx: sx.diff(e, v) for idx, e in P.coeffs.items()}
        for idx, e in _wedge_dicts(dQ, dPx).items():
            term = sx.neg(e) if sign > 0 else e
            acc[idx] = sx.add(acc[idx], term) if idx in acc else term
    return MultiVectorField(chart, p + q - 1, acc)


def apply_field(pi: MultiVectorField, *functions) -> Expr:
    """The multiderivation pi[f_1, ..., f_k] as an Expr."""
    k = pi.degree
    if len(functions) != k:
        raise ChartError(f"expected {k} functions, got {len(functions)}")
    if k == 0:
        return next(iter(pi.coeffs.values()), sx.rational(0))
    grads = [[sx.diff(f, v) for v in pi.chart.coordinates()] for f in functions]
    terms = []
    for idx, c in pi.coeffs.items():
        det_terms = []
        for perm in itertools.permutations(range(k)):
            sign = _perm_sign(perm)
            prod = sx.mul(*[grads[b][idx[a]] for a, b in enumerate(perm)])
            det_terms.append(prod if sign > 0 else sx.neg(prod))
        terms.append(sx.mul(c, sx.add(*det_terms)))
    return sx.add(*terms)


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def sharp(pi: MultiVectorField, alpha, point):
    """Numeric contraction pi^#(alpha) at a point, (pi^# a)_i = Pi_ij a_j."""
    if pi.degree != 2:
        raise ChartError("sharp requires a bivector")
    m = pi.matrix_at(point)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (pi.chart.dim,):
        raise ChartError("covector length must equal the chart dimension")
    return m @ alpha


def exterior_derivative(omega: DifferentialForm) -> DifferentialForm:
    chart = omega.chart
    out = {}
    for idx, e in omega.coeffs.items():
        for l in range(chart.dim):
            if l in idx:
                continue
            d = sx.diff(e, chart.coordinate(l))
            pos = sum(1 for i in idx if i < l)
            key = tuple(sorted(idx + (l,)))
            term = d if pos % 2 == 0 else sx.neg(d)
            out[key] = sx.add(out[key], term) if key in out else term
    return DifferentialForm(chart, omega.degree + 1, out)


def pullback_form(m: ChartMap, omega: DifferentialForm) -> DifferentialForm:
    """Symbolic pullback m^* omega (degree 2)."""
    if omega.degree != 2:
        raise ChartError("pullback_form implemented for 2-forms")
    if omega.chart.vars.names != m.target.vars.names:
        raise ChartError("form must live on the map target")
    jac = m.jacobian_exprs()
    coeffs = {}
    src = m.source.dim
    for (k, l), e in omega.coeffs.items():
        el = m.pullback(e)
        for i in range(src):
            for j in range(i + 1, src):
                term = sx.mul(el, sx.add(
                    sx.mul(jac[k][i], jac[l][j]),
                    sx.neg(sx.mul(jac[k][j], jac[l][i]))))
                key = (i, j)
                coeffs[key] = sx.add(coeffs[key], term) if key in coeffs else term
    return DifferentialForm(m.source, 2, coeffs)


def invert_form_at(omega: DifferentialForm, point, cond_cap=1e12):
    """Bivector matrix Pi = -W^{-1} of a nondegenerate 2-form at a point."""
    if omega.degree != 2:
        raise ChartError("invert_form_at requires a 2-form")
    w = omega.matrix_at(point)
    cond = np.linalg.cond(w)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularFormError(cond)
    return -np.linalg.inv(w)


def bivector_from_form(omega: DifferentialForm) -> MultiVectorField:
    """Symbolic Pi = -W^{-1} via the adjugate; entries carry recip(det)."""
    n = omega.chart.dim
    w = [[sx.rational(0)] * n for _ in range(n)]
    for (i, j), e in omega.coeffs.items():
        w[i][j] = e
        w[j][i] = sx.neg(e)
    det = _sym_det(w)
    inv_det = sx.recip(det)
    coeffs = {}
    for i in range(n):
        for j in range(i + 1, n):
            cof = _sym_det(_minor(w, j, i))
            sign = -1 if (i + j) % 2 else 1
            entry = sx.mul(sx.rational(-sign), cof, inv_det)
            coeffs[(i, j)] = entry
    return MultiVectorField(omega.chart, 2, coeffs)


def _minor(m, i, j):
    return [[m[r][c] for c in range(len(m)) if c != j]
            for r in range(len(m)) if r != i]


def _sym_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    terms = []
    for j in range(n):
        e = m[0][j]
        if e.kind == "const" and e.payload.is_zero:
            continue
        sub = _sym_det(_minor(m, 0, j))
        term = sx.mul(e, sub)
        terms.append(term if j % 2 == 0 else sx.neg(term))
    return sx.add(*terms)


# -- submanifolds ------------------------------------------------------------


class Submanifold:
    """Cut out by generators and/or presented by a parametrization."""

    def __init__(self, chart: Chart, generators=(), parametrization: ChartMap = None,
                 expected_dim=None, name=""):
        if not generators and parametrization is None:
            raise ChartError("a submanifold needs generators or a parametrization")
        self.chart = chart
        self.generators = tuple(generators)
        self.parametrization = parametrization
        self.expected_dim = expected_dim
        self.name = name or "N"
        self._gen_fn = None
        self._gen_jac = None

    def generator_values(self, point):
        if not self.generators:
            return ()
        if self._gen_fn is None:
            self._gen_fn = sx.compile_exprs(self.generators, self.chart.vars)
        return self._gen_fn(point)

    def on_manifold(self, point, tol=1e-10):
        return all(abs(v) <= tol for v in self.generator_values(point))

    def generator_jacobian(self, point):
        if self._gen_jac is None:
            flat = [sx.diff(g, v) for g in self.generators
                    for v in self.chart.coordinates()]
            self._gen_jac = sx.compile_exprs(flat, self.chart.vars)
        vals = self._gen_jac(point)
        return np.array(vals, dtype=complex).reshape(len(self.generators),
                                                     self.chart.dim)

    def tangent_basis(self, point, tol=1e-8):
        if not self.generators:
            return np.eye(self.chart.dim, dtype=complex)
        j = self.generator_jacobian(point)
        _, s, vh = np.linalg.svd(j)
        rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
        return vh[rank:].conj().T

    def sample(self, count, seed, tol=1e-10, spread=1.2, newton_steps=60):
        """Deterministic points on the manifold; raises SamplingError."""
        out = []
        attempts = 0
        while len(out) < count and attempts < 40 * count + 40:
            rng = substream(seed, attempts)
            attempts += 1
            try:
                if self.parametrization is not None:
                    p0 = self.parametrization.source.sample_point(rng, spread)
                    pt = tuple(self.parametrization.at(p0))
                    if not self.chart.in_domain(pt, 1e-6):
                        continue
                else:
                    pt = self._newton(rng, tol, spread, newton_steps)
                    if pt is None:
                        continue
            except (sx.EvalError, SamplingError, OverflowError):
                continue
            if self.on_manifold(pt, max(tol, 1e-8)):
                out.append(pt)
        if len(out) < count:
            raise SamplingError(
                f"produced {len(out)}/{count} points on {self.name}")
        return out

    def _newton(self, rng, tol, spread, steps):
        x = np.array(self.chart.sample_point(rng, spread, guard=0.25),
                     dtype=complex)
        for _ in range(steps):
            f = np.array(self.generator_values(tuple(x)), dtype=complex)
            if np.max(np.abs(f)) <= tol:
                if self.chart.in_domain(tuple(x), 1e-6):
                    return tuple(x)
                return None
            j = self.generator_jacobian(tuple(x))
            try:
                step, *_ = np.linalg.lstsq(j, f, rcond=None)
            except np.linalg.LinAlgError:
                return None
            scale = 1.0
            base = np.max(np.abs(f))
            for _ in range(12):
                xn = x - scale * step
                try:
                    fn = np.array(self.generator_values(tuple(xn)), dtype=complex)
                except sx.EvalError:
                    scale *= 0.5
                    continue
                if np.max(np.abs(fn)) < base:
                    x = xn
                    break
                scale *= 0.5
            else:
                return None
        return None


# -- tangency and coisotropy campaigns ---------------------------------------


def _random_polynomial(chart, rng, degree=2):
    terms = [sx.rational(rng.integer(-3, 3))]
    coords = chart.coordinates()
    for v in coords:
        terms.append(sx.mul(sx.rational(rng.integer(-3, 3)), v))
    for i, v in enumerate(coords):
        for w in coords[i:]:
            if degree >= 2 and rng.uniform() < 0.5:
                terms.append(sx.mul(sx.rational(rng.integer(-2, 2)), v, w))
    return sx.add(*terms)


def _residual_campaign(name, exprs_for_sample, points, tol, note=""):
    """Evaluate per-point expressions, build a CheckRecord."""
    worst = 0.0
    witnesses = []
    for pt in points:
        for val, detail in exprs_for_sample(pt):
            r = abs(val)
            if r > worst:
                worst = r
            if r > tol and len(witnesses) < 3:
                witnesses.append(Witness(pt, val, detail))
    status = PASS if worst <= tol else FAIL
    return CheckRecord(name=name, status=status, max_residual=worst,
                       samples_used=len(points), witnesses=witnesses, note=note)


def is_tangent(pi: MultiVectorField, n: Submanifold, samples=50, tol=1e-9,
               seed=2024) -> Report:
    """pi[f, f_2..f_k] vanishes on N for each generator f.

    Degree-2 fields use a scale-aware residual |grad f . Pi . grad g| divided
    by (1 + |grad f| |Pi| |grad g|); higher degrees use absolute residuals.
    """
    rep = Report(campaign_id="is_tangent", target=n.name)
    if not n.generators:
        rep.add(CheckRecord(name="tangency", status=PASS, max_residual=0.0,
                            note="no generators: vacuous"))
        return rep
    k = pi.degree
    rng = SplitMix64(seed ^ 0xA5A5)
    pairs = []
    for g in n.generators:
        aux = [_random_polynomial(pi.chart, rng) for _ in range(max(0, k - 1))]
        pairs.append((g, aux))
    try:
        points = n.sample(samples, seed)
    except SamplingError as err:
        rep.add(CheckRecord(name="tangency", status=FAIL,
                            witnesses=[Witness((), 0.0, str(err))],
                            note="sampling failure"))
        return rep
    if k == 2:
        funcs = [(g, aux[0], f"pi[{sx.to_text(g)}, aux]") for g, aux in pairs]
        rep.add(_bivector_residual_campaign("tangency", pi, funcs, points, tol))
        return rep
    payload = [(apply_field(pi, g, *aux), f"pi[{sx.to_text(g)}, aux...]")
               for g, aux in pairs]
    fns = sx.compile_exprs([p for p, _ in payload], pi.chart.vars)

    def residuals(pt):
        vals = fns(pt)
        return [(v, d) for v, (_, d) in zip(vals, payload)]

    rep.add(_residual_campaign("tangency", residuals, points, tol))
    return rep


def _bivector_residual_campaign(name, pi, func_pairs, points, tol):
    """Relative residuals |df . Pi . dg| / (1 + scale) at given points."""
    chart = pi.chart
    coords = chart.coordinates()
    grads = []
    for f, g, label in func_pairs:
        gf = sx.compile_exprs([sx.diff(f, v) for v in coords], chart.vars)
        gg = sx.compile_exprs([sx.diff(g, v) for v in coords], chart.vars)
        grads.append((gf, gg, label))
    worst = 0.0
    wits = []
    for pt in points:
        m = pi.matrix_at(pt)
        mnorm = np.max(np.abs(m)) if m.size else 0.0
        for gf, gg, label in grads:
            v1 = np.array(gf(pt))
            v2 = np.array(gg(pt))
            scale = 1.0 + float(np.max(np.abs(v1)) * mnorm * np.max(np.abs(v2)))
            r = abs(v1 @ m @ v2) / scale
            if r > worst:
                worst = r
            if r > tol and len(wits) < 3:
                wits.append(Witness(pt, r, label))
    return CheckRecord(name=name, status=PASS if worst <= tol else FAIL,
                       max_residual=worst, samples_used=len(points),
                       witnesses=wits, note="scale-normalized residuals")


def is_coisotropic(pi: MultiVectorField, n: Submanifold, samples=50, tol=1e-9,
                   seed=2024, multipliers=20) -> Report:
    """Vanishing-ideal coisotropy test for N with respect to pi."""
    rep = Report(campaign_id="is_coisotropic", target=n.name)
    k = pi.degree
    gens = n.generators
    if not gens:
        rep.add(CheckRecord(name="coisotropy", status=PASS, max_residual=0.0,
                            note="no generators: vacuous"))
        return rep
    rng = SplitMix64(seed ^ 0xC015)
    try:
        points = n.sample(samples, seed)
    except SamplingError as err:
        rep.add(CheckRecord(name="coisotropy", status=FAIL,
                            witnesses=[Witness((), 0.0, str(err))],
                            note="sampling failure"))
        return rep
    if k == 2:
        funcs = []
        for a in range(len(gens)):
            for b in range(a, len(gens)):
                funcs.append((gens[a], gens[b], f"generators ({a},{b})"))
        for m in range(multipliers):
            f1 = sx.add(*[sx.mul(_random_polynomial(pi.chart, rng), g)
                          for g in gens])
            f2 = sx.add(*[sx.mul(_random_polynomial(pi.chart, rng), g)
                          for g in gens])
            funcs.append((f1, f2, f"ideal combo {m}"))
        rep.add(_bivector_residual_campaign("coisotropy", pi, funcs, points,
                                            tol))
        return rep
    import itertools as _it
    payload = []
    for tup in _it.combinations_with_replacement(range(len(gens)), k):
        payload.append((apply_field(pi, *[gens[i] for i in tup]),
                        f"generators {tup}"))
    for m in range(multipliers):
        fs = []
        for _ in range(k):
            combo = [sx.mul(_random_polynomial(pi.chart, rng), g) for g in gens]
            fs.append(sx.add(*combo))
        payload.append((apply_field(pi, *fs), f"ideal combo {m}"))
    fns = sx.compile_exprs([p for p, _ in payload], pi.chart.vars)

    def residuals(pt):
        vals = fns(pt)
        return [(v, d) for v, (_, d) in zip(vals, payload)]

    rep.add(_residual_campaign("coisotropy", residuals, points, tol))
    return rep


# -- reduction (quotient of a multivector field) ------------------------------


def _lift_covector(n: Submanifold, proj: ChartMap, x, alpha, rng=None):
    """Covector on the ambient chart restricting to (d proj)^T alpha on T_xN."""
    basis = n.tangent_basis(x)          # columns span T_xN
    dproj = proj.jacobian_at(x)
    alpha = np.asarray(alpha, dtype=complex)
    rhs = (alpha @ dproj) @ basis       # functional on T_xN
    lift, *_ = np.linalg.lstsq(basis.T, rhs, rcond=None)
    if rng is not None and n.generators:
        jg = n.generator_jacobian(x)
        coefs = np.array([rng.uniform(-1.0, 1.0) for _ in range(jg.shape[0])])
        lift = lift + coefs @ jg
    return lift


def _numeric_apply(mat_or_values, k, alphas, pi=None, point=None):
    if k == 2:
        a1, a2 = alphas
        return a1 @ mat_or_values @ a2
    # general degree: sum over index tuples with determinant contraction
    values = pi.values_at(point)
    total = 0.0 + 0.0j
    for idx, c in values.items():
        det = 0.0 + 0.0j
        for perm in itertools.permutations(range(k)):
            s = _perm_sign(perm)
            prod = 1.0 + 0.0j
            for a, b in enumerate(perm):
                prod *= alphas[b][idx[a]]
            det += s * prod
        total += c * det
    return total


def reduce_at(pi_q: MultiVectorField, n: Submanifold, proj: ChartMap, x,
              alphas, sign_convention="direct", tol=1e-8, seed=7,
              on_tol=1e-8):
    """Value of the reduced k-vector on quotient covectors at proj(x).

    The two lift choices must agree to `tol`; disagreement means the
    reduction hypotheses fail at x and raises ReductionHypothesisViolated.
    `sign_convention`: "direct" evaluates pi_Q on the lifts as is; "graded"
    multiplies by (-1)^(k+1) (the two conventions that appear for the
    feedback identity; reports record which one was used).
    """
    k = pi_q.degree
    if len(alphas) != k:
        raise ChartError("need one covector per degree slot")
    if not n.on_manifold(x, on_tol):
        raise ChartError("base point is not on the submanifold")
    rng = SplitMix64(seed)
    lifts_a = [_lift_covector(n, proj, x, a) for a in alphas]
    lifts_b = [_lift_covector(n, proj, x, a, rng) for a in alphas]
    if k == 2:
        m = pi_q.matrix_at(x)
        va = _numeric_apply(m, 2, lifts_a)
        vb = _numeric_apply(m, 2, lifts_b)
    else:
        va = _numeric_apply(None, k, lifts_a, pi_q, x)
        vb = _numeric_apply(None, k, lifts_b, pi_q, x)
    if abs(va - vb) > tol * (1.0 + abs(va)):
        diag = _condition1_residual(pi_q, n, x, proj)
        raise ReductionHypothesisViolated(
            f"lift-dependent value ({va:.6g} vs {vb:.6g}); "
            f"condition-1 residual ~ {diag:.3e} at the point")
    s = 1.0 if sign_convention == "direct" else (-1.0) ** (k + 1)
    return s * va


def _condition1_residual(pi_q, n, x, proj):
    """Max |pi_Q(lift-frame..., dG)| - the Lemma's first hypothesis."""
    if not n.generators or pi_q.degree != 2:
        return float("nan")
    m = pi_q.matrix_at(x)
    jg = n.generator_jacobian(x)
    dproj = proj.jacobian_at(x)
    worst = 0.0
    for row in dproj:            # covectors spanning (ker dPhi)^perp, roughly
        for g in jg:
            worst = max(worst, abs(row @ m @ g))
    return worst


def reduced_bivector_at(pi_q, n, proj, x, sign_convention="direct", tol=1e-8,
                        seed=7):
    """Full reduced bivector matrix at proj(x), one reduce_at per entry pair."""
    q = proj.target.dim
    out = np.zeros((q, q), dtype=complex)
    eye = np.eye(q)
    for i in range(q):
        for j in range(i + 1, q):
            v = reduce_at(pi_q, n, proj, x, (eye[i], eye[j]),
                          sign_convention, tol, seed)
            out[i, j] = v
            out[j, i] = -v
    return out


# -- complex chart realification ----------------------------------------------


def realify_chart(chart: Chart, suffixes=("_re", "_im")):
    """Real chart plus the substitution complex var -> x + i y."""
    entries = []
    subs = {}
    for name, kind in chart.vars:
        if kind == "real":
            entries.append((name, "real"))
        else:
            re_n, im_n = name + suffixes[0], name + suffixes[1]
            entries.append((re_n, "real"))
            entries.append((im_n, "real"))
            subs[name] = sx.add(sx.var(re_n),
                                sx.mul(sx.imag_unit(), sx.var(im_n)))
    nonzero = [sx.substitute(g, subs) for g in chart.nonzero]
    return Chart(chart.name + "_real", VarTable(entries), nonzero), subs


def _wirtinger_slots(chart):
    """Per Wirtinger slot: (real index pair or single, is_antiholomorphic)."""
    slots = []
    real_chart, _ = realify_chart(chart)
    pos = 0
    for name, kind in chart.vars:
        if kind == "real":
            slots.append(("real", pos))
            pos += 1
        else:
            slots.append(("holo", pos))
            slots.append(("anti", pos))
            pos += 2
    return slots


def realify_bivector(chart: Chart, wirtinger_coeffs) -> MultiVectorField:
    """Expand a Wirtinger-basis bivector to the realified chart.

    `wirtinger_coeffs`: {(slot_i, slot_j): Expr over the complex chart} where
    slots enumerate (z_1, zbar_1, z_2, zbar_2, ...) for complex variables and
    single slots for real ones.  Uses d/dz = (d/dx - i d/dy)/2.
    """
    real_chart, subs = realify_chart(chart)
    slots = _wirtinger_slots(chart)
    half = sx.rational(1, 2)
    mi_half = sx.mul(sx.imag_unit(), sx.rational(-1, 2))
    pi_half = sx.mul(sx.imag_unit(), sx.rational(1, 2))

    def expansion(slot):
        kind, pos = slots[slot]
        if kind == "real":
            return [(pos, sx.rational(1))]
        if kind == "holo":
            return [(pos, half), (pos + 1, mi_half)]
        return [(pos, half), (pos + 1, pi_half)]

    coeffs = {}
    for (i, j), e in wirtinger_coeffs.items():
        er = sx.substitute(e, subs)
        for (p, cp) in expansion(i):
            for (q, cq) in expansion(j):
                if p == q:
                    continue
                term = sx.mul(er, cp, cq)
                key = (p, q)
                coeffs[key] = sx.add(coeffs[key], term) if key in coeffs else term
    return MultiVectorField(real_chart, 2, coeffs)


def realify_form(chart: Chart, wirtinger_coeffs) -> DifferentialForm:
    """Expand a Wirtinger-basis 2-form (dz = dx + i dy) to the real chart."""
    real_chart, subs = realify_chart(chart)
    slots = _wirtinger_slots(chart)
    i_unit = sx.imag_unit()

    def expansion(slot):
        kind, pos = slots[slot]
        if kind == "real":
            return [(pos, sx.rational(1))]
        if kind == "holo":
            return [(pos, sx.rational(1)), (pos + 1, i_unit)]
        return [(pos, sx.rational(1)), (pos + 1, sx.neg(i_unit))]

    coeffs = {}
    for (i, j), e in wirtinger_coeffs.items():
        er = sx.substitute(e, subs)
        for (p, cp) in expansion(i):
            for (q, cq) in expansion(j):
                if p == q:
                    continue
                term = sx.mul(er, cp, cq)
                key = (p, q)
                coeffs[key] = sx.add(coeffs[key], term) if key in coeffs else term
    return DifferentialForm(real_chart, 2, coeffs)


def realify_map_component(comp, subs):
    """Split a complex-valued component over real vars into (re, im) Exprs."""
    e = sx.substitute(comp, subs)
    return sx.expand_re_im(sx.re_part(e)), sx.expand_re_im(sx.im_part(e))


def realify_chart_map(m: ChartMap) -> ChartMap:
    """Realify source and target of a map between complex charts."""
    src_real, src_subs = realify_chart(m.source)
    tgt_real, _ = realify_chart(m.target)
    comps = []
    for comp, (name, kind) in zip(m.components, m.target.vars):
        if kind == "real":
            comps.append(sx.substitute(comp, src_subs))
        else:
            re_e, im_e = realify_map_component(comp, src_subs)
            comps.extend([re_e, im_e])
    return ChartMap(src_real, tgt_real, comps)
