"""Catalog of explicit Lie groupoids and their verification campaigns."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import symexpr as sx
from . import tensorfield as tf
from .liealg import LieAlgebraSL, exact_kernel
from .report import FAIL, PASS, PROVEN, UNKNOWN_ESCALATED, CheckRecord, Report, Witness
from .rng import SplitMix64, substream
from .symexpr import VarTable
from .tensorfield import (Chart, ChartMap, DifferentialForm, MultiVectorField,
                          Submanifold)


class NumericBivector:
    """Bivector known only through point evaluation (degree-2 duck type)."""

    def __init__(self, chart, matrix_fn, name="numeric"):
        self.chart = chart
        self.degree = 2
        self._fn = matrix_fn
        self.name = name

    def matrix_at(self, point):
        return self._fn(point)


# -- matrices of expressions -------------------------------------------------


def emat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sx.add(*[sx.mul(a[i][l], b[l][j]) for l in range(k)])
             for j in range(m)] for i in range(n)]


def emat_sub(a, b):
    return [[sx.add(x, sx.neg(y)) for x, y in zip(ra, rb)]
            for ra, rb in zip(a, b)]


def emat_identity(n):
    return [[sx.rational(1 if i == j else 0) for j in range(n)]
            for i in range(n)]


def emat_scale(a, c):
    return [[sx.mul(c, x) for x in row] for row in a]


def emat_from_fractions(m):
    return [[sx.rational(Fraction(x)) for x in row] for row in m]


# -- LDU big-cell charts for SL_n ---------------------------------------------


def ldu_entries(n, names):
    """Matrix entries of the LDU big-cell parametrization as Exprs."""
    v = {nm: sx.var(nm) for nm in names}
    if n == 2:
        l, d, u = v[names[0]], v[names[1]], v[names[2]]
        L = [[sx.rational(1), sx.rational(0)], [l, sx.rational(1)]]
        D = [[d, sx.rational(0)], [sx.rational(0), sx.recip(d)]]
        U = [[sx.rational(1), u], [sx.rational(0), sx.rational(1)]]
        return emat_mul(emat_mul(L, D), U)
    if n == 3:
        l1, l2, l3, d1, d2, u1, u2, u3 = (v[nm] for nm in names)
        L = [[sx.rational(1), sx.rational(0), sx.rational(0)],
             [l1, sx.rational(1), sx.rational(0)],
             [l2, l3, sx.rational(1)]]
        D = [[d1, sx.rational(0), sx.rational(0)],
             [sx.rational(0), d2, sx.rational(0)],
             [sx.rational(0), sx.rational(0), sx.recip(sx.mul(d1, d2))]]
        U = [[sx.rational(1), u1, u2],
             [sx.rational(0), sx.rational(1), u3],
             [sx.rational(0), sx.rational(0), sx.rational(1)]]
        return emat_mul(emat_mul(L, D), U)
    raise ValueError("LDU charts implemented for n in {2, 3}")


def ldu_var_names(n, prefix=""):
    if n == 2:
        return [prefix + s for s in ("l", "d", "u")]
    return [prefix + s for s in ("l1", "l2", "l3", "d1", "d2", "u1", "u2", "u3")]


def ldu_coords_of(m, n):
    """LDU chart coordinates of an SL_n matrix of Exprs (big cell)."""
    if n == 2:
        a = m[0][0]
        return [sx.mul(m[1][0], sx.recip(a)), a, sx.mul(m[0][1], sx.recip(a))]
    if n == 3:
        a = m[0][0]
        minor2 = sx.add(sx.mul(m[0][0], m[1][1]), sx.neg(sx.mul(m[0][1], m[1][0])))
        inv_a = sx.recip(a)
        inv_m2 = sx.recip(minor2)
        l1 = sx.mul(m[1][0], inv_a)
        l2 = sx.mul(m[2][0], inv_a)
        l3 = sx.mul(sx.add(sx.mul(m[0][0], m[2][1]),
                           sx.neg(sx.mul(m[0][1], m[2][0]))), inv_m2)
        d1 = a
        d2 = sx.mul(minor2, inv_a)
        u1 = sx.mul(m[0][1], inv_a)
        u2 = sx.mul(m[0][2], inv_a)
        u3 = sx.mul(sx.add(sx.mul(m[0][0], m[1][2]),
                           sx.neg(sx.mul(m[0][2], m[1][0]))), inv_m2)
        return [l1, l2, l3, d1, d2, u1, u2, u3]
    raise ValueError("n in {2, 3}")


def unimodular_inverse(m):
    """Adjugate inverse; valid where det = 1 (our SL charts)."""
    n = len(m)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[m[r][c] for c in range(n) if c != i]
                   for r in range(n) if r != j]
            d = tf._sym_det(sub) if n > 1 else sx.rational(1)
            out[i][j] = d if (i + j) % 2 == 0 else sx.neg(d)
    return out


def ldu_unit_coords(n):
    if n == 2:
        return [0, 1, 0]
    return [0, 0, 0, 1, 1, 0, 0, 0]


def expr_coords_of(alg: LieAlgebraSL, m):
    """Basis coefficients of a traceless matrix of Exprs (mirrors coords_of)."""
    out = [None] * alg.dim
    for (i, j), idx in alg.offdiag_index.items():
        out[idx] = m[i][j]
    partial = None
    for i in range(alg.n - 1):
        partial = m[i][i] if partial is None else sx.add(partial, m[i][i])
        out[alg.n * (alg.n - 1) + i] = partial
    return out


def expr_matrix_of(alg: LieAlgebraSL, coords):
    out = [[sx.rational(0)] * alg.n for _ in range(alg.n)]
    for c, b in zip(coords, alg.basis):
        for i in range(alg.n):
            for j in range(alg.n):
                if b[i][j]:
                    out[i][j] = sx.add(out[i][j], sx.mul(sx.rational(b[i][j]), c))
    return out


# -- groupoid entries ---------------------------------------------------------


@dataclass
class GroupoidEntry:
    name: str
    base: Chart
    total: Chart
    source: ChartMap
    target: ChartMap
    unit: ChartMap
    inverse: ChartMap
    pair_chart: Chart
    product: ChartMap            # pair chart -> total chart
    s_proj_indices: tuple        # source is projection onto these total coords
    omega: DifferentialForm = None
    pi_total: object = None      # MultiVectorField or NumericBivector
    pi_base: MultiVectorField = None
    metadata: dict = field(default_factory=dict)

    def pair_point(self, g1, g2):
        return tuple(g1) + tuple(g2)

    def sample_arrow(self, rng, spread=1.0):
        return self.total.sample_point(rng, spread)

    def arrow_over(self, rng, base_point, spread=1.0, tries=80):
        """Sample an arrow with s(arrow) = base_point (exact projection)."""
        for _ in range(tries):
            pt = list(self.total.sample_point(rng, spread))
            for slot, idx in enumerate(self.s_proj_indices):
                pt[idx] = base_point[slot]
            pt = tuple(pt)
            if self.total.in_domain(pt, 1e-3):
                return pt
        raise tf.SamplingError(f"no arrow over the requested base point "
                               f"({self.name})")

    def composable_pair(self, rng, spread=1.0, tries=80):
        for _ in range(tries):
            g1 = self.sample_arrow(rng, spread)
            t1 = self.target.at(g1)
            try:
                g2 = self.arrow_over(rng, t1, spread)
            except tf.SamplingError:
                continue
            prod = self.product.at(self.pair_point(g1, g2))
            if self.total.in_domain(prod, 1e-3):
                return g1, g2
        raise tf.SamplingError(f"cannot sample composable pairs ({self.name})")

    def composable_triple(self, rng, spread=0.8, tries=80):
        for _ in range(tries):
            g1, g2 = self.composable_pair(rng, spread)
            t2 = self.target.at(g2)
            try:
                g3 = self.arrow_over(rng, t2, spread)
            except tf.SamplingError:
                continue
            p12 = self.product.at(self.pair_point(g1, g2))
            p23 = self.product.at(self.pair_point(g2, g3))
            if self.total.in_domain(p12, 1e-3) and self.total.in_domain(p23, 1e-3):
                a = self.product.at(self.pair_point(p12, g3))
                b = self.product.at(self.pair_point(g1, p23))
                if self.total.in_domain(a, 1e-3) and self.total.in_domain(b, 1e-3):
                    return g1, g2, g3
        raise tf.SamplingError(f"cannot sample composable triples ({self.name})")

    def bivector_matrix(self, point):
        if self.pi_total is not None:
            return self.pi_total.matrix_at(point)
        if self.omega is not None:
            return tf.invert_form_at(self.omega, point)
        raise ValueError(f"entry {self.name} carries no bivector data")


@dataclass(frozen=True)
class CatalogKey:
    kind: str                    # dazord | cotangent_sl | conjugation_sl
    n: int = 0

    @classmethod
    def parse(cls, text):
        t = text.strip().lower().replace("_", "-")
        if t == "dazord":
            return cls("dazord")
        for kind in ("cotangent-sl", "conjugation-sl"):
            if t.startswith(kind):
                return cls(kind.replace("-", "_"), int(t[len(kind):]))
        raise ValueError(f"unknown catalog key {text!r}")

    def __str__(self):
        if self.kind == "dazord":
            return "dazord"
        return f"{self.kind.replace('_sl', '-sl')}{self.n}"


CATALOG_KEYS = ("dazord", "cotangent-sl2", "cotangent-sl3", "conjugation-sl2")


def _prefix_chart(chart, prefix):
    vt = VarTable([(prefix + n, k) for n, k in chart.vars])
    ren = {n: sx.var(prefix + n, k) for n, k in chart.vars}
    nonzero = [sx.substitute(g, ren) for g in chart.nonzero]
    return Chart(prefix + chart.name, vt, nonzero), ren


def pair_chart_of(total):
    c1, r1 = _prefix_chart(total, "a_")
    c2, r2 = _prefix_chart(total, "b_")
    vt = VarTable(list(c1.vars) + list(c2.vars))
    return Chart("pair_" + total.name, vt, c1.nonzero + c2.nonzero), r1, r2


def triple_chart_of(total):
    charts = [_prefix_chart(total, p) for p in ("a_", "b_", "c_")]
    vt = VarTable([e for c, _ in charts for e in c.vars])
    nz = tuple(g for c, _ in charts for g in c.nonzero)
    return Chart("triple_" + total.name, vt, nz), [r for _, r in charts]


# -- catalog: Dazord groupoid over ({x,y} = x^2+y^2) --------------------------


def _dazord_entry():
    base_c = Chart("plane", VarTable.complexes("z"))
    tot_c = Chart("dazord", VarTable.complexes("Z", "z"))
    Z = sx.var("Z", "complex")
    z = sx.var("z", "complex")
    cz, cZ = sx.cvar("z"), sx.cvar("Z")

    base, _ = tf.realify_chart(base_c)
    total, subs = tf.realify_chart(tot_c)

    source = ChartMap(total, base, [sx.var("z_re"), sx.var("z_im")])
    t_c = sx.mul(sx.exp(sx.mul(Z, cz)), z)
    t_re, t_im = tf.realify_map_component(t_c, subs)
    target = ChartMap(total, base, [t_re, t_im])
    unit = ChartMap(base, total, [sx.rational(0), sx.rational(0),
                                  sx.var("z_re"), sx.var("z_im")])
    inv_Z = sx.neg(sx.mul(sx.exp(sx.neg(sx.mul(cZ, z))), Z))
    inv_z = sx.mul(sx.exp(sx.mul(Z, cz)), z)
    iZ_re, iZ_im = tf.realify_map_component(inv_Z, subs)
    iz_re, iz_im = tf.realify_map_component(inv_z, subs)
    inverse = ChartMap(total, total, [iZ_re, iZ_im, iz_re, iz_im])

    pair, r1, r2 = pair_chart_of(total)
    pair_subs = {"Z": sx.add(sx.var("a_Z_re"), sx.mul(sx.imag_unit(), sx.var("a_Z_im"))),
                 "z": sx.add(sx.var("a_z_re"), sx.mul(sx.imag_unit(), sx.var("a_z_im")))}
    Z2 = sx.add(sx.var("b_Z_re"), sx.mul(sx.imag_unit(), sx.var("b_Z_im")))
    prod_Z = sx.add(sx.substitute(Z, pair_subs),
                    sx.mul(sx.exp(sx.substitute(sx.mul(cZ, z), pair_subs)), Z2))
    pZ_re = sx.expand_re_im(sx.re_part(prod_Z))
    pZ_im = sx.expand_re_im(sx.im_part(prod_Z))
    product = ChartMap(pair, total, [pZ_re, pZ_im, sx.var("a_z_re"),
                                     sx.var("a_z_im")])

    i2 = sx.mul(sx.imag_unit(), sx.rational(2))
    mih = sx.mul(sx.imag_unit(), sx.rational(-1, 2))
    pih = sx.mul(sx.imag_unit(), sx.rational(1, 2))
    pi_w = {
        (0, 1): sx.mul(i2, Z, cZ),
        (0, 2): sx.mul(sx.neg(i2), z, Z),
        (0, 3): i2,
        (1, 2): sx.neg(i2),
        (1, 3): sx.mul(i2, cz, cZ),
        (2, 3): sx.mul(sx.neg(i2), z, cz),
    }
    om_w = {
        (0, 1): sx.mul(mih, z, cz),
        (0, 2): sx.mul(mih, cz, cZ),
        (1, 3): sx.mul(pih, z, Z),
        (2, 3): sx.mul(pih, Z, cZ),
        (0, 3): mih,
        (1, 2): pih,
    }
    pi_total = tf.realify_bivector(tot_c, pi_w).map_coeffs(sx.expand)
    omega = tf.realify_form(tot_c, om_w).map_coeffs(sx.expand)
    pi_base = tf.mvf_from_text(base, 2, {("z_re", "z_im"): "z_re^2 + z_im^2"})

    return GroupoidEntry(
        name="dazord", base=base, total=total, source=source, target=target,
        unit=unit, inverse=inverse, pair_chart=pair, product=product,
        s_proj_indices=(2, 3), omega=omega, pi_total=pi_total, pi_base=pi_base,
        metadata={
            "note": "symplectic data rederived from the pushforward and "
                    "fiber-orthogonality constraints; see README",
        })


# -- catalog: cotangent groupoid of sl_n --------------------------------------


def lie_poisson_bivector(alg: LieAlgebraSL, chart, coord_names):
    """Linear +KKS Poisson structure in basis coordinates on g ~ g*."""
    k = alg.killing_matrix()
    kinv = _exact_inverse(k)
    coeffs = {}
    cvars = [sx.var(nm) for nm in coord_names]
    idx = [chart.vars.index[nm] for nm in coord_names]
    for a in range(alg.dim):
        xa = alg.matrix_of([kinv[r][a] for r in range(alg.dim)])
        for b in range(a + 1, alg.dim):
            xb = alg.matrix_of([kinv[r][b] for r in range(alg.dim)])
            br = alg.coords_of(_fr_bracket(xa, xb))
            terms = []
            for r in range(alg.dim):
                coeff = sum(Fraction(br[s]) * k[s][r] for s in range(alg.dim))
                if coeff:
                    terms.append(sx.mul(sx.rational(coeff), cvars[r]))
            if terms:
                coeffs[(idx[a], idx[b])] = sx.add(*terms)
    return MultiVectorField(chart, 2, coeffs)


def _fr_bracket(a, b):
    from .liealg import bracket
    return bracket(a, b)


def _exact_inverse(m):
    n = len(m)
    aug = [[Fraction(m[i][j]) for j in range(n)] +
           [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c])
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [[aug[i][n + j] for j in range(n)] for i in range(n)]


def _cotangent_entry(n, lambda_sign=-1):
    alg = LieAlgebraSL(n)
    gnames = ldu_var_names(n)
    cnames = [f"c{k + 1}" for k in range(alg.dim)]
    nonzero_names = ["d"] if n == 2 else ["d1", "d2"]
    vt = VarTable([(nm, "real") for nm in gnames + cnames])
    total = Chart(f"cotangent_sl{n}", vt,
                  [sx.var(nm) for nm in nonzero_names])
    base = Chart(f"sl{n}", VarTable([(nm, "real") for nm in cnames]))

    g = ldu_entries(n, gnames)
    ginv = unimodular_inverse(g)
    xi = expr_matrix_of(alg, [sx.var(nm) for nm in cnames])

    source = ChartMap(total, base, [sx.var(nm) for nm in cnames])
    t_mat = emat_mul(emat_mul(ginv, xi), g)
    target = ChartMap(total, base, expr_coords_of(alg, t_mat))
    unit = ChartMap(base, total,
                    [sx.rational(v) for v in ldu_unit_coords(n)] +
                    [sx.var(nm) for nm in cnames])
    inv_g_coords = ldu_coords_of(ginv, n)
    inverse = ChartMap(total, total, inv_g_coords + expr_coords_of(alg, t_mat))

    pair, _, _ = pair_chart_of(total)
    g1 = ldu_entries(n, ["a_" + nm for nm in gnames])
    g2 = ldu_entries(n, ["b_" + nm for nm in gnames])
    prod_g = emat_mul(g1, g2)
    product = ChartMap(pair, total, ldu_coords_of(prod_g, n) +
                       [sx.var("a_" + nm) for nm in cnames])

    # tautological 1-form in the right trivialization:
    # lambda = sign * K(xi, dg g^{-1}); omega = d lambda.  The sign -1 makes
    # s_* invert to the +KKS Lie-Poisson structure under Pi = -W^{-1}.
    kappa = 2 * n
    gi_xi = emat_mul(ginv, xi)
    lam = {}
    for a in range(n):
        for b in range(n):
            coeff = sx.mul(sx.rational(lambda_sign * kappa), gi_xi[b][a])
            for vi, vname in enumerate(gnames):
                d_entry = sx.diff(g[a][b], sx.var(vname))
                if d_entry.kind == "const" and d_entry.payload.is_zero:
                    continue
                key = (vt.index[vname],)
                term = sx.mul(coeff, d_entry)
                lam[key] = sx.add(lam[key], term) if key in lam else term
    lam_form = DifferentialForm(total, 1, lam)
    omega = tf.exterior_derivative(lam_form).map_coeffs(sx.expand)
    pi_base = lie_poisson_bivector(alg, base, cnames)

    return GroupoidEntry(
        name=f"cotangent-sl{n}", base=base, total=total, source=source,
        target=target, unit=unit, inverse=inverse, pair_chart=pair,
        product=product,
        s_proj_indices=tuple(vt.index[nm] for nm in cnames),
        omega=omega, pi_base=pi_base,
        metadata={"algebra": f"sl{n}", "trivialization": "right",
                  "lambda_sign": lambda_sign})


# -- catalog: conjugation groupoid with the Evens-Lu base structure ----------


def _tangent_component_exprs(n, names):
    """Coordinate components of a matrix tangent M at h in the LDU chart.

    Returns a function mapping a matrix of Exprs (the tangent) to chart
    components, via the explicit inverse of the parametrization.
    """
    h = ldu_entries(n, names)
    if n == 2:
        h11, h12, h21 = h[0][0], h[0][1], h[1][0]
        inv11 = sx.recip(h11)
        inv11sq = sx.recip(sx.pow_int(h11, 2))

        def components(m):
            dd = m[0][0]
            du = sx.mul(sx.add(sx.mul(m[0][1], h11), sx.neg(sx.mul(h12, m[0][0]))),
                        inv11sq)
            dl = sx.mul(sx.add(sx.mul(m[1][0], h11), sx.neg(sx.mul(h21, m[0][0]))),
                        inv11sq)
            return [dl, dd, du]    # order (l, d, u)

        return components
    raise ValueError("tangent components implemented for n = 2")


def evens_lu_dual_pairs(n):
    """Dual bases of g*_st and g_Delta for the standard Manin triple.

    Pairs (e_i, eps_i) with e_i = (a, b), eps_i = (c, d) in g + g and
    <(a,b),(c,d)> = K(a,c) - K(b,d) = delta.  All entries exact rational.
    """
    alg = LieAlgebraSL(n)
    k = alg.killing_matrix()
    pairs = []
    # Cartan block: e_i = (h_i, -h_i), eps_i = (w_i, w_i), 2 K(h_i, w_j) = delta
    cart = list(range(n * (n - 1), alg.dim))
    gram = [[k[i][j] for j in cart] for i in cart]
    gram_inv = _exact_inverse(gram)
    hs = [alg.basis[i] for i in cart]
    for i in range(n - 1):
        w = [[Fraction(0)] * n for _ in range(n)]
        for j in range(n - 1):
            c = gram_inv[j][i] / 2
            if c:
                for a in range(n):
                    for b in range(n):
                        w[a][b] += c * hs[j][a][b]
        pairs.append(((hs[i], emat_neg_fr(hs[i])), (w, w)))
    # root blocks: K(E_ij, E_ji) = 2n, so E_{-alpha} = E_ji / (2n)
    inv2n = Fraction(1, 2 * n)
    for i in range(n):
        for j in range(i + 1, n):
            e_a = _unit_matrix(n, i, j)
            e_ma = emat_scale_fr(_unit_matrix(n, j, i), inv2n)
            zero = [[Fraction(0)] * n for _ in range(n)]
            pairs.append(((zero, emat_neg_fr(e_ma)), (e_a, e_a)))
            pairs.append(((e_a, zero), (e_ma, e_ma)))
    _assert_dual(alg, pairs)
    return pairs


def _unit_matrix(n, i, j):
    m = [[Fraction(0)] * n for _ in range(n)]
    m[i][j] = Fraction(1)
    return m


def emat_neg_fr(m):
    return [[-x for x in row] for row in m]


def emat_scale_fr(m, c):
    return [[c * x for x in row] for row in m]


def _assert_dual(alg, pairs):
    for i, (e_i, _) in enumerate(pairs):
        for j, (_, eps_j) in enumerate(pairs):
            val = alg.killing(e_i[0], eps_j[0]) - alg.killing(e_i[1], eps_j[1])
            expect = Fraction(1 if i == j else 0)
            if val != expect:
                raise AssertionError(f"dual basis pairing failed at {i},{j}")


def evens_lu_bivector(n) -> MultiVectorField:
    """Base Poisson structure pi = -sum (e_i)_S ^ (eps_i)_S on SL_n.

    (X, Y)_S = X^L - Y^R, i.e. h X - Y h at the point h.
    """
    if n != 2:
        raise ValueError("the conjugation catalog is desk-scale: n = 2")
    names = ldu_var_names(n, "h")
    chart = Chart(f"conj_base_sl{n}", VarTable([(nm, "real") for nm in names]),
                  [sx.var(names[1])])
    h = ldu_entries(n, names)
    comps = _tangent_component_exprs(n, names)
    coeffs = {}
    for (a, b), (c, d) in evens_lu_dual_pairs(n):
        v = comps(emat_sub(emat_mul(h, emat_from_fractions(a)),
                           emat_mul(emat_from_fractions(b), h)))
        w = comps(emat_sub(emat_mul(h, emat_from_fractions(c)),
                           emat_mul(emat_from_fractions(d), h)))
        for p in range(3):
            for q in range(p + 1, 3):
                term = sx.add(sx.mul(v[p], w[q]), sx.neg(sx.mul(v[q], w[p])))
                term = sx.neg(term)
                key = (p, q)
                coeffs[key] = sx.add(coeffs[key], term) if key in coeffs else term
    return MultiVectorField(chart, 2, {k: sx.expand(e) for k, e in coeffs.items()})


def _conjugation_entry(n):
    if n != 2:
        raise ValueError("conjugation catalog entry supports n = 2")
    gnames = ldu_var_names(n, "g")
    hnames = ldu_var_names(n, "h")
    vt = VarTable([(nm, "real") for nm in gnames + hnames])
    total = Chart(f"conjugation_sl{n}", vt,
                  [sx.var("gd"), sx.var("hd")])
    pi_base = evens_lu_bivector(n)
    base = pi_base.chart

    g = ldu_entries(n, gnames)
    h = ldu_entries(n, hnames)
    ginv = unimodular_inverse(g)
    t_mat = emat_mul(emat_mul(ginv, h), g)

    source = ChartMap(total, base, [sx.var(nm) for nm in hnames])
    target = ChartMap(total, base, ldu_coords_of(t_mat, n))
    unit = ChartMap(base, total,
                    [sx.rational(v) for v in ldu_unit_coords(n)] +
                    [sx.var(nm) for nm in hnames])
    inverse = ChartMap(total, total,
                       ldu_coords_of(ginv, n) + ldu_coords_of(t_mat, n))
    pair, _, _ = pair_chart_of(total)
    g1 = ldu_entries(n, ["a_" + nm for nm in gnames])
    g2 = ldu_entries(n, ["b_" + nm for nm in gnames])
    product = ChartMap(pair, total,
                       ldu_coords_of(emat_mul(g1, g2), n) +
                       [sx.var("a_" + nm) for nm in hnames])
    return GroupoidEntry(
        name=f"conjugation-sl{n}", base=base, total=total, source=source,
        target=target, unit=unit, inverse=inverse, pair_chart=pair,
        product=product,
        s_proj_indices=tuple(vt.index[nm] for nm in hnames),
        pi_base=pi_base,
        metadata={"multiplicative_lift": "not implemented (external source); "
                                         "base-level consequences verified"})


_CACHE = {}


def catalog(key) -> GroupoidEntry:
    """Populate a catalog entry; keys per CatalogKey.parse."""
    if isinstance(key, str):
        key = CatalogKey.parse(key)
    if key in _CACHE:
        return _CACHE[key]
    if key.kind == "dazord":
        entry = _dazord_entry()
    elif key.kind == "cotangent_sl":
        if key.n not in (2, 3):
            raise ValueError("cotangent catalog supports n in {2, 3}")
        entry = _cotangent_entry(key.n)
    elif key.kind == "conjugation_sl":
        entry = _conjugation_entry(key.n)
    else:
        raise ValueError(f"unknown catalog kind {key.kind}")
    _CACHE[key] = entry
    return entry


# -- verification campaigns ---------------------------------------------------


def verify_axioms(entry: GroupoidEntry, samples=200, tol=1e-9, seed=42) -> Report:
    """The nine groupoid identities at seeded composable tuples."""
    rep = Report(campaign_id="groupoid_axioms", target=entry.name, seed=seed)
    names = ("source_of_product", "target_of_product", "associativity",
             "left_unit", "right_unit", "inverse_right", "inverse_left",
             "inverse_antihomomorphism", "unit_section")
    worst = {nm: 0.0 for nm in names}
    wits = {nm: [] for nm in names}
    used = 0
    for i in range(samples):
        rng = substream(seed, i)
        try:
            g1, g2, g3 = entry.composable_triple(rng)
        except tf.SamplingError as err:
            rep.add(CheckRecord(name="sampling", status=FAIL,
                                witnesses=[Witness((), 0.0, str(err))],
                                note="composable-tuple sampling failed"))
            return rep
        used += 1
        p12 = entry.product.at(entry.pair_point(g1, g2))
        p23 = entry.product.at(entry.pair_point(g2, g3))

        def upd(nm, a, b, where):
            r = max(abs(x - y) for x, y in zip(a, b))
            if r > worst[nm]:
                worst[nm] = r
            if r > tol and len(wits[nm]) < 3:
                wits[nm].append(Witness(where, r, nm))

        upd("source_of_product", entry.source.at(p12), entry.source.at(g1), g1)
        upd("target_of_product", entry.target.at(p12), entry.target.at(g2), g2)
        upd("associativity",
            entry.product.at(entry.pair_point(p12, g3)),
            entry.product.at(entry.pair_point(g1, p23)), g1)
        eps_s = entry.unit.at(entry.source.at(g1))
        eps_t = entry.unit.at(entry.target.at(g1))
        upd("left_unit", entry.product.at(entry.pair_point(eps_s, g1)), g1, g1)
        upd("right_unit", entry.product.at(entry.pair_point(g1, eps_t)), g1, g1)
        inv1 = entry.inverse.at(g1)
        upd("inverse_right", entry.product.at(entry.pair_point(g1, inv1)),
            eps_s, g1)
        upd("inverse_left", entry.product.at(entry.pair_point(inv1, g1)),
            eps_t, g1)
        upd("inverse_antihomomorphism",
            entry.inverse.at(p12),
            entry.product.at(entry.pair_point(entry.inverse.at(g2),
                                              entry.inverse.at(g1))), g1)
        m = entry.source.at(g1)
        em = entry.unit.at(m)
        upd("unit_section",
            tuple(entry.source.at(em)) + tuple(entry.target.at(em)),
            tuple(m) + tuple(m), m)
    for nm in names:
        rep.add(CheckRecord(name=nm, status=PASS if worst[nm] <= tol else FAIL,
                            max_residual=worst[nm], samples_used=used,
                            witnesses=wits[nm]))
    return rep


def multiplication_graph(entry: GroupoidEntry):
    """Gr = {(g1, g2, g1 g2)} in Gamma^3 with generators and a sampler."""
    triple, renames = triple_chart_of(entry.total)
    ra, rb, rc = renames
    prod_re = [sx.substitute(sx.substitute(comp, _shift(ra, "a_")),
                             _shift(rb, "b_"))
               for comp in entry.product.components]
    gens = []
    for comp, cname in zip(prod_re, entry.total.vars.names):
        gens.append(sx.add(comp, sx.neg(sx.var("c_" + cname))))
    s_b = [sx.substitute(c, _shift(rb, "b_")) for c in entry.source.components]
    t_a = [sx.substitute(c, _shift(ra, "a_")) for c in entry.target.components]
    gens.extend(sx.add(sb, sx.neg(ta)) for sb, ta in zip(s_b, t_a))

    def sampler(rng):
        g1, g2 = entry.composable_pair(rng)
        g12 = entry.product.at(entry.pair_point(g1, g2))
        return tuple(g1) + tuple(g2) + tuple(g12)

    sub = Submanifold(triple, generators=gens, name=f"Gr({entry.name})")
    return triple, sub, sampler


def _shift(rename, prefix):
    # rename maps total-chart names to prefixed var exprs already
    return {n: v for n, v in rename.items()}


def verify_multiplicativity(entry: GroupoidEntry, samples=120, tol=1e-8,
                            seed=43, field=None, multipliers=12) -> Report:
    """Coisotropy of the multiplication graph for pi + pi + (-1)^(k+1) pi."""
    rep = Report(campaign_id="multiplicativity", target=entry.name, seed=seed)
    triple, sub, sampler = multiplication_graph(entry)
    k = 2

    def fld(point):
        d = entry.total.dim
        m = np.zeros((3 * d, 3 * d), dtype=complex)
        if field is not None:
            g1m = field.matrix_at(point[:d])
            g2m = field.matrix_at(point[d:2 * d])
            g3m = field.matrix_at(point[2 * d:])
        else:
            g1m = entry.bivector_matrix(point[:d])
            g2m = entry.bivector_matrix(point[d:2 * d])
            g3m = entry.bivector_matrix(point[2 * d:])
        m[:d, :d] = g1m
        m[d:2 * d, d:2 * d] = g2m
        m[2 * d:, 2 * d:] = ((-1) ** (k + 1)) * g3m
        return m

    big = NumericBivector(triple, fld, name="pi++pi++-pi")
    rec = coisotropy_campaign(big, sub, sampler, samples=samples, tol=tol,
                              seed=seed, multipliers=multipliers)
    rep.add(rec)
    return rep


def coisotropy_campaign(pi2, sub: Submanifold, sampler, samples=120, tol=1e-8,
                        seed=43, multipliers=12):
    """Numeric coisotropy residuals for a degree-2 field (matrix-valued)."""
    chart = pi2.chart
    rng0 = SplitMix64(seed ^ 0xC0150)
    gens = sub.generators
    funcs = []
    for a in range(len(gens)):
        for b in range(a, len(gens)):
            funcs.append((gens[a], gens[b], f"generators ({a},{b})"))
    for m in range(multipliers):
        f1 = sx.add(*[sx.mul(tf._random_polynomial(chart, rng0, 1), g)
                      for g in gens])
        f2 = sx.add(*[sx.mul(tf._random_polynomial(chart, rng0, 1), g)
                      for g in gens])
        funcs.append((f1, f2, f"ideal combo {m}"))
    grads = []
    coords = chart.coordinates()
    for f1, f2, label in funcs:
        g1 = sx.compile_exprs([sx.diff(f1, v) for v in coords], chart.vars)
        g2 = sx.compile_exprs([sx.diff(f2, v) for v in coords], chart.vars)
        grads.append((g1, g2, label))
    worst = 0.0
    wits = []
    used = 0
    for i in range(samples):
        rng = substream(seed, i)
        try:
            pt = sampler(rng)
        except tf.SamplingError:
            continue
        used += 1
        m = pi2.matrix_at(pt)
        mnorm = np.max(np.abs(m)) if m.size else 0.0
        for g1f, g2f, label in grads:
            v1 = np.array(g1f(pt))
            v2 = np.array(g2f(pt))
            scale = 1.0 + float(np.max(np.abs(v1)) * mnorm * np.max(np.abs(v2)))
            r = abs(v1 @ m @ v2) / scale
            if r > worst:
                worst = r
            if r > tol and len(wits) < 3:
                wits.append(Witness(pt, r, label))
    if used == 0:
        return CheckRecord(name="coisotropy", status=FAIL,
                           witnesses=[Witness((), 0.0, "no samples produced")],
                           note="sampling failure")
    return CheckRecord(name="coisotropy", status=PASS if worst <= tol else FAIL,
                       max_residual=worst, samples_used=used, witnesses=wits,
                       note="sampled, not proven; scale-normalized residuals")


def pushforward_check(entry: GroupoidEntry, pi_m: MultiVectorField = None,
                      samples=200, tol=1e-8, seed=44) -> Report:
    """s_* pi_Gamma = pi_M and t_* pi_Gamma = -pi_M at seeded arrows."""
    rep = Report(campaign_id="pushforward", target=entry.name, seed=seed)
    pi_m = pi_m or entry.pi_base
    worst_s = worst_t = 0.0
    wits_s, wits_t = [], []
    used = 0
    for i in range(samples):
        rng = substream(seed, i)
        try:
            g = entry.sample_arrow(rng)
        except tf.SamplingError:
            continue
        used += 1
        pig = entry.bivector_matrix(g)
        js = entry.source.jacobian_at(g)
        jt = entry.target.jacobian_at(g)
        ms = js @ pig @ js.T
        mt = jt @ pig @ jt.T
        rs = np.max(np.abs(ms - pi_m.matrix_at(entry.source.at(g))))
        rt = np.max(np.abs(mt + pi_m.matrix_at(entry.target.at(g))))
        if rs > worst_s:
            worst_s = rs
        if rt > worst_t:
            worst_t = rt
        if rs > tol and len(wits_s) < 3:
            wits_s.append(Witness(g, rs, "s-pushforward"))
        if rt > tol and len(wits_t) < 3:
            wits_t.append(Witness(g, rt, "t-pushforward"))
    rep.add(CheckRecord(name="s_pushforward", max_residual=worst_s,
                        status=PASS if worst_s <= tol else FAIL,
                        samples_used=used, witnesses=wits_s))
    rep.add(CheckRecord(name="t_pushforward_signed", max_residual=worst_t,
                        status=PASS if worst_t <= tol else FAIL,
                        samples_used=used, witnesses=wits_t,
                        note="k = 2: t_* pi = -pi_M"))
    return rep


# -- invariant lifts ----------------------------------------------------------


def right_invariant_lift(entry: GroupoidEntry, section, gamma):
    """Right-translate a unit-tangent section to the arrow `gamma`.

    `section(m)` gives a tangent vector (total-chart components) at the unit
    over m, lying in the translatable directions (annihilated by dt there);
    the lift is D_1 product(eps(s(gamma)), gamma) applied to it.
    """
    m = entry.source.at(gamma)
    v = np.asarray(section(m), dtype=complex)
    em = entry.unit.at(m)
    jt = entry.target.jacobian_at(em)
    if np.max(np.abs(jt @ v)) > 1e-6 * max(1.0, np.max(np.abs(v))):
        raise ValueError("section is not in the translatable directions "
                         "(dt at the unit does not annihilate it)")
    jp = entry.product.jacobian_at(entry.pair_point(em, gamma))
    d = entry.total.dim
    return jp[:, :d] @ v


def hamiltonian_section(entry: GroupoidEntry, base_cov_fn):
    """Section m -> pi_Gamma^#(s^* alpha)|_unit for a base covector field."""

    def section(m):
        em = entry.unit.at(m)
        js = entry.source.jacobian_at(em)
        alpha = np.asarray(base_cov_fn(m), dtype=complex)
        return entry.bivector_matrix(em) @ (js.T @ alpha)

    return section


def right_invariant_bivector(entry: GroupoidEntry, lam_fn):
    """Lambda-arrow: right-invariant bivector from a unit-tangent 2-frame.

    `lam_fn(m)` returns a list of (v, w) pairs of translatable tangent
    vectors at the unit over m; the field is sum v-arrow ^ w-arrow.
    """

    def matrix(gamma):
        d = entry.total.dim
        m = entry.source.at(gamma)
        em = entry.unit.at(m)
        jp = entry.product.jacobian_at(entry.pair_point(em, gamma))[:, :d]
        out = np.zeros((d, d), dtype=complex)
        for v, w in lam_fn(m):
            lv = jp @ np.asarray(v, dtype=complex)
            lw = jp @ np.asarray(w, dtype=complex)
            out += np.outer(lv, lw) - np.outer(lw, lv)
        return out

    return NumericBivector(entry.total, matrix, name="lambda_right")


def exact_multiplicative(entry: GroupoidEntry, lam_fn) -> NumericBivector:
    """Lambda-arrow minus Lambda-left; left lift via inverse o right o inverse."""
    right = right_invariant_bivector(entry, lam_fn)

    def matrix(gamma):
        inv_g = entry.inverse.at(gamma)
        ji = entry.inverse.jacobian_at(inv_g)
        left = ji @ right.matrix_at(inv_g) @ ji.T
        return right.matrix_at(gamma) - left

    return NumericBivector(entry.total, matrix, name="lambda_exact")
