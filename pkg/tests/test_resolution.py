import math

import numpy as np
import pytest

from poisson_forge import groupoid as gp
from poisson_forge import liealg as la
from poisson_forge import resolution as rs
from poisson_forge import symexpr as sx
from poisson_forge import tensorfield as tf
from poisson_forge.rng import SplitMix64, substream


def test_build_r2_bounds():
    with pytest.raises(ValueError):
        rs.build_r2(2)


def test_phi_examples(r2_etale):
    assert rs.r2_phi_point(0.0, 0.7) == pytest.approx((0.7, 0.0))
    assert rs.r2_phi_point(5.0, 0.0) == pytest.approx((0.0, 0.0))
    # whole axis maps to the singular point
    for a in (-2.0, 0.0, 3.7):
        assert rs.r2_phi_point(a, 0.0) == (0.0, 0.0)


def test_r2_poisson_map_identity_proven(r2_etale):
    ac = r2_etale.charts[0]
    amb = r2_etale.ambient
    fx = ac.phi.pullback(amb.parse("x"))
    fy = ac.phi.pullback(amb.parse("y"))
    bracket = tf.apply_field(ac.pi, fx, fy)
    want = ac.phi.pullback(amb.parse("x^2 + y^2"))
    assert sx.is_zero(bracket - want) is sx.ZeroStatus.PROVEN_ZERO
    # the opposite orientation is provably nonzero (ledger: source text's
    # da^db normalization is inconsistent with its own phi)
    flipped = tf.mvf_from_text(ac.chart, 2, {("a", "b"): "1"})
    bracket2 = tf.apply_field(flipped, fx, fy)
    assert sx.decide_zero(bracket2 - want).status is sx.ZeroStatus.PROVEN_NONZERO
    assert sx.is_zero(bracket2 + want) is sx.ZeroStatus.PROVEN_ZERO


def test_r2_representative_postconditions():
    for k in range(40):
        rng = substream(55, k)
        z = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        lam = rng.uniform(-1.4, 1.4)
        a, b = rs.r2_representative(z, lam)
        # (i) the carrying element is real and composable
        m, nu = rs.r2_carrier(z, lam)
        assert abs(complex(m).imag) <= 1e-10 and abs(complex(nu).imag) <= 1e-10
        assert nu * math.exp(m * nu) == pytest.approx(lam, abs=1e-10)
        # product (M, nu) . (Z, lam) = (i a, b)
        first = m + math.exp(m * nu) * z
        assert first.real == pytest.approx(0.0, abs=1e-10)
        assert first.imag == pytest.approx(a, abs=1e-10)
        # (ii) t(Z, lam) = phi(a, b)
        t = np.exp(z * lam) * lam
        assert rs.r2_phi_point(a, b) == pytest.approx((t.real, t.imag),
                                                      abs=1e-10)


def test_r2_representative_examples():
    assert rs.r2_representative(0, 1.0) == pytest.approx((0.0, 1.0))
    a, b = rs.r2_representative(complex(0, math.pi / 2), 1.0)
    assert (a, b) == pytest.approx((math.pi / 2, 1.0))
    assert rs.r2_phi_point(a, b) == pytest.approx((0.0, 1.0), abs=1e-12)
    # purely real Z gives a point of j(L)
    a, b = rs.r2_representative(0.8, 1.1)
    assert a == pytest.approx(0.0)


def test_fiber_enumerate(r2_etale):
    pre = rs.fiber_enumerate(r2_etale, (1.0, 0.0), count=5)
    assert len(pre) == 5
    for a, b in pre:
        assert rs.r2_phi_point(a, b) == pytest.approx((1.0, 0.0), abs=1e-10)
    for i in range(len(pre)):
        for j in range(i + 1, len(pre)):
            assert math.hypot(pre[i][0] - pre[j][0],
                              pre[i][1] - pre[j][1]) >= 1e-6
    assert any(abs(a - 2 * math.pi) < 1e-9 and abs(b - 1) < 1e-12
               for a, b in pre)
    # (pi/2, 1) is a preimage of (0, 1)
    pre = rs.fiber_enumerate(r2_etale, (0.0, 1.0), count=3)
    assert any(abs(a - math.pi / 2) < 1e-9 for a, b in pre)
    with pytest.raises(ValueError):
        rs.fiber_enumerate(r2_etale, (0.0, 0.0), count=1)


def test_r2_full_class_equality(r2_full):
    pre = rs.fiber_enumerate(r2_full, (1.0, 0.0), count=5)
    for p in pre[1:]:
        assert r2_full.class_equal(pre[0], p)
    # canonical representative: fixed point, window, boundary to -pi/2
    cp = r2_full.canonical_rep((5.0, 2.0))
    assert cp[0] * cp[1] >= -math.pi / 2 - 1e-12
    assert cp[0] * cp[1] < math.pi / 2
    assert r2_full.canonical_rep(cp) == pytest.approx(cp)
    assert r2_full.class_equal((5.0, 2.0), cp)
    # axis classes are singletons, compared raw
    assert r2_full.class_equal((1.2, 0.0), (1.2, 0.0))
    assert not r2_full.class_equal((1.2, 0.0), (1.3, 0.0))


def test_class_equality_is_equivalence_on_triples(r2_full):
    rng = SplitMix64(12)
    for _ in range(25):
        a = (rng.uniform(-2, 2), rng.uniform(0.2, 2))
        n1 = rng.integer(-3, 3)
        n2 = rng.integer(-3, 3)

        def shift(p, n):
            if n == 0:
                return p
            s = (-1) ** n
            return (s * p[0] + n * math.pi / p[1], s * p[1])

        b = shift(a, n1)
        c = shift(a, n2)
        assert r2_full.class_equal(a, b)
        assert r2_full.class_equal(b, c)
        assert r2_full.class_equal(a, c)


def test_verify_resolution_r2(r2_etale, r2_full):
    rep = rs.verify_resolution(r2_etale, samples=120, tol=1e-8, seed=101)
    by = {r.name: r for r in rep.records}
    assert by["image_in_closure"].status == "PASS"
    assert by["etale_over_leaf"].status == "PASS"
    assert by["poisson_pushforward"].status == "PROVEN"
    assert by["omega_closed"].status == "PROVEN"
    assert by["injectivity_spot_check"].status == "FAIL"
    assert not by["injectivity_spot_check"].fatal      # consistent with flags
    assert rep.passed

    rep = rs.verify_resolution(r2_full, samples=120, tol=1e-8, seed=101)
    by = {r.name: r for r in rep.records}
    assert by["injectivity_spot_check"].status == "PASS"
    assert rep.passed


def test_r2_reduction_reproduces_unit_bracket(dazord, r2_etale):
    """reduce_at on Gamma_L: {a,b} = 1 under the direct convention."""
    total = dazord.total
    gamma_l = tf.Submanifold(total, generators=[total.parse("z_im")],
                             name="Gamma_L")
    ab = r2_etale.charts[0].chart
    proj = tf.ChartMap(total, ab, [
        total.parse("Z_im*exp(-Z_re*z_re)"),
        total.parse("z_re*exp(Z_re*z_re)"),
    ])
    e1, e2 = np.eye(2)
    worst = 0.0
    for i in range(60):
        rng = substream(31, i)
        pt = list(total.sample_point(rng))
        pt[3] = 0.0
        val = tf.reduce_at(dazord.pi_total, gamma_l, proj, tuple(pt), (e1, e2),
                           sign_convention="direct", tol=1e-8, seed=7 + i)
        worst = max(worst, abs(val - 1.0))
    assert worst <= 1e-8
    # graded convention gives the atlas orientation {a,b} = -1
    val = tf.reduce_at(dazord.pi_total, gamma_l, proj, (0.0, 0.0, 1.0, 0.0),
                       (e1, e2), sign_convention="graded")
    assert val == pytest.approx(-1.0)


def test_r2_reduced_form_relation(dazord, r2_etale):
    """p^* omega_Z = -iota^* omega_Gamma on Gamma_L at sampled points."""
    total = dazord.total
    ab = r2_etale.charts[0].chart
    proj = tf.ChartMap(total, ab, [
        total.parse("Z_im*exp(-Z_re*z_re)"),
        total.parse("z_re*exp(Z_re*z_re)"),
    ])
    omega_z = r2_etale.charts[0].omega
    worst = 0.0
    for i in range(200):
        rng = substream(32, i)
        pt = list(total.sample_point(rng))
        pt[3] = 0.0
        pt = tuple(pt)
        j = proj.jacobian_at(pt)
        wz = omega_z.matrix_at(proj.at(pt))
        pull = j.T @ wz @ j
        wg = dazord.omega.matrix_at(pt)
        # restrict both to T Gamma_L = span(e0, e1, e2)
        idx = [0, 1, 2]
        r = np.max(np.abs(pull[np.ix_(idx, idx)] + wg[np.ix_(idx, idx)]))
        worst = max(worst, float(r))
    assert worst <= 1e-8


def test_crossing_compatibility():
    rep = rs.crossing_compatibility_r2(0.0)
    assert rep.metadata["status"] == "REACHABLE"
    rep = rs.crossing_compatibility_r2(math.pi / 2)
    assert rep.metadata["status"] == "OBSTRUCTED"
    assert rep.metadata["certificate_c"] == pytest.approx(math.pi / 2)
    assert rep.passed
    rep = rs.crossing_compatibility_r2(math.pi)
    assert rep.metadata["status"] == "REACHABLE"


# -- springer ----------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_springer_atlas_checks(n):
    atlas = rs.springer(n)
    rep = rs.verify_resolution(atlas, samples=60, tol=1e-8, seed=11)
    by = {r.name: r for r in rep.records}
    assert rep.passed
    assert by["poisson_pushforward"].status in ("PASS", "UNKNOWN-ESCALATED")
    assert by["omega_closed"].status == "PROVEN"
    assert atlas.metadata["fiber_triviality"].startswith("untested")


def test_springer_phi_at_unit_slice():
    atlas = rs.springer(2)
    # xi = 0: phi is the identity on the nilradical coordinate
    out = atlas.charts[0].phi.at((0.0, 0.7))
    # ambient coords (c1, c2, c3) = (E12, E21, h1) coefficients
    assert np.allclose(out, (0.7, 0.0, 0.0))


def test_springer_class_equality_orbit_pairs():
    atlas = rs.springer(2)
    alg = la.LieAlgebraSL(2)
    par = la.ParabolicData(alg)
    rng = SplitMix64(3)
    z = atlas.charts[0].chart.sample_point(rng)
    pair = rs.springer_class_pair(atlas, alg, par, rng, z)
    assert atlas.class_equal(pair)
    # a non-parabolic move breaks class equality
    (g1, u1), _ = pair
    bad = np.array([[1.0, 0.0], [0.8, 1.0]]) @ g1
    assert not atlas.class_equal(((g1, u1), (bad, u1)))


def test_springer_reduction_oracle_matches_stored_form():
    """Independent route: reduce the cotangent groupoid over Gamma_U and
    compare with the inverse of the stored slice form."""
    entry = gp.catalog("cotangent-sl2")
    alg = la.LieAlgebraSL(2)
    par = la.ParabolicData(alg)
    total = entry.total
    cnames = [f"c{k + 1}" for k in range(alg.dim)]
    gens = [sx.var(cnames[k]) for k in range(alg.dim)
            if k not in par.nil_indices]
    sub = tf.Submanifold(total, generators=gens, name="Gamma_U")
    g = gp.ldu_entries(2, gp.ldu_var_names(2))
    xi_expr = sx.mul(g[1][0], sx.recip(g[1][1]))
    ginv = gp.unimodular_inverse(g)
    ex = [[sx.rational(1), sx.rational(0)], [xi_expr, sx.rational(1)]]
    binv = gp.emat_mul(ex, ginv)
    bmat = gp.unimodular_inverse(binv)
    u_mat = gp.expr_matrix_of(alg, [sx.var(nm) for nm in cnames])
    ad = gp.emat_mul(gp.emat_mul(binv, u_mat), bmat)
    slice_chart = tf.Chart("slice", sx.VarTable.reals("x1", "u1"))
    proj = tf.ChartMap(total, slice_chart, [xi_expr, ad[0][1]])
    atlas = rs.springer(2)
    pi_gamma = gp.NumericBivector(total, entry.bivector_matrix)
    worst = 0.0
    for i in range(25):
        rng = substream(5, i)
        pt = list(total.sample_point(rng))
        for k in range(alg.dim):
            if k not in par.nil_indices:
                pt[total.vars.index[cnames[k]]] = 0.0
        pt = tuple(pt)
        red = tf.reduced_bivector_at(pi_gamma, sub, proj, pt,
                                     sign_convention="graded")
        z = proj.at(pt)
        want = tf.invert_form_at(atlas.charts[0].omega, z)
        worst = max(worst, float(np.max(np.abs(red - want))))
    assert worst <= 1e-8


def test_springer_rejects_unsupported():
    with pytest.raises(ValueError):
        rs.springer(4)


def test_springer_sbar_membership_residuals():
    atlas = rs.springer(3)
    gens = sx.compile_exprs(list(atlas.closure_generators), atlas.ambient.vars)
    worst = 0.0
    for i in range(100):
        rng = substream(71, i)
        z = atlas.charts[0].chart.sample_point(rng)
        img = atlas.charts[0].phi.at(z)
        worst = max(worst, max(abs(v) for v in gens(img)))
    assert worst <= 1e-9


# -- grothendieck ------------------------------------------------------------


def test_grothendieck_unit_and_trace():
    at = rs.grothendieck_sl2(1.5)
    mu0 = at.charts[0].phi.at((0.0, 0.3))
    assert np.allclose(mu0, (0.0, 1.5, 0.3))    # (l, d, u) of t*u itself
    tr = at.metadata["trace_expr"]
    want = sx.add(sx.rational(3, 2), sx.rational(2, 3))
    assert sx.is_zero(sx.add(tr, sx.neg(want))) is sx.ZeroStatus.PROVEN_ZERO
    # numeric residual on samples
    worst = 0.0
    fn = sx.compile_exprs([tr], at.charts[0].chart.vars)
    for i in range(100):
        rng = substream(41, i)
        z = at.charts[0].chart.sample_point(rng)
        worst = max(worst, abs(fn(z)[0] - (1.5 + 1 / 1.5)))
    assert worst <= 1e-12


def test_grothendieck_verify_and_coisotropy():
    at = rs.grothendieck_sl2(1.5)
    rep = rs.verify_resolution(at, samples=60, tol=1e-8, seed=2)
    assert rep.passed
    pi = gp.evens_lu_bivector(2)
    ch = pi.chart
    gens = [ch.parse("hl"), sx.add(ch.parse("hd"), sx.rational(-3, 2))]
    sub = tf.Submanifold(ch, generators=gens, name="tU")
    rep = tf.is_coisotropic(pi, sub, samples=40, tol=1e-9, seed=6)
    assert rep.passed


def test_grothendieck_nonregular_warned_not_rejected():
    at = rs.grothendieck_sl2(1.0)
    assert at.metadata["warning"]
    at = rs.grothendieck_sl2(1.5)
    assert not at.metadata["warning"]
    with pytest.raises(ValueError):
        rs.grothendieck_sl2(0.0)


# -- kleinian ----------------------------------------------------------------


@pytest.mark.parametrize("l", [2, 3])
def test_kleinian_symbolic_core(l):
    pi, chart = rs.kleinian_poisson(l)
    assert tf.schouten(pi, pi).is_zero_field()
    chi = chart.parse(f"x*y - z^{l}")
    for i in range(3):
        assert sx.is_zero(tf.apply_field(pi, chi, chart.coordinate(i))) \
            is sx.ZeroStatus.PROVEN_ZERO


@pytest.mark.parametrize("l", [2, 3])
def test_kleinian_atlas_verifies(l):
    atlas = rs.kleinian(l)
    assert len(atlas.curves) == l - 1
    rep = rs.verify_resolution(atlas, samples=60, tol=1e-8, seed=3)
    by = {r.name: r for r in rep.records}
    assert rep.passed
    assert by["poisson_pushforward"].status == "PROVEN"
    assert by["omega_closed"].status == "PROVEN"
    with pytest.raises(ValueError):
        rs.kleinian(5)


@pytest.mark.parametrize("l", [2, 3])
def test_kleinian_transitions_commute_with_phi(l):
    atlas = rs.kleinian(l)
    worst = 0.0
    for (i, j), t in atlas.transitions.items():
        for k in range(100):
            rng = substream(17, k)
            z = t.source.sample_point(rng, guard=0.3)
            a = atlas.charts[i].phi.at(z)
            b = atlas.charts[j].phi.at(t.at(z))
            worst = max(worst, max(abs(u - v) for u, v in zip(a, b)))
        # transitions are mutually inverse symbolically
        back = atlas.transitions[(j, i)]
        comp = back.compose(t)
        for comp_e, v in zip(comp.components, t.source.coordinates()):
            assert sx.is_zero(sx.add(comp_e, sx.neg(v))) \
                is sx.ZeroStatus.PROVEN_ZERO
    assert worst <= 1e-10


def test_kleinian_l3_chain_pattern():
    atlas = rs.kleinian(3)
    c1, c2 = atlas.curves
    # both curves appear in the z-chart as the coordinate axes {q=0}, {p=0};
    # the exact intersection is the single point p = q = 0
    z_loci = {c.name: next(fix for ci, fix, _ in c.loci if ci == 2)
              for c in (c1, c2)}
    assert z_loci["C1"] == {"q": 0}
    assert z_loci["C2"] == {"p": 0}
    # strict transform L~1 = {p = 1} in the z-chart misses C2 = {p = 0}
    assert atlas.strict_transforms["L1"][1][1] == {"p": 1}
    # and meets C1 transversally at exactly one point in the x-chart:
    # L~1 = {s = 1}, C1 = {a = 0}; the tangents (1,0) and (0,1) are
    # independent and the solution a = 0, s = 1 is unique (linear system)
    assert atlas.strict_transforms["L1"][0][1] == {"s": 1}
    assert next(fix for ci, fix, _ in c1.loci if ci == 0) == {"a": 0}


def test_kleinian_l3_dphi_kernel_and_node():
    atlas = rs.kleinian(3)
    # at the node p1 (origin of the z-chart) the differential vanishes
    jz = atlas.charts[2].phi.jacobian_at((0.0, 0.0))
    assert np.max(np.abs(jz)) == 0.0
    # along C1 away from the node, ker d phi = tangent of the curve
    for s in (0.5, -1.2, 2.0):
        j = atlas.charts[0].phi.jacobian_at((0.0, s))
        ns = null_space_dim(j)
        assert ns == 1
        # the kernel direction is d/ds (tangent to {a = 0})
        v = np.array([0.0, 1.0])
        assert np.max(np.abs(j @ v)) <= 1e-12


def null_space_dim(j, tol=1e-10):
    s = np.linalg.svd(j, compute_uv=False)
    return int(sum(1 for v in s if v <= tol * max(1.0, s[0])))


def test_kleinian_fiber_over_regular_point_is_single_class():
    atlas = rs.kleinian(3)
    rng = SplitMix64(9)
    z = atlas.charts[0].chart.sample_point(rng, spread=0.9)
    img = atlas.charts[0].phi.at(z)
    pre = rs._kleinian_invert(atlas, img)
    assert len(pre) >= 2
    for other in pre:
        assert atlas.class_equal(((0, z), other))
