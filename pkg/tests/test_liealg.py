from fractions import Fraction

import numpy as np
import pytest

from poisson_forge import liealg as la


@pytest.mark.parametrize("n", [2, 3, 4])
def test_structure_constants_satisfy_jacobi_exactly(n):
    g = la.LieAlgebraSL(n)
    dim = g.dim
    basis_coords = [[Fraction(1 if i == j else 0) for j in range(dim)]
                    for i in range(dim)]
    br = g.structure_constant_bracket
    for i in range(dim):
        for j in range(i + 1, dim):
            bij = br(basis_coords[i], basis_coords[j])
            for k in range(j + 1, dim):
                term1 = br(bij, basis_coords[k])
                term2 = br(br(basis_coords[j], basis_coords[k]), basis_coords[i])
                term3 = br(br(basis_coords[k], basis_coords[i]), basis_coords[j])
                assert all(a + b + c == 0
                           for a, b, c in zip(term1, term2, term3))


def test_structure_bracket_matches_matrix_bracket():
    g = la.LieAlgebraSL(3)
    a = g.basis[0]
    b = g.basis[4]
    ca, cb = g.coords_of(a), g.coords_of(b)
    via_table = g.structure_constant_bracket(ca, cb)
    via_matrix = g.coords_of(la.bracket(a, b))
    assert via_table == via_matrix


def test_killing_values_sl2():
    k = la.killing(2)
    # basis order E12, E21, h1
    assert k[2][2] == 8
    assert k[0][0] == 0
    assert k[0][1] == 4


def test_killing_equals_2n_trace_form():
    for n in (2, 3, 4):
        g = la.LieAlgebraSL(n)
        k = g.killing_matrix()
        for i in range(g.dim):
            for j in range(g.dim):
                assert k[i][j] == 2 * n * g.trace_form(g.basis[i], g.basis[j])


def test_killing_range_check():
    with pytest.raises(ValueError):
        la.LieAlgebraSL(5)


def test_parabolic_shapes():
    b2 = la.parabolic(2)
    assert b2.dim_p == 2 and b2.dim_nil == 1        # span(h, e), span(e)
    b3 = la.parabolic(3)
    assert b3.dim_nil == 3
    p21 = la.parabolic(3, [1])
    assert p21.dim_nil == 2
    assert b3.dim_p + len(b3.nil_minus_indices) == la.LieAlgebraSL(3).dim


def test_parabolic_closures_exact():
    # closure properties are asserted inside the constructor
    for n in (2, 3, 4):
        la.parabolic(n)
    la.parabolic(4, [1, 3])
    with pytest.raises(ValueError):
        la.parabolic(3, [5])


def test_richardson_pass_and_fail():
    b2 = la.parabolic(2)
    r = la.richardson_certificate(b2, la.elementary_nilpotent(2, 0, 1))
    assert r.passed and r.metadata["rank"] == 1

    b3 = la.parabolic(3)
    r = la.richardson_certificate(b3, la.regular_nilpotent(3))
    assert r.passed and r.metadata["rank"] == 3

    r = la.richardson_certificate(b3, la.elementary_nilpotent(3, 0, 2))
    assert not r.passed and r.metadata["rank"] < 3
    assert r.records[0].witnesses


def test_richardson_rejects_x_outside_nilradical():
    b2 = la.parabolic(2)
    with pytest.raises(ValueError):
        la.richardson_certificate(b2, la.elementary_nilpotent(2, 1, 0))


def test_lagrangian_pairing_exact():
    b2 = la.parabolic(2)
    rep = la.lagrangian_pairing_certificate(b2, la.elementary_nilpotent(2, 0, 1),
                                            trials=10)
    assert rep.passed
    b3 = la.parabolic(3)
    rep = la.lagrangian_pairing_certificate(b3, la.regular_nilpotent(3),
                                            trials=10)
    assert rep.passed
    names = [r.name for r in rep.records]
    assert "killing_orthogonal_complement" in names


def test_pairing_antisymmetry_diagonal():
    g = la.LieAlgebraSL(3)
    p = la.parabolic(3)
    x = la.regular_nilpotent(3)
    el = la._random_p_element(p, la.substream(1, 1))
    assert g.killing(x.matrix, la.bracket(el, el)) == 0


def test_nilpotent_rep_validation_and_jordan():
    assert la.regular_nilpotent(3).jordan_type == (3,)
    assert la.elementary_nilpotent(3, 0, 2).jordan_type == (2, 1)
    with pytest.raises(ValueError):
        la.NilpotentRep([[1, 0], [0, -1]])


def test_adjoint_orbit_samples_stay_nilpotent():
    g = la.LieAlgebraSL(2)
    x = [[Fraction(0), Fraction(1)], [Fraction(0), Fraction(0)]]
    samples = la.adjoint_orbit_sample(g, x, count=20, seed=13)
    for s in samples:
        assert abs(np.trace(s)) <= 1e-12
        assert abs(np.linalg.det(s)) <= 1e-12
    zero = [[Fraction(0)] * 2 for _ in range(2)]
    assert all(np.max(np.abs(s)) == 0
               for s in la.adjoint_orbit_sample(g, zero, count=3, seed=1))


def test_ad_image_rank_is_orbit_dimension():
    g = la.LieAlgebraSL(2)
    assert la.ad_image_rank(g, [[0, 1], [0, 0]]) == 2
    g3 = la.LieAlgebraSL(3)
    assert la.ad_image_rank(g3, [[0, 1, 0], [0, 0, 1], [0, 0, 0]]) == 6
    assert la.ad_image_rank(g3, [[0, 0, 1], [0, 0, 0], [0, 0, 0]]) == 4


def test_exact_rank_and_kernel():
    rows = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    assert la.exact_rank(rows) == 1
    ker = la.exact_kernel(rows, 2)
    assert len(ker) == 1
    assert rows[0][0] * ker[0][0] + rows[0][1] * ker[0][1] == 0
