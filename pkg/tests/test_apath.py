import math

import numpy as np
import pytest

from poisson_forge import apath as ap
from poisson_forge import resolution as rs
from poisson_forge import symexpr as sx
from poisson_forge import tensorfield as tf


def _zero_path(ambient):
    zero = sx.rational(0)
    return ap.CotangentPath(ambient, (zero, zero),
                            (sx.rational(1), sx.rational(0)))


def test_integrator_config_floor():
    with pytest.raises(ValueError):
        ap.IntegratorConfig(steps=8)


def test_validate_trivial_and_mismatch(r2_etale):
    pi_m = r2_etale.pi_ambient
    rep = ap.validate_path(_zero_path(r2_etale.ambient), pi_m)
    assert rep.passed

    good, _ = ap.dazord_arrow_path(0.4 + 0.2j, 1.0)
    rep = ap.validate_path(good, pi_m)
    assert rep.passed and rep.records[0].max_residual <= 1e-9

    # mismatched pair: covector from one arrow, base from another
    other, _ = ap.dazord_arrow_path(-0.9 + 0.1j, 1.0)
    frank = ap.CotangentPath(good.chart, good.covector, other.base,
                             flat_ends=True)
    rep = ap.validate_path(frank, pi_m)
    assert not rep.passed
    assert rep.records[0].witnesses


def test_lift_zero_path_is_constant(r2_etale):
    end = ap.lift_path(r2_etale, _zero_path(r2_etale.ambient), (0.0, 1.0))
    assert np.allclose(end, [0.0, 1.0])


def test_lift_requires_matching_start(r2_etale):
    path, _ = ap.dazord_arrow_path(0.3, 1.0)
    with pytest.raises(ValueError):
        ap.lift_path(r2_etale, path, (1.0, 1.0))


def test_loop_monodromy_nontrivial_then_class_trivial(r2_etale, r2_full):
    loop, _ = ap.dazord_arrow_path(complex(0, 2 * math.pi), 1.0)
    end = ap.lift_path(r2_etale, loop, (0.0, 1.0),
                       ap.IntegratorConfig(steps=512))
    end = (float(end[0].real), float(end[1].real))
    # lands on a different preimage of (1, 0): witnesses the infinite fiber
    assert abs(end[0] - 2 * math.pi) <= 1e-5
    assert abs(end[1] - 1.0) <= 1e-5
    pre = rs.fiber_enumerate(r2_etale, (1.0, 0.0), count=5)
    assert any(math.hypot(end[0] - a, end[1] - b) <= 1e-5 for a, b in pre)
    assert not r2_etale.class_equal(end, (0.0, 1.0), 1e-5)
    # on the full resolution the same loop is class-trivial
    assert r2_full.class_equal(end, (0.0, 1.0), 1e-5)


def test_action_consistency_campaigns(r2_etale, r2_full):
    rep = ap.action_consistency(r2_etale, samples=8, seed=77)
    assert rep.passed
    rep = ap.action_consistency(r2_full, samples=8, seed=78)
    assert rep.passed


def test_unit_arrow_fixes_points(r2_etale):
    # gamma = (0, z0) is the unit: lifting its path fixes z
    path, _ = ap.dazord_arrow_path(0.0, complex(1.0, 0.0))
    end = ap.lift_path(r2_etale, path, (0.0, 1.0))
    assert np.allclose([v.real for v in end], [0.0, 1.0], atol=1e-9)


def test_homotopy_reparametrization_endpoint(r2_etale):
    path, _ = ap.dazord_arrow_path(0.5 + 0.4j, 1.0, flat_ends=False)
    sq = path.reparametrized_square()
    cfg = ap.IntegratorConfig(steps=512)
    e1 = ap.lift_path(r2_etale, path, (0.0, 1.0), cfg)
    e2 = ap.lift_path(r2_etale, sq, (0.0, 1.0), cfg)
    assert np.max(np.abs(e1 - e2)) <= 1e-5


def test_concatenation_matches_sequential_lift(r2_etale):
    p1, (z1, l0) = ap.dazord_arrow_path(0.4 + 0.3j, 1.0)
    t1 = np.exp(z1 * np.conj(l0)) * l0
    p2, _ = ap.dazord_arrow_path(-0.2 + 0.5j, t1)
    cat = ap.concatenate(p1, p2)
    cfg = ap.IntegratorConfig(steps=1024)
    mid = ap.lift_path(r2_etale, p1, (0.0, 1.0), cfg)
    end_seq = ap.lift_path(r2_etale, p2,
                           (float(mid[0].real), float(mid[1].real)), cfg)
    end_cat = ap.lift_path(r2_etale, cat, (0.0, 1.0), cfg)
    assert np.max(np.abs(end_seq - end_cat)) <= 1e-5


def test_concatenation_requires_flat_matching_ends(r2_etale):
    p1, _ = ap.dazord_arrow_path(0.4, 1.0, flat_ends=False)
    p2, _ = ap.dazord_arrow_path(0.1, 1.0)
    with pytest.raises(ValueError):
        ap.concatenate(p1, p2)


def test_rk4_step_halving_fourth_order(r2_etale):
    # smooth non-flat arrow path; endpoint error versus a fine reference
    path, _ = ap.dazord_arrow_path(0.8 + 0.9j, complex(1.0, 0.3),
                                   flat_ends=False)
    base0 = path.base_at(0.0)
    r = math.hypot(base0[0].real, base0[1].real)
    theta = math.atan2(base0[1].real, base0[0].real)
    a0 = (theta / r, r)          # a phi-preimage of the base start
    ref = ap.lift_path(r2_etale, path, a0, ap.IntegratorConfig(steps=4096))
    errs = []
    ns = [32, 64, 128, 256]
    for n in ns:
        end, worst, _, _ = ap._rk4_run(r2_etale.charts[0], path, a0, n, False)
        errs.append(float(np.max(np.abs(end - ref))) + 1e-300)
    slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(len(ns) - 1)]
    assert sum(slopes) / len(slopes) >= 3.5


def test_drift_refinement_escalates(r2_etale):
    path, _ = ap.dazord_arrow_path(complex(0, 2 * math.pi), 1.0)
    cfg = ap.IntegratorConfig(steps=16, drift_tol=1e-8, max_steps=8192)
    end = ap.lift_path(r2_etale, path, (0.0, 1.0), cfg)
    assert abs(end[0].real - 2 * math.pi) <= 1e-6
    tight = ap.IntegratorConfig(steps=16, drift_tol=1e-15, max_steps=32)
    with pytest.raises(ap.IntegrationFailure):
        ap.lift_path(r2_etale, path, (0.0, 1.0), tight)


def test_path_trace_rows(r2_etale):
    path, _ = ap.dazord_arrow_path(0.0, 1.0)
    rows = ap.path_trace_rows(r2_etale, path, (0.0, 1.0))
    assert all(len(r) == 4 for r in rows)
    assert all(abs(r[1]) < 1e-9 and abs(r[2] - 1.0) < 1e-9 for r in rows)
