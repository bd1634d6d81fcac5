"""Cotangent-path integration and the induced groupoid action on resolutions.

A cotangent path is a covector path a(u) over a base path m(u) obeying
dm/du = pi_M^#(a(u)).  Lifting integrates dz/du = pi_Z^#((d phi)^T a(u))
with RK4 while monitoring the drift |phi(z(u)) - m(u)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import resolution as rs
from . import symexpr as sx
from . import tensorfield as tf
from .report import FAIL, PASS, CheckRecord, Report, Witness
from .rng import substream
from .symexpr import VarTable

_U = VarTable.reals("u")


def _smoothstep(v):
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return 1.0
    return v * v * v * (10.0 + v * (-15.0 + 6.0 * v))


def _smoothstep_d(v):
    if v <= 0.0 or v >= 1.0:
        return 0.0
    return 30.0 * v * v * (1.0 - v) * (1.0 - v)


class FlatProfile:
    """Reparametrization fixed at 0 near u=0 and at 1 near u=1."""

    def __init__(self, margin=0.1):
        self.margin = margin

    def value(self, u):
        return _smoothstep((u - self.margin) / (1.0 - 2.0 * self.margin))

    def deriv(self, u):
        w = 1.0 - 2.0 * self.margin
        return _smoothstep_d((u - self.margin) / w) / w


@dataclass
class CotangentPath:
    """Covector path over the ambient chart, components as Exprs in u."""

    chart: tf.Chart                 # ambient chart of M
    covector: tuple                 # Exprs in u, one per chart coordinate
    base: tuple                     # Exprs in u, one per chart coordinate
    flat_ends: bool = False
    profile: FlatProfile = field(default_factory=FlatProfile)

    def __post_init__(self):
        self._a_fn = sx.compile_exprs(self.covector, _U)
        self._m_fn = sx.compile_exprs(self.base, _U)

    def _tau(self, u):
        if self.flat_ends:
            return self.profile.value(u), self.profile.deriv(u)
        return u, 1.0

    def covector_at(self, u):
        tau, dtau = self._tau(u)
        return np.array(self._a_fn((tau,)), dtype=complex) * dtau

    def base_at(self, u):
        tau, _ = self._tau(u)
        return np.array(self._m_fn((tau,)), dtype=complex)

    def reparametrized_square(self):
        """The homotopic path u -> original(u^2)."""
        u = sx.var("u")
        u2 = sx.pow_int(u, 2)
        cov = tuple(sx.mul(sx.rational(2), u, sx.substitute(a, {"u": u2}))
                    for a in self.covector)
        base = tuple(sx.substitute(m, {"u": u2}) for m in self.base)
        return CotangentPath(self.chart, cov, base, flat_ends=self.flat_ends,
                             profile=self.profile)


@dataclass
class IntegratorConfig:
    steps: int = 256
    drift_tol: float = 1e-6
    max_steps: int = 8192

    def __post_init__(self):
        if self.steps < 16:
            raise ValueError("step count must be at least 16")


class IntegrationFailure(RuntimeError):
    def __init__(self, worst_drift, at_u):
        super().__init__(f"drift {worst_drift:.3e} at u = {at_u:.4f} "
                         f"unrecoverable at the step ceiling")
        self.worst_drift = worst_drift
        self.at_u = at_u


def validate_path(path: CotangentPath, pi_m, times=50, tol=1e-9) -> Report:
    """Residuals of dm/du - pi_M^#(a(u)) along the path."""
    rep = Report(campaign_id="validate_path", target=path.chart.name)
    u = sx.var("u")
    dm = [sx.diff(m, u) for m in path.base]
    dm_fn = sx.compile_exprs(dm, _U)
    worst = 0.0
    wits = []
    for i in range(times):
        ui = (i + 0.5) / times
        tau, dtau = path._tau(ui)
        vel = np.array(dm_fn((tau,)), dtype=complex) * dtau
        a = path.covector_at(ui)
        m = path.base_at(ui)
        sharp = pi_m.matrix_at(tuple(m)) @ a
        r = float(np.max(np.abs(vel - sharp)))
        if r > worst:
            worst = r
        if r > tol and len(wits) < 3:
            wits.append(Witness((ui,), r, "ODE residual"))
    rep.add(CheckRecord(name="cotangent_ode", max_residual=worst,
                        status=PASS if worst <= tol else FAIL,
                        samples_used=times, witnesses=wits))
    return rep


def lift_path(atlas: rs.ResolutionAtlas, path: CotangentPath, z0,
              config: IntegratorConfig = None, chart_index=0,
              want_trace=False):
    """RK4 solution of dz/du = pi_Z^#((d phi)^T a(u)) from z0.

    Refines (doubles) the step count until the drift |phi(z) - m| stays
    within config.drift_tol, or raises IntegrationFailure.
    """
    config = config or IntegratorConfig()
    ac = atlas.charts[chart_index]
    m0 = path.base_at(0.0)
    img0 = np.array(ac.phi.at(tuple(z0)), dtype=complex)
    if np.max(np.abs(img0 - m0)) > max(1e-8, 10 * config.drift_tol):
        raise ValueError("phi(z0) does not match the base start point")

    steps = config.steps
    while True:
        z, worst_drift, worst_u, trace = _rk4_run(ac, path, z0, steps,
                                                  want_trace)
        if worst_drift <= config.drift_tol:
            return (z, trace) if want_trace else z
        if steps >= config.max_steps:
            raise IntegrationFailure(worst_drift, worst_u)
        steps *= 2


def _rk4_run(ac, path, z0, steps, want_trace):
    z = np.array(z0, dtype=complex)
    h = 1.0 / steps
    worst = 0.0
    worst_u = 0.0
    trace = []

    def rhs(u, zz):
        a = path.covector_at(u)
        j = ac.phi.jacobian_at(tuple(zz))
        piz = ac.bivector_at(tuple(zz))
        return piz @ (j.T @ a)

    for i in range(steps):
        u = i * h
        if want_trace or i % max(1, steps // 64) == 0:
            img = np.array(ac.phi.at(tuple(z)), dtype=complex)
            drift = float(np.max(np.abs(img - path.base_at(u))))
            if drift > worst:
                worst, worst_u = drift, u
            if want_trace:
                trace.append((u, tuple(z.copy()), drift))
        k1 = rhs(u, z)
        k2 = rhs(u + h / 2, z + h / 2 * k1)
        k3 = rhs(u + h / 2, z + h / 2 * k2)
        k4 = rhs(u + h, z + h * k3)
        z = z + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    img = np.array(ac.phi.at(tuple(z)), dtype=complex)
    drift = float(np.max(np.abs(img - path.base_at(1.0))))
    if drift > worst:
        worst, worst_u = drift, 1.0
    if want_trace:
        trace.append((1.0, tuple(z.copy()), drift))
    return z, worst, worst_u, trace


# -- Dazord arrows as cotangent paths -----------------------------------------


def _exactify(x, denom=10 ** 7):
    return Fraction(float(x)).limit_denominator(denom)


def dazord_arrow_path(z_arrow, lam_base, flat_ends=True):
    """Cotangent path representing the arrow (Z, z0) of the plane groupoid.

    Built from the s-fiber segment u -> (u Z, z0): base path
    m(u) = exp(u Z conj(z0)) z0 and a(u) solving the defining ODE for
    {x, y} = x^2 + y^2.  Arrow data is rationalized exactly once so the path
    and the explicit arrow agree to that precision.
    """
    zr = sx.const(sx.GaussianRational(_exactify(complex(z_arrow).real),
                                      _exactify(complex(z_arrow).imag)))
    z0 = sx.const(sx.GaussianRational(_exactify(complex(lam_base).real),
                                      _exactify(complex(lam_base).imag)))
    z0c = sx.const(sx.GaussianRational(_exactify(complex(lam_base).real),
                                       -_exactify(complex(lam_base).imag)))
    chart = tf.Chart("plane", VarTable.reals("x", "y"))
    u = sx.var("u")
    m_c = sx.mul(sx.exp(sx.mul(u, zr, z0c)), z0)
    mx = sx.expand_re_im(sx.re_part(m_c))
    my = sx.expand_re_im(sx.im_part(m_c))
    vx = sx.diff(mx, u)
    vy = sx.diff(my, u)
    kappa = sx.add(sx.pow_int(mx, 2), sx.pow_int(my, 2))
    # sharp convention: v = Pi a with Pi = [[0, k], [-k, 0]]
    ax = sx.neg(sx.mul(vy, sx.recip(kappa)))
    ay = sx.mul(vx, sx.recip(kappa))
    return CotangentPath(chart, (ax, ay), (mx, my), flat_ends=flat_ends), \
        (complex(sx.eval_tree(zr, VarTable.reals(), ())),
         complex(sx.eval_tree(z0, VarTable.reals(), ())))


def dazord_explicit_action(z_arrow, point_ab):
    """[g . gamma] for g = (i a, b) on the slice and gamma = (Z, s-base)."""
    a, b = float(point_ab[0]), float(point_ab[1])
    g_first = complex(0, a)
    prod_first = g_first + np.exp(complex(0, -a) * b) * complex(z_arrow)
    return rs.r2_representative(prod_first, b)


def action_consistency(atlas: rs.ResolutionAtlas, samples=12, tol=1e-5,
                       seed=77, config: IntegratorConfig = None) -> Report:
    """Integrated lift along an arrow path vs the explicit action [g gamma]."""
    rep = Report(campaign_id="action_consistency", target=atlas.name,
                 seed=seed)
    config = config or IntegratorConfig(steps=512)
    worst = 0.0
    worst_comp = 0.0
    wits = []
    used = 0
    for i in range(samples):
        rng = substream(seed, i)
        a = rng.uniform(-0.8, 0.8)
        b = rng.uniform(0.4, 1.4)
        z0 = (a, b)
        base = rs.r2_phi_point(a, b)
        lam = complex(*base)
        arrow = complex(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))
        path, (zx, l0) = dazord_arrow_path(arrow, lam)
        used += 1
        end = lift_path(atlas, path, z0, config)
        end = (float(end[0].real), float(end[1].real))
        want = dazord_explicit_action(zx, z0)
        if not atlas.class_equal(end, want, tol):
            worst = 1.0
            if len(wits) < 3:
                wits.append(Witness(z0, complex(*end), "action mismatch"))

        # composition: acting by gamma1 then gamma2 equals gamma1 gamma2
        arrow2 = complex(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6))
        t_of_1 = np.exp(zx * np.conj(l0)) * l0
        path2, (zx2, _) = dazord_arrow_path(arrow2, t_of_1)
        mid = (float(end[0]), float(end[1]))
        end2 = lift_path(atlas, path2, mid, config)
        end2 = (float(end2[0].real), float(end2[1].real))
        prod_first = zx + np.exp(np.conj(zx) * l0) * zx2
        path12, (zx12, _) = dazord_arrow_path(prod_first, l0)
        end12 = lift_path(atlas, path12, z0, config)
        end12 = (float(end12[0].real), float(end12[1].real))
        if not atlas.class_equal(end2, end12, tol):
            worst_comp = max(worst_comp, 1.0)
            if len(wits) < 3:
                wits.append(Witness(z0, complex(*end2), "composition mismatch"))
    rep.add(CheckRecord(name="explicit_vs_integrated",
                        status=PASS if worst == 0.0 else FAIL,
                        max_residual=worst, samples_used=used,
                        witnesses=[w for w in wits
                                   if w.detail == "action mismatch"]))
    rep.add(CheckRecord(name="action_composition",
                        status=PASS if worst_comp == 0.0 else FAIL,
                        max_residual=worst_comp, samples_used=used,
                        witnesses=[w for w in wits
                                   if w.detail == "composition mismatch"]))
    return rep


class ConcatenatedPath:
    """Flat-ended paths run back to back; first on [0, 1/2]."""

    def __init__(self, p1, p2):
        if not (p1.flat_ends and p2.flat_ends):
            raise ValueError("concatenation requires flat-ended paths")
        end1 = p1.base_at(1.0)
        start2 = p2.base_at(0.0)
        if float(np.max(np.abs(end1 - start2))) > 1e-8:
            raise ValueError("paths do not concatenate: endpoint mismatch")
        self.first = p1
        self.second = p2
        self.chart = p1.chart
        self.flat_ends = True

    def covector_at(self, u):
        if u <= 0.5:
            return 2.0 * self.first.covector_at(2.0 * u)
        return 2.0 * self.second.covector_at(2.0 * u - 1.0)

    def base_at(self, u):
        if u <= 0.5:
            return self.first.base_at(2.0 * u)
        return self.second.base_at(2.0 * u - 1.0)


def concatenate(p1, p2):
    return ConcatenatedPath(p1, p2)


def path_trace_rows(atlas, path, z0, config=None):
    """CSV-ready rows (u, z components..., drift)."""
    end, trace = lift_path(atlas, path, z0, config, want_trace=True)
    rows = []
    for u, z, drift in trace:
        rows.append([u] + [c.real for c in z] + [drift])
    return rows
