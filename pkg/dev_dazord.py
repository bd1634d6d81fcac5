"""Dev check: derived Dazord symplectic data, fully symbolic."""
import numpy as np
from poisson_forge import symexpr as sx
from poisson_forge import tensorfield as tf

cplx = tf.Chart("Gamma", sx.VarTable.complexes("Z", "z"))
Z, z = sx.var("Z", "complex"), sx.var("z", "complex")
cZ, cz = sx.cvar("Z"), sx.cvar("z")
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

pi = tf.realify_bivector(cplx, pi_w)
om = tf.realify_form(cplx, om_w)
real_chart = pi.chart
print("real chart:", real_chart.vars)

# 1. coefficients real
for name, field in (("pi", pi), ("omega", om)):
    for k, e in field.coeffs.items():
        img = sx.im_part(e)
        st = sx.is_zero(sx.expand_re_im(img)).value
        if st != "proven-zero":
            print(f"IMAG {name}{k}: {st}: {sx.to_text(e)}")
print("coefficients real: checked")
print("omega:", om)
print("pi:", pi)

# 2. d omega = 0
dom = tf.exterior_derivative(om)
print("d omega proven zero:", dom.is_zero_field())

# 3. [pi, pi] = 0
s2 = tf.schouten(pi, pi)
print("[pi,pi] proven zero:", s2.is_zero_field())

# 4. W * Pi = -Id symbolically
n = 4
W = [[sx.rational(0)] * n for _ in range(n)]
for (a, b), e in om.coeffs.items():
    W[a][b] = e
    W[b][a] = sx.neg(e)
P = [[sx.rational(0)] * n for _ in range(n)]
for (a, b), e in pi.coeffs.items():
    P[a][b] = e
    P[b][a] = sx.neg(e)
ok = True
for a in range(n):
    for b in range(n):
        acc = sx.add(*[sx.mul(W[a][k], P[k][b]) for k in range(n)])
        target = sx.rational(-1) if a == b else sx.rational(0)
        st = sx.is_zero(sx.add(acc, sx.neg(target))).value
        if st != "proven-zero":
            ok = False
            print(f"W*Pi[{a}][{b}] != -Id: {st}")
print("W*Pi = -Id proven:", ok)

# 5. pushforwards: s(Z,z)=z, t(Z,z)=e^{Z zbar} z; base kappa = x^2+y^2
Xr, Yr, xr, yr = (sx.var(nm) for nm in real_chart.vars.names)
kappa_s = sx.add(sx.pow_int(xr, 2), sx.pow_int(yr, 2))
sx_x, sx_y = xr, yr
lhs = tf.apply_field(pi, sx_x, sx_y)
print("s_* pi = pi_M proven:", sx.is_zero(sx.add(lhs, sx.neg(kappa_s))).value)

# t components: realify exp(Z*conj(z))*z
t_c = sx.mul(sx.exp(sx.mul(Z, cz)), z)
_, subs = tf.realify_chart(cplx)
t_re, t_im = tf.realify_map_component(t_c, subs)
kappa_t = sx.add(sx.pow_int(t_re, 2), sx.pow_int(t_im, 2))
lhs_t = tf.apply_field(pi, t_re, t_im)
print("t_* pi = -pi_M proven:", sx.is_zero(sx.add(lhs_t, kappa_t)).value)

# 6. nondegeneracy at a few points + inversion consistency
from poisson_forge.rng import substream
for idx in range(5):
    rng = substream(99, idx)
    pt = real_chart.sample_point(rng)
    Pm = tf.invert_form_at(om, pt)
    Pm2 = pi.matrix_at(pt)
    print("inv consistency:", np.max(np.abs(Pm - Pm2)) < 1e-12,
          "detW:", abs(np.linalg.det(om.matrix_at(pt))))
