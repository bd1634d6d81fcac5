"""Dev: pin the Springer slice symplectic form against the reduction oracle."""
import numpy as np
from poisson_forge import groupoid as gp
from poisson_forge import resolution as rs
from poisson_forge import symexpr as sx
from poisson_forge import tensorfield as tf
from poisson_forge.liealg import LieAlgebraSL, ParabolicData
from poisson_forge.rng import substream

n = 2
alg = LieAlgebraSL(n)
par = ParabolicData(alg)
entry = gp.catalog(f"cotangent-sl{n}")
total = entry.total

# N = Gamma_U: coordinates c_a = 0 for basis elements not in the nilradical
cnames = [f"c{k + 1}" for k in range(alg.dim)]
offsets = [total.vars.index[nm] for nm in cnames]
gens = [sx.var(cnames[k]) for k in range(alg.dim) if k not in par.nil_indices]
sub = tf.Submanifold(total, generators=gens, name="Gamma_U")

# projection Phi: (g, u) -> (xi coords, Ad_{b^{-1}} u nil-coords)
# g = b exp(xi); for sl2: xi21 = g21/g22
g = gp.ldu_entries(n, gp.ldu_var_names(n))
g21, g22 = g[1][0], g[1][1]
xi_expr = sx.mul(g21, sx.recip(g22))
# b^{-1} = exp(xi) g^{-1}
ginv = gp.unimodular_inverse(g)
ex = [[sx.rational(1), sx.rational(0)], [xi_expr, sx.rational(1)]]
binv = gp.emat_mul(ex, ginv)
b = gp.unimodular_inverse(binv)
u_mat = gp.expr_matrix_of(alg, [sx.var(nm) for nm in cnames])
ad = gp.emat_mul(gp.emat_mul(binv, u_mat), b)
slice_chart = tf.Chart("slice", sx.VarTable.reals("x1", "u1"))
proj = tf.ChartMap(total, slice_chart, [xi_expr, ad[0][1]])

# sample a point on N and reduce
for trial in range(4):
    rng = substream(5, trial)
    pt = list(total.sample_point(rng))
    for k in range(alg.dim):
        if k not in par.nil_indices:
            pt[offsets[k]] = 0.0
    pt = tuple(pt)
    assert sub.on_manifold(pt, 1e-12)
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    pi_gamma = gp.NumericBivector(total, entry.bivector_matrix)
    val_direct = tf.reduce_at(pi_gamma, sub, proj, pt, (e1, e2),
                              sign_convention="direct")
    val_graded = tf.reduce_at(pi_gamma, sub, proj, pt, (e1, e2),
                              sign_convention="graded")
    print(f"reduced {{x, u}} at sample {trial}: direct={val_direct:.6f} "
          f"graded={val_graded:.6f}")

# candidate symbolic forms on the slice: omega = sign * d K(u, (d exp xi) exp(-xi))
atlas = rs.springer(2)
ac = atlas.charts[0]
print("omega_Z:", ac.omega)
for trial in range(4):
    rng = substream(6, trial)
    z = tuple(complex(rng.uniform(-1, 1)) for _ in range(2))
    piz = tf.invert_form_at(ac.omega, z)
    print("slice pi from omega:", np.round(piz, 6).tolist())
    break

# pushforward test for the atlas as built
rep = rs.verify_resolution(atlas, samples=40)
for r in rep.records:
    print(f"  springer2 {r.name}: {r.status} res={r.max_residual}")
