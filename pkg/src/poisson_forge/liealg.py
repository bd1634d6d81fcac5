"""Exact-rational sl_n kernel: structure constants, Killing form, parabolics,
nilradicals, and the Richardson / Lagrangian-pairing certificates.

Everything in this module is exact (fractions.Fraction); floats appear only
in `adjoint_orbit_sample`.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .report import FAIL, PASS, CheckRecord, Report, Witness
from .rng import substream


def _zeros(n, m):
    return [[Fraction(0)] * m for _ in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = _zeros(n, m)
    for i in range(n):
        ai = a[i]
        for l in range(k):
            c = ai[l]
            if c:
                bl = b[l]
                oi = out[i]
                for j in range(m):
                    oi[j] += c * bl[j]
    return out


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def bracket(a, b):
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def mat_trace(a):
    return sum(a[i][i] for i in range(len(a)))


def exact_rank(rows):
    """Fraction-free (Bareiss) Gaussian elimination rank over the rationals."""
    m = []
    for row in rows:
        den_lcm = 1
        for x in row:
            x = Fraction(x)
            den_lcm = den_lcm * x.denominator // _gcd(den_lcm, x.denominator)
        m.append([int(Fraction(x) * den_lcm) for x in row])
    if not m or not m[0]:
        return 0
    rows_n, cols_n = len(m), len(m[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(cols_n):
        piv = next((i for i in range(r, rows_n) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, rows_n):
            for j in range(c + 1, cols_n):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        rank += 1
        if r == rows_n:
            break
    return rank


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a) if a else abs(b)


def exact_kernel(rows, dim):
    """Basis of the right kernel of a rational matrix (Gauss-Jordan)."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    for c in range(dim):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * dim
        v[fc] = Fraction(1)
        for row, pc in zip(m, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


class LieAlgebraSL:
    """sl_n over the rationals with a fixed ordered basis.

    Basis order: E_ij for i != j in lexicographic (row, column) order, then
    the Cartan elements h_i = E_ii - E_{i+1,i+1}.
    """

    def __init__(self, n):
        if not 2 <= n <= 4:
            raise ValueError("supported range is 2 <= n <= 4")
        self.n = n
        self.basis = []
        self.names = []
        self.offdiag_index = {}
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                e = _zeros(n, n)
                e[i][j] = Fraction(1)
                self.offdiag_index[(i, j)] = len(self.basis)
                self.basis.append(e)
                self.names.append(f"E{i + 1}{j + 1}")
        for i in range(n - 1):
            h = _zeros(n, n)
            h[i][i] = Fraction(1)
            h[i + 1][i + 1] = Fraction(-1)
            self.basis.append(h)
            self.names.append(f"h{i + 1}")
        self.dim = len(self.basis)
        self._ad = None
        self._killing = None
        self._killing_inv = None

    # -- coordinates -------------------------------------------------------

    def coords_of(self, m):
        """Exact basis coefficients of a traceless matrix."""
        n = self.n
        if mat_trace(m) != 0:
            raise ValueError("matrix is not traceless")
        out = [Fraction(0)] * self.dim
        for (i, j), idx in self.offdiag_index.items():
            out[idx] = Fraction(m[i][j])
        partial = Fraction(0)
        for i in range(n - 1):
            partial += Fraction(m[i][i])
            out[self.n * (self.n - 1) + i] = partial
        return out

    def matrix_of(self, coords):
        out = _zeros(self.n, self.n)
        for c, b in zip(coords, self.basis):
            if c:
                for i in range(self.n):
                    for j in range(self.n):
                        out[i][j] += Fraction(c) * b[i][j]
        return out

    def ad_matrices(self):
        if self._ad is None:
            ads = []
            for b in self.basis:
                cols = [self.coords_of(bracket(b, e)) for e in self.basis]
                ads.append([[cols[j][i] for j in range(self.dim)]
                            for i in range(self.dim)])
            self._ad = ads
        return self._ad

    def killing_matrix(self):
        """K(e_i, e_j) = trace(ad e_i o ad e_j), computed exactly."""
        if self._killing is None:
            ads = self.ad_matrices()
            k = _zeros(self.dim, self.dim)
            for i in range(self.dim):
                for j in range(i, self.dim):
                    v = sum(ads[i][a][b] * ads[j][b][a]
                            for a in range(self.dim) for b in range(self.dim))
                    k[i][j] = v
                    k[j][i] = v
            self._killing = k
        return self._killing

    def killing(self, x, y):
        """K(X, Y) for matrices X, Y."""
        cx, cy = self.coords_of(x), self.coords_of(y)
        k = self.killing_matrix()
        return sum(cx[i] * k[i][j] * cy[j]
                   for i in range(self.dim) for j in range(self.dim))

    def trace_form(self, x, y):
        return mat_trace(mat_mul(x, y))

    def structure_constant_bracket(self, ca, cb):
        """Bracket in coordinates through the structure-constant table."""
        ads = self.ad_matrices()
        out = [Fraction(0)] * self.dim
        for i, ai in enumerate(ca):
            if not ai:
                continue
            adi = ads[i]
            for r in range(self.dim):
                row = adi[r]
                acc = out[r]
                for j, bj in enumerate(cb):
                    if bj:
                        acc += ai * bj * row[j]
                out[r] = acc
        return out


def killing(n):
    """Exact Killing matrix of sl_n in the fixed basis order."""
    return LieAlgebraSL(n).killing_matrix()


class ParabolicData:
    """Block upper-triangular parabolic of sl_n.

    `levi_roots` is the subset of simple-root indices (1-based) merged into
    the Levi; the empty set gives the Borel.
    """

    def __init__(self, algebra: LieAlgebraSL, levi_roots=()):
        n = algebra.n
        levi = set(levi_roots)
        if not levi <= set(range(1, n)):
            raise ValueError("simple-root indices must lie in 1..n-1")
        self.algebra = algebra
        self.levi_roots = tuple(sorted(levi))
        block = [0] * n
        b = 0
        for i in range(1, n):
            if i not in levi:
                b += 1
            block[i] = b
        self.block_of = block
        p_idx, nil_idx, nilm_idx = [], [], []
        for (i, j), idx in algebra.offdiag_index.items():
            if block[i] < block[j]:
                nil_idx.append(idx)
                p_idx.append(idx)
            elif block[i] > block[j]:
                nilm_idx.append(idx)
            else:
                p_idx.append(idx)
        cartan = list(range(n * (n - 1), algebra.dim))
        self.p_indices = tuple(sorted(p_idx + cartan))
        self.nil_indices = tuple(sorted(nil_idx))
        self.nil_minus_indices = tuple(sorted(nilm_idx))
        self._verify_closures()

    @property
    def dim_p(self):
        return len(self.p_indices)

    @property
    def dim_nil(self):
        return len(self.nil_indices)

    def p_basis(self):
        return [self.algebra.basis[i] for i in self.p_indices]

    def nil_basis(self):
        return [self.algebra.basis[i] for i in self.nil_indices]

    def contains_in_nil(self, x):
        coords = self.algebra.coords_of(x)
        return all(c == 0 for i, c in enumerate(coords)
                   if i not in self.nil_indices)

    def _span_contains(self, indices, coords):
        return all(c == 0 for i, c in enumerate(coords) if i not in indices)

    def _verify_closures(self):
        alg = self.algebra
        for i in self.p_indices:
            for j in self.p_indices:
                c = alg.coords_of(bracket(alg.basis[i], alg.basis[j]))
                if not self._span_contains(self.p_indices, c):
                    raise AssertionError("[p, p] not contained in p")
        for i in self.p_indices:
            for j in self.nil_indices:
                c = alg.coords_of(bracket(alg.basis[i], alg.basis[j]))
                if not self._span_contains(self.nil_indices, c):
                    raise AssertionError("[p, nil] not contained in nil")
        if self.dim_p + len(self.nil_minus_indices) != alg.dim:
            raise AssertionError("dim p + dim nil_minus != dim g")


def parabolic(n, levi_roots=()):
    return ParabolicData(LieAlgebraSL(n), levi_roots)


class NilpotentRep:
    """Exact nilpotent matrix plus its Jordan type (partition of n)."""

    def __init__(self, matrix):
        self.matrix = [[Fraction(x) for x in row] for row in matrix]
        n = len(self.matrix)
        power = [row[:] for row in self.matrix]
        k = 1
        while any(any(row) for row in power):
            power = mat_mul(power, self.matrix)
            k += 1
            if k > n:
                raise ValueError("matrix is not nilpotent")
        self.jordan_type = self._jordan_type()

    def _jordan_type(self):
        n = len(self.matrix)
        ranks = [n]
        power = [[Fraction(1) if i == j else Fraction(0) for j in range(n)]
                 for i in range(n)]
        for _ in range(n):
            power = mat_mul(power, self.matrix)
            ranks.append(exact_rank(power))
        blocks = []
        for k in range(1, n + 1):
            count = ranks[k - 1] - 2 * ranks[k] + (ranks[k + 1] if k + 1 <= n else 0)
            blocks.extend([k] * count)
        return tuple(sorted(blocks, reverse=True))


def richardson_certificate(p: ParabolicData, x: NilpotentRep) -> Report:
    """PASS iff [p, x] fills the nilradical (exact rank computation)."""
    alg = p.algebra
    rep = Report(campaign_id="richardson", target=f"sl{alg.n}")
    if not p.contains_in_nil(x.matrix):
        raise ValueError("representative must lie in the nilradical")
    rows = []
    for b in p.p_basis():
        c = alg.coords_of(bracket(b, x.matrix))
        rows.append([c[i] for i in p.nil_indices])
    rank = exact_rank(rows)
    ok = rank == p.dim_nil
    rep.metadata["rank"] = rank
    rep.metadata["dim_nilradical"] = p.dim_nil
    rep.add(CheckRecord(
        name="richardson_open_orbit",
        status=PASS if ok else FAIL,
        max_residual=0.0,
        note=f"exact rank {rank} of p -> [p,x], dim nilradical {p.dim_nil}",
        witnesses=[] if ok else [Witness((), float(rank),
                                         f"rank deficit {p.dim_nil - rank}")],
    ))
    return rep


def lagrangian_pairing_certificate(p: ParabolicData, x: NilpotentRep,
                                   trials=10, seed=11) -> Report:
    """<x,[p1,p2]> = 0 exactly, and the Killing-orthogonal Upsilon^perp = P."""
    alg = p.algebra
    rep = Report(campaign_id="lagrangian_pairing", target=f"sl{alg.n}")
    bad = []
    for t in range(trials):
        rng = substream(seed, t)
        p1 = _random_p_element(p, rng)
        p2 = _random_p_element(p, rng)
        val = alg.killing(x.matrix, bracket(p1, p2))
        if val != 0:
            bad.append((t, val))
    rep.add(CheckRecord(
        name="isotropy_pairing",
        status=PASS if not bad else FAIL,
        max_residual=0.0 if not bad else float(max(abs(v) for _, v in bad)),
        samples_used=trials,
        note="exact <x,[p1,p2]> over random rational p1,p2 in p",
        witnesses=[Witness((t,), float(v), "nonzero pairing") for t, v in bad],
    ))

    # U^perp = P under the Killing form, exact kernel computation
    k = alg.killing_matrix()
    rows = []
    for i in p.nil_indices:
        rows.append([k[i][j] for j in range(alg.dim)])
    kernel = exact_kernel(rows, alg.dim)
    ok = len(kernel) == p.dim_p
    if ok:
        for v in kernel:
            if not all(c == 0 for i, c in enumerate(v) if i not in p.p_indices):
                ok = False
                break
    rep.add(CheckRecord(
        name="killing_orthogonal_complement",
        status=PASS if ok else FAIL,
        max_residual=0.0,
        note=f"dim U^perp = {len(kernel)}, dim p = {p.dim_p}",
        witnesses=[] if ok else [Witness((), 0.0, "U^perp != p")],
    ))
    return rep


def _random_p_element(p: ParabolicData, rng):
    coords = [Fraction(0)] * p.algebra.dim
    for i in p.p_indices:
        coords[i] = Fraction(rng.integer(-6, 6), rng.integer(1, 4))
    return p.algebra.matrix_of(coords)


def adjoint_orbit_sample(algebra: LieAlgebraSL, x, count=20, seed=13):
    """Ad_g x for g random products of elementary unipotents, in doubles."""
    n = algebra.n
    out = []
    for idx in range(count):
        rng = substream(seed, idx)
        g = np.eye(n)
        ginv = np.eye(n)
        for _ in range(6):
            i = rng.integer(0, n - 1)
            j = rng.integer(0, n - 1)
            if i == j:
                continue
            t = rng.integer(-8, 8) / 16.0
            e = np.eye(n)
            e[i][j] = t
            einv = np.eye(n)
            einv[i][j] = -t
            g = g @ e
            ginv = einv @ ginv
        xf = np.array([[float(v) for v in row] for row in x])
        out.append(g @ xf @ ginv)
    return out


def ad_image_rank(algebra: LieAlgebraSL, x):
    """Exact dimension of [g, x], i.e. the adjoint-orbit dimension at x."""
    rows = [algebra.coords_of(bracket(b, [[Fraction(v) for v in r] for r in x]))
            for b in algebra.basis]
    return exact_rank(rows)


def regular_nilpotent(n):
    """E_{12} + E_{23} + ... as a NilpotentRep."""
    m = _zeros(n, n)
    for i in range(n - 1):
        m[i][i + 1] = Fraction(1)
    return NilpotentRep(m)


def elementary_nilpotent(n, i, j):
    m = _zeros(n, n)
    m[i][j] = Fraction(1)
    return NilpotentRep(m)
