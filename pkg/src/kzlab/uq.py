"""U_q(sl2) with q^x = exp(2 pi i x / kappa): Verma tensor layers, R-matrix,
braid representations, quantum singular vectors and the comparison of
pure-braid R-matrix spectra with KZ monodromy.

Module conventions: e f^j v = [j][m-j+1] f^{j-1} v, f f^j v = f^{j+1} v,
q^{xh} f^j v = q^{x(m-2j)} f^j v, and
    Delta(e) = e (x) q^{h/4} + q^{-h/4} (x) e   (same form for f).
Layer bases are those of sl2.VermaTensorSpace.
"""
from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from . import sl2
from . import kz


def qpow(x, kappa):
    """q^x = exp(2 pi i x / kappa)."""
    return np.exp(2j * np.pi * np.asarray(x) / kappa)


def qnum(a, kappa):
    """[a] = (q^{a/2} - q^{-a/2}) / (q^{1/2} - q^{-1/2})."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    return (qpow(a / 2, kappa) - qpow(-a / 2, kappa)) / (qpow(0.5, kappa) - qpow(-0.5, kappa))


def qfactorial(s, kappa):
    out = 1.0 + 0j
    for r in range(1, s + 1):
        out *= qnum(r, kappa)
    return out


@dataclass(frozen=True)
class QVermaTensorSpace:
    """Tensor product of quantum Verma (or irreducible) modules, truncated."""
    base: sl2.VermaTensorSpace
    kappa: complex

    @classmethod
    def make(cls, weights, kappa, depth=3, irreducible=None):
        return cls(sl2.VermaTensorSpace(tuple(weights), depth, irreducible), kappa)

    @property
    def weights(self):
        return self.base.weights

    @property
    def n(self):
        return self.base.n

    def basis(self, k):
        return self.base.basis(k)

    def index(self, k):
        return self.base.index(k)

    def dim(self, k):
        return self.base.dim(k)

    def permuted(self, perm):
        w = tuple(self.base.weights[p] for p in perm)
        irr = tuple(self.base.irreducible[p] for p in perm)
        return QVermaTensorSpace(sl2.VermaTensorSpace(w, self.base.depth, irr), self.kappa)

    def swapped(self, i):
        perm = list(range(self.n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        return self.permuted(perm)


def _weight(m, j):
    return m - 2 * j


def q_h_power(space, k, x, i=None):
    """Diagonal of q^{x h} on factor i (or Delta^{(n)} q^{xh} if i is None)."""
    m = space.weights
    out = []
    for J in space.basis(k):
        if i is None:
            w = sum(_weight(m[l], J[l]) for l in range(space.n))
        else:
            w = _weight(m[i], J[i])
        out.append(qpow(x * w, space.kappa))
    return np.array(out)


def coproduct_e(space, k):
    """Matrix of Delta^{(n)}(e): layer k -> layer k-1."""
    kap, m = space.kappa, space.weights
    src, dst = space.basis(k), space.index(k - 1)
    M = np.zeros((len(dst), len(src)), dtype=complex)
    for a, J in enumerate(src):
        for i in range(space.n):
            if J[i] == 0:
                continue
            Jn = list(J)
            Jn[i] -= 1
            Jn = tuple(Jn)
            c = qnum(J[i], kap) * qnum(m[i] - J[i] + 1, kap)
            # q^{-h/4} on factors left of i, q^{h/4} on the right (weights of J)
            ex = -sum(_weight(m[l], J[l]) for l in range(i)) / 4 \
                + sum(_weight(m[l], J[l]) for l in range(i + 1, space.n)) / 4
            M[dst[Jn], a] += c * qpow(ex, kap)
    return M


def coproduct_f(space, k):
    """Matrix of Delta^{(n)}(f): layer k -> layer k+1 (within truncation)."""
    kap, m = space.kappa, space.weights
    src, dst = space.basis(k), space.index(k + 1)
    M = np.zeros((len(dst), len(src)), dtype=complex)
    for a, J in enumerate(src):
        for i in range(space.n):
            Jn = list(J)
            Jn[i] += 1
            Jn = tuple(Jn)
            if Jn not in dst:
                continue
            ex = -sum(_weight(m[l], J[l]) for l in range(i)) / 4 \
                + sum(_weight(m[l], J[l]) for l in range(i + 1, space.n)) / 4
            M[dst[Jn], a] += qpow(ex, kap)
    return M


def _pr_pair(ma, mb, a, b, kappa, cap_b):
    """PR on f^a v_ma (x) f^b v_mb: list of ((a', b'), coeff) in the swapped order.

    Returns terms f^{b+s} v_mb (x) f^{a-s} v_ma.
    """
    out = []
    for s in range(0, a + 1):
        if b + s > cap_b:
            break
        c = qpow(-s * (s + 1) / 4, kappa) * (qpow(0.5, kappa) - qpow(-0.5, kappa)) ** s \
            / qfactorial(s, kappa)
        for r in range(s):
            c *= qnum(a - r, kappa) * qnum(ma - a + r + 1, kappa)
        if c == 0:
            continue
        wa = _weight(ma, a - s)
        wb = _weight(mb, b + s)
        c *= qpow(s * wa / 4, kappa) * qpow(-s * wb / 4, kappa) * qpow(wa * wb / 4, kappa)
        out.append(((b + s, a - s), c))
    return out


def r_check(space, k, i):
    """R^vee_i: layer k of space -> layer k of space.swapped(i) (0-based i)."""
    tgt = space.swapped(i)
    src, dst = space.basis(k), tgt.index(k)
    m = space.weights
    cap = space.base.caps[i + 1]
    M = np.zeros((len(dst), len(src)), dtype=complex)
    for col, J in enumerate(src):
        for (bb, aa), c in _pr_pair(m[i], m[i + 1], J[i], J[i + 1], space.kappa, cap):
            Jn = list(J)
            Jn[i], Jn[i + 1] = bb, aa
            Jn = tuple(Jn)
            if Jn in dst:
                M[dst[Jn], col] += c
    return M, tgt


def r_matrix_apply(space, vec, i=0):
    """Apply PR in positions (i, i+1) to a layer vector; returns (coords, target space)."""
    k = vec.k if isinstance(vec, sl2.WeightVector) else None
    coords = vec.coords if k is not None else np.asarray(vec[1])
    if k is None:
        k = vec[0]
    M, tgt = r_check(space, k, i)
    return M @ coords, tgt


def pr_two_factor_values(m, l, kappa):
    """PR on v_m(x)v_l, v_m(x)fv_l, fv_m(x)v_l as dicts {target label: coeff}.

    Labels are (a, b) for f^a v_l (x) f^b v_m in L_l (x) L_m.
    """
    sp = QVermaTensorSpace.make((m, l), kappa, depth=2)
    out = {}
    for J in [(0, 0), (0, 1), (1, 0)]:
        k = sum(J)
        M, tgt = r_check(sp, k, 0)
        col = M[:, sp.index(k)[J]]
        out[J] = {K: col[idx] for K, idx in tgt.index(k).items() if abs(col[idx]) > 0}
    return out


def pr_displayed_values(m, l, kappa):
    """The three explicit PR values in the uncorrected reference form.

    The second value has target v_l (x) f v_m and the third has second
    coefficient [m] q^{(ml-m-l)/4}.
    """
    return {
        (0, 0): {(0, 0): qpow(m * l / 4, kappa)},
        (0, 1): {(0, 1): qpow(m * (l - 2) / 4, kappa)},
        (1, 0): {(0, 1): qpow(l * (m - 2) / 4, kappa),
                 (1, 0): qnum(m, kappa) * qpow((m * l - m - l) / 4, kappa)},
    }


def pr_derived_values(m, l, kappa):
    """PR values derived from the full R-matrix formula."""
    d = qpow(0.5, kappa) - qpow(-0.5, kappa)
    return {
        (0, 0): {(0, 0): qpow(m * l / 4, kappa)},
        (0, 1): {(1, 0): qpow(m * (l - 2) / 4, kappa)},
        (1, 0): {(0, 1): qpow(l * (m - 2) / 4, kappa),
                 (1, 0): d * qnum(m, kappa) * qpow((m * l - m - l) / 4, kappa)},
    }


def compare_value_tables(a, b):
    """Max coefficient gap between two {source: {target: coeff}} tables."""
    gap = 0.0
    for J in set(a) | set(b):
        ta, tb = a.get(J, {}), b.get(J, {})
        for K in set(ta) | set(tb):
            gap = max(gap, abs(ta.get(K, 0) - tb.get(K, 0)))
    return gap


def intertwiner_residual(space, k, i=0, rng=0):
    """max over x in {e, f, q^h} of ||PR Delta(x) v - Delta(x) PR v|| / ||v|| on random v."""
    rng = np.random.default_rng(rng)
    M0, tgt = r_check(space, k, i)
    v = rng.standard_normal(space.dim(k)) + 1j * rng.standard_normal(space.dim(k))
    res = 0.0
    if k >= 1:
        Mm, _ = r_check(space, k - 1, i)
        lhs = Mm @ (coproduct_e(space, k) @ v)
        rhs = coproduct_e(tgt, k) @ (M0 @ v)
        res = max(res, np.linalg.norm(lhs - rhs) / np.linalg.norm(v))
    if k + 1 <= space.base.depth:
        Mp, _ = r_check(space, k + 1, i)
        lhs = Mp @ (coproduct_f(space, k) @ v)
        rhs = coproduct_f(tgt, k) @ (M0 @ v)
        res = max(res, np.linalg.norm(lhs - rhs) / np.linalg.norm(v))
    lhs = M0 @ (q_h_power(space, k, 1.0) * v)
    rhs = q_h_power(tgt, k, 1.0) * (M0 @ v)
    res = max(res, np.linalg.norm(lhs - rhs) / np.linalg.norm(v))
    return float(res)


def relation_residuals(space, k):
    """Defining relations of U_q on the coproduct action at layer k.

    Returns residuals of [e, f] = (q^{h/2} - q^{-h/2})/(q^{1/2} - q^{-1/2}) and
    q^{h} e = e q^{h+2}.
    """
    kap = space.kappa
    E_k = coproduct_e(space, k)
    F_k = coproduct_f(space, k)
    E_k1 = coproduct_e(space, k + 1)
    F_km = coproduct_f(space, k - 1) if k >= 1 else None
    comm = E_k1 @ F_k
    if k >= 1:
        comm = comm - F_km @ E_k
    qh2 = q_h_power(space, k, 0.5)
    cart = np.diag((qh2 - 1 / qh2) / (qpow(0.5, kap) - qpow(-0.5, kap)))
    r1 = np.linalg.norm(comm - cart) / max(1.0, np.linalg.norm(cart))
    r2 = 0.0
    if k >= 1:
        lhs = np.diag(q_h_power(space, k - 1, 1.0)) @ E_k
        rhs = E_k @ np.diag(q_h_power(space, k, 1.0) * qpow(2.0, kap))
        r2 = np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(lhs))
    return float(r1), float(r2)


# ---------------------------------------------------------------------------
# braids

def braid_representation(word, space, k):
    """Product of R^vee matrices for a word of nonzero ints (+-i for b_i^{+-1}, 1-based).

    The word is applied left to right to vectors (first letter acts first).
    Returns (matrix, target space).
    """
    cur = space
    M = np.eye(space.dim(k), dtype=complex)
    for g in word:
        i = abs(g) - 1
        if not 0 <= i < space.n - 1:
            raise ValueError(f"generator {g} out of range")
        if g > 0:
            R, nxt = r_check(cur, k, i)
        else:
            nxt = cur.swapped(i)
            R = np.linalg.inv(r_check(nxt, k, i)[0])
        M = R @ M
        cur = nxt
    return M, cur


def ybe_residual(space, k):
    """|| R1 R2 R1 - R2 R1 R2 || / ||R1 R2 R1|| for three factors (first three positions)."""
    A, _ = braid_representation([1, 2, 1], space, k)
    B, _ = braid_representation([2, 1, 2], space, k)
    return float(np.linalg.norm(A - B) / np.linalg.norm(A))


def braid_relation_residuals(space, k):
    """Residuals of b_i b_{i+1} b_i = b_{i+1} b_i b_{i+1} and far commutation."""
    out = {}
    for i in range(1, space.n - 1):
        A, _ = braid_representation([i, i + 1, i], space, k)
        B, _ = braid_representation([i + 1, i, i + 1], space, k)
        out[f"b{i}b{i+1}b{i}"] = float(np.linalg.norm(A - B) / np.linalg.norm(A))
    for i in range(1, space.n):
        for j in range(i + 2, space.n):
            A, _ = braid_representation([i, j], space, k)
            B, _ = braid_representation([j, i], space, k)
            out[f"b{i}b{j}"] = float(np.linalg.norm(A - B) / np.linalg.norm(A))
    for i in range(1, space.n):
        A, _ = braid_representation([i, -i], space, k)
        out[f"b{i}b{i}^-1"] = float(np.linalg.norm(A - np.eye(len(A))))
    return out


def hexagon_residual(space, k, rng=0):
    """The two paths V1V2V3 -> V3V2V1 via (23)(12)(23) and (12)(23)(12) on a random vector."""
    rng = np.random.default_rng(rng)
    v = rng.standard_normal(space.dim(k)) + 1j * rng.standard_normal(space.dim(k))
    A, _ = braid_representation([2, 1, 2], space, k)
    B, _ = braid_representation([1, 2, 1], space, k)
    return float(np.linalg.norm(A @ v - B @ v) / np.linalg.norm(v))


# ---------------------------------------------------------------------------
# quantum singular vectors

def quantum_singular_space(space, k=1):
    """Orthonormal basis (columns) of ker Delta(e) on layer k."""
    return sl2.null_space(coproduct_e(space, k), ncols=space.dim(k))


def quantum_sing_condition(space, sign=1):
    """Coefficients c_j with sum_j c_j I_j = 0 on layer 1.

    c_j = [m_j] q^{sign (sum_{i>j} m_i - sum_{i<j} m_i)/4}.
    """
    m, kap = space.weights, space.kappa
    c = []
    for j in range(space.n):
        ex = sum(m[j + 1:]) - sum(m[:j])
        c.append(qnum(m[j], kap) * qpow(sign * ex / 4, kap))
    return np.array(c)


def pure_braid_invariance(space, basis_cols, k=1):
    """Largest residual of (R^vee_i)^2 basis_cols leaving span(basis_cols)."""
    Q, _ = np.linalg.qr(basis_cols)
    worst = 0.0
    for i in range(1, space.n):
        M, tgt = braid_representation([i, i], space, k)
        img = M @ Q
        worst = max(worst, np.linalg.norm(img - Q @ (Q.conj().T @ img)) / np.linalg.norm(img))
    return float(worst)


def sing_sign_from_invariance(space):
    """Which exponent sign in quantum_sing_condition gives a braid-invariant kernel."""
    out = {}
    for s in (1, -1):
        c = quantum_sing_condition(space, s)
        K = sl2.null_space(c[None, :], ncols=space.n)
        out[s] = pure_braid_invariance(space, K)
    return out


# ---------------------------------------------------------------------------
# Kohno-Drinfeld

def greedy_pairing(a, b):
    """Pair entries of a and b greedily by smallest distance; returns max gap and pairs."""
    a, b = list(a), list(b)
    pairs = []
    while a:
        best = min(((abs(x - y), i, j) for i, x in enumerate(a) for j, y in enumerate(b)))
        _, i, j = best
        pairs.append((a.pop(i), b.pop(j)))
    gap = max((abs(x - y) for x, y in pairs), default=0.0)
    return gap, pairs


def kohno_drinfeld_compare(m, kappa, z=None, generators=None, nseg=64):
    """KZ monodromy of z_i around z_{i+1} vs (R^vee_i)^2 on the quantum Sing, k = 1.

    Returns a list of records (generator, KZ eigenvalues, R eigenvalues, gap).
    For n = 2, k = 1 both sides are 1x1.
    """
    m = tuple(float(x) for x in m)
    n = len(m)
    if z is None:
        z = np.arange(n, dtype=float)
    z = np.asarray(z, dtype=float)
    space = sl2.VermaTensorSpace(m, 2)
    system = kz.KZSystem(space, 1, kappa)
    qspace = QVermaTensorSpace(space, kappa)
    Q = quantum_singular_space(qspace, 1)
    generators = generators or list(range(1, n))
    records = []
    Y0 = kz.fundamental_solutions(system, z)
    for g in generators:
        i = g - 1
        loop = kz.pure_braid_loop(z.astype(complex), i, i + 1, nseg=nseg)
        M = kz.monodromy(system, z.astype(complex), i, loop, Y0)
        kz_eigs = np.linalg.eigvals(M)
        R2, _ = braid_representation([g, g], qspace, 1)
        Rs = np.linalg.lstsq(Q, R2 @ Q, rcond=None)[0]
        r_eigs = np.linalg.eigvals(Rs)
        gap, pairs = greedy_pairing(kz_eigs, r_eigs)
        records.append({"generator": g, "kz": kz_eigs, "r": r_eigs, "gap": gap,
                        "pairs": pairs})
    return records
