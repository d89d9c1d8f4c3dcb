"""KZ system, hypergeometric solutions over real cycles, determinants, monodromy.

    d phi / d z_i = (1/kappa) sum_{j != i} Omega^{(ij)} / (z_i - z_j) phi

Integral solutions use Phi_{k,n}^{1/kappa} with every base replaced by its
absolute value on the real cycle; on a fixed real chamber this differs from
any other branch by a constant phase, which is again a solution.
"""
from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from . import sl2
from . import master
from .numerics import (quad_singular, quad_regularized, ode_transport, ContourPath,
                       gamma, PoleError)
from .selberg import simplex_integral, selberg_numeric, SelbergParams


class LinearDependenceError(ValueError):
    """Raised when a set of solutions is numerically dependent."""


@dataclass(frozen=True)
class KZSystem:
    space: sl2.VermaTensorSpace
    k: int
    kappa: complex
    restricted_to_sing: bool = False

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")

    @property
    def m(self):
        return np.array(self.space.weights, dtype=complex)

    @property
    def n(self):
        return self.space.n

    def sing_basis(self):
        """Columns spanning Sing in layer k (orthonormal)."""
        return np.array([w.coords for w in sl2.singular_space(self.space, self.k)]).T


@dataclass(frozen=True)
class HypergeometricCycle:
    """Real cycle: kind "interval" (k=1, z_a..z_b adjacent) or "simplex" (n=2).

    a, b are 0-based indices of the endpoints with z_a < z_b.
    """
    kind: str
    a: int
    b: int

    def __post_init__(self):
        if self.kind not in ("interval", "simplex"):
            raise ValueError(f"unknown cycle kind {self.kind!r}")


def interval_cycle(i):
    """Delta_i = [z_{i-1}, z_i] in 1-based labels (i = 2..n)."""
    return HypergeometricCycle("interval", i - 2, i - 1)


def kz_rhs(system, z, i):
    """(1/kappa) sum_j Omega^{(ij)}/(z_i - z_j), optionally compressed to Sing."""
    H = sl2.gaudin_hamiltonian(system.space, z, i, system.k) / system.kappa
    if system.restricted_to_sing:
        B = system.sing_basis()
        return B.conj().T @ H @ B
    return H


def _prefactor_log(z, m, kappa):
    s = 0.0
    for p, q in combinations(range(len(z)), 2):
        s += m[p] * m[q] / (2 * kappa) * np.log(abs(z[p] - z[q]))
    return s


def _quad(f, a, b, ex):
    if min(ex) > -1:
        return quad_singular(f, a, b, ex)
    return quad_regularized(f, a, b, ex)


def interval_integrals(z, m, kappa, cycle, derivatives=False):
    """I_j = int_{z_a}^{z_b} Phi^{1/kappa} dt/(t - z_j), j = 1..n, k = 1.

    With derivatives=True also returns D[i, j] = d I_j / d z_i, computed by
    differentiating the pulled-back integrand t = z_a + (z_b - z_a) u.
    Endpoint exponents in (-2, -1) are handled by analytic continuation.
    """
    z = np.real(np.asarray(z, dtype=complex))
    m = np.real(np.asarray(m, dtype=complex))
    kappa = float(np.real(kappa))
    n = len(z)
    a, b = cycle.a, cycle.b
    za, zb = z[a], z[b]
    if not za < zb:
        raise ValueError("cycle endpoints must satisfy z_a < z_b")
    inside = [l for l in range(n) if l not in (a, b) and za < z[l] < zb]
    if inside:
        raise ValueError("interval cycles must join adjacent points")
    if za == zb:
        return (np.zeros(n), np.zeros((n, n))) if derivatives else np.zeros(n)
    e = -m / kappa
    L = zb - za
    P = np.exp(_prefactor_log(z, m, kappa))
    others = [l for l in range(n) if l not in (a, b)]

    def smooth(j, extra=None):
        def f(t):
            t = np.asarray(t, dtype=float)
            val = np.full(t.shape, P)
            for l in others:
                val = val * np.abs(t - z[l]) ** (e[l] - (l == j))
            if j in others and z[j] > za:
                val = -val
            if j == b:
                val = -val
            if extra is not None:
                val = val * extra(t)
            return val
        return f

    I = np.zeros(n)
    D = np.zeros((n, n))
    for j in range(n):
        ex = (e[a] - (j == a), e[b] - (j == b))
        I[j] = _quad(smooth(j), za, zb, ex)
        if not derivatives:
            continue
        ee = e - (np.arange(n) == j)
        for i in range(n):
            def dlog(t, i=i, ee=ee):
                u = (t - za) / L
                dt = (1 - u) * (i == a) + u * (i == b)
                out = np.zeros_like(t)
                for p, q in combinations(range(n), 2):
                    if i in (p, q):
                        out += m[p] * m[q] / (2 * kappa) * (1 if i == p else -1) / (z[p] - z[q])
                for l in others:
                    out += ee[l] * (dt - (i == l)) / (t - z[l])
                # endpoint factors at fixed u: d log|t - z_a|, d log|t - z_b| are +-1/L
                if i == a:
                    out += -(ee[a] + ee[b]) / L - 1 / L
                elif i == b:
                    out += (ee[a] + ee[b]) / L + 1 / L
                return out
            D[i, j] = _quad(smooth(j, dlog), za, zb, ex)
    return (I, D) if derivatives else I


def simplex_integrals(z, m, kappa, k):
    """n = 2 solution over the ordered simplex between z_1 < z_2, all k.

    Returns (I, gamma_exp): I_J for J = (k-p, p) in layer order and the
    common homogeneity degree, so d I/d z_2 = gamma_exp/(z_2-z_1) I.
    """
    z = np.real(np.asarray(z, dtype=complex))
    m1, m2 = np.real(np.asarray(m, dtype=complex))
    kappa = float(np.real(kappa))
    L = z[1] - z[0]
    if L <= 0:
        raise ValueError("need z_1 < z_2")
    if k == 0:
        return np.array([L ** (m1 * m2 / (2 * kappa))]), m1 * m2 / (2 * kappa)
    a, b, c = 1 - m1 / kappa, 1 - m2 / kappa, 1 / kappa
    g = m1 * m2 / (2 * kappa) + k * (k - 1) / kappa - k * (m1 + m2) / kappa
    out = []
    for p in range(k, -1, -1)[::-1]:
        total = 0.0
        for S in combinations(range(k), p):
            notS = [i for i in range(k) if i not in S]

            def f(nd, S=S, notS=notS):
                val = (a - 1) * np.sum(nd.ls, axis=0) + (b - 1) * np.sum(nd.l1s, axis=0)
                for v in nd.ldiff.values():
                    val = val + 2 * c * v
                for i in S:
                    val = val - nd.l1s[i]
                for i in notS:
                    val = val - nd.ls[i]
                return val
            total += np.real(simplex_integral(f, k, rtol=1e-10))
        out.append((-1) ** p * total * L ** g)
    # layer order is descending lexicographic: (k,0), (k-1,1), ...
    return np.array(out), g


def hypergeometric_solution(system, cycle, z):
    """Vector of hypergeometric integrals I_J as a WeightVector."""
    m = system.m
    if cycle.kind == "interval":
        if system.k != 1:
            raise ValueError("interval cycles give k = 1 solutions")
        I = interval_integrals(z, m, system.kappa, cycle)
        return sl2.WeightVector(system.space, 1, I.astype(complex))
    if system.n != 2:
        raise ValueError("simplex cycles are implemented for n = 2")
    I, _ = simplex_integrals(z, m, system.kappa, system.k)
    return sl2.WeightVector(system.space, system.k, I.astype(complex))


def singular_identity_residual(system, vec):
    """|e I| relative to the sum of absolute terms (sum_l (j_l+1)(m_l-j_l) I_{J+1_l})."""
    E = sl2.total_e(system.space, system.k)
    num = np.abs(E @ vec.coords)
    den = np.abs(E) @ np.abs(vec.coords)
    return float(np.max(num / np.where(den == 0, 1, den)))


def kz_residual(system, cycle, z, i):
    """||d_i I - rhs_i I|| / ||I|| with d_i I from the differentiated integrand."""
    z = np.asarray(z, dtype=float)
    if cycle.kind == "interval":
        I, D = interval_integrals(z, system.m, system.kappa, cycle, derivatives=True)
        dI = D[i]
    else:
        I, g = simplex_integrals(z, system.m, system.kappa, system.k)
        dI = (g / (z[1] - z[0])) * I * (1 if i == 1 else -1)
    A = sl2.gaudin_hamiltonian(system.space, z, i, system.k) / system.kappa
    return float(np.linalg.norm(dI - A @ I) / np.linalg.norm(I))


def kz_residual_fd(system, cycle, z, i, h=1e-5):
    """Finite-difference version of kz_residual (test oracle)."""
    z = np.asarray(z, dtype=float)
    zp, zm = z.copy(), z.copy()
    zp[i] += h
    zm[i] -= h
    Ip = hypergeometric_solution(system, cycle, zp).coords
    Im = hypergeometric_solution(system, cycle, zm).coords
    I = hypergeometric_solution(system, cycle, z).coords
    A = sl2.gaudin_hamiltonian(system.space, z, i, system.k) / system.kappa
    return float(np.linalg.norm((Ip - Im) / (2 * h) - A @ I) / np.linalg.norm(I))


# ---------------------------------------------------------------------------
# determinant formulas

def euler_determinant(z, alpha):
    """det_{2<=i,j<=n}(alpha_j int_{Delta_i} |Phibar| dt/(t-z_j)) with
    Phibar = prod |t - z_l|^{alpha_l}, and the closed value
    Gamma(alpha_1+1)...Gamma(alpha_n+1)/Gamma(sum alpha+1) prod_{i<j} |z_i-z_j|^{alpha_i+alpha_j}.
    """
    z = np.asarray(z, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    n = len(z)
    if np.any(np.diff(z) <= 0):
        raise ValueError("z must be real increasing")
    if np.any(alpha <= 0):
        raise ValueError("alpha_j > 0 keeps every endpoint integrable")
    M = np.zeros((n - 1, n - 1))
    for r, i in enumerate(range(2, n + 1)):
        # kappa = -1 turns -m/kappa into m: pass alpha as m
        I = interval_integrals(z, alpha, -1.0, interval_cycle(i))
        # remove the constant prefactor prod |z_p - z_q|^{m_p m_q/(2 kappa)}
        I = I / np.exp(_prefactor_log(z, alpha, -1.0))
        for c, j in enumerate(range(2, n + 1)):
            M[r, c] = alpha[j - 1] * I[j - 1]
    det = np.linalg.det(M)
    closed = np.prod([gamma(x + 1) for x in alpha]) / gamma(np.sum(alpha) + 1)
    for p, q in combinations(range(n), 2):
        closed *= abs(z[p] - z[q]) ** (alpha[p] + alpha[q])
    return det, closed


def euler_determinant_check(z, alpha):
    """(numeric det, closed form, relative gap).

    With absolute-value bases the determinant equals (-1)^{n-1} times the
    closed product: each row carries a sign from 1/(t - z_j) for z_j to the
    right of the interval.
    """
    det, closed = euler_determinant(z, alpha)
    sign = (-1) ** (len(z) - 1)
    return det, sign * closed, abs(det - sign * closed) / abs(closed)


def interval_solution_matrix(system, z, derivatives=False):
    """Columns phi^{(Delta_i)}, i = 2..n, in layer-1 coordinates."""
    cols, dcols = [], []
    for i in range(2, system.n + 1):
        res = interval_integrals(z, system.m, system.kappa, interval_cycle(i), derivatives)
        if derivatives:
            cols.append(res[0])
            dcols.append(res[1])
        else:
            cols.append(res)
    Y = np.array(cols).T.astype(complex)
    if derivatives:
        return Y, np.array(dcols)  # dcols[c, i, j] = d I^{(c)}_j / d z_i
    return Y


def sing_trace_predicted(m, i, j, n):
    """tr Omega^{(ij)} on Sing[|m|-2] = (n-1) m_i m_j/2 - m_i - m_j."""
    return (n - 1) * m[i] * m[j] / 2 - m[i] - m[j]


def solution_determinant_check(system, z):
    """Observed d log det / d z_i against sum_j tr_{ij}/(kappa (z_i - z_j)).

    Returns (observed, predicted) arrays of length n.
    """
    if system.k != 1:
        raise ValueError("determinant check is for the k = 1 layer")
    z = np.asarray(z, dtype=float)
    n = system.n
    Y, dY = interval_solution_matrix(system, z, derivatives=True)
    W = system.sing_basis()
    C = np.linalg.lstsq(W, Y, rcond=None)[0]
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] < 1e-12 * s[0]:
        raise LinearDependenceError("hypergeometric solutions are linearly dependent")
    Cinv = np.linalg.inv(C)
    obs = np.zeros(n, dtype=complex)
    pred = np.zeros(n, dtype=complex)
    m = system.m
    for i in range(n):
        dC = np.linalg.lstsq(W, dY[:, i, :].T, rcond=None)[0]
        obs[i] = np.trace(Cinv @ dC)
        for j in range(n):
            if j != i:
                pred[i] += sing_trace_predicted(m, i, j, n) / (system.kappa * (z[i] - z[j]))
    return obs, pred


def sing_trace(system, i, j):
    """Numeric trace of Omega^{(ij)} compressed to Sing."""
    W = system.sing_basis()
    return np.trace(W.conj().T @ sl2.casimir_pair(system.space, i, j, system.k) @ W)


# ---------------------------------------------------------------------------
# resonances

def resonance_membership(system, cycle, z):
    """|sum z_j m_j I_j| / sum |z_j m_j I_j| for a k = 1 interval solution."""
    I = interval_integrals(z, system.m, system.kappa, cycle)
    terms = np.asarray(z) * np.real(system.m) * I
    return float(abs(np.sum(terms)) / np.sum(np.abs(terms)))


def conformal_block_residual(system, cycle, z):
    """Distance of the k = 1 solution from the conformal-block subspace W(z).

    Needs nonnegative integer weights; the irreducible quotients change
    nothing in layer 1 when every m_j >= 1.
    """
    I = hypergeometric_solution(system, cycle, z).coords
    W = np.array([w.coords for w in sl2.conformal_block_subspace(
        system.space, z, system.k, system.kappa)]).T
    proj = W @ (W.conj().T @ I)
    return float(np.linalg.norm(I - proj) / np.linalg.norm(I))


# ---------------------------------------------------------------------------
# monodromy

def fundamental_solutions(system, z):
    """Independent solutions at a real base point as matrix columns."""
    z = np.asarray(z, dtype=float)
    if system.k == 0:
        return np.array([[np.exp(_prefactor_log(z, np.real(system.m), system.kappa))]],
                        dtype=complex)
    if system.k == 1:
        return interval_solution_matrix(system, z)
    if system.n == 2:
        I, _ = simplex_integrals(z, system.m, system.kappa, system.k)
        return I.reshape(-1, 1).astype(complex)
    raise ValueError("no real-cycle basis implemented for this (k, n)")


def transport(system, z0, i, path, Y0):
    """Carry solutions Y0 along a path of the coordinate z_i, others fixed."""
    z0 = np.asarray(z0, dtype=complex)
    others = [z0[j] for j in range(system.n) if j != i]

    def rhs(w):
        z = z0.copy()
        z[i] = w
        return sl2.gaudin_hamiltonian(system.space, z, i, system.k) / system.kappa

    return ode_transport(rhs, path, Y0, singular_points=others)


def monodromy(system, z0, i, loop, Y0=None):
    """Connection matrix M with Y_end = Y0 M for a closed loop of z_i."""
    if abs(loop.points[0] - loop.points[-1]) > 1e-12 and not loop.closed:
        raise ValueError("loop must be closed")
    if abs(loop.points[0] - z0[i]) > 1e-12:
        raise ValueError("loop must start at the base point")
    if Y0 is None:
        Y0 = fundamental_solutions(system, np.real(z0))
    Y1 = transport(system, z0, i, loop, Y0)
    M = np.linalg.lstsq(Y0, Y1, rcond=None)[0]
    return M


def circle_loop(z0, i, j, nseg=48, turns=1):
    """Loop of z_i around z_j: circle centered at z_j through z_i."""
    z0 = np.asarray(z0, dtype=complex)
    r = abs(z0[i] - z0[j])
    start = np.angle(z0[i] - z0[j])
    return ContourPath.circle(z0[j], r, nseg=nseg, start=start, turns=turns)


def pure_braid_loop(z0, i, j, radius=None, nseg=48):
    """Loop of z_i around z_j alone: straight out, small circle, straight back.

    The circle has radius below half the distance from z_j to every other
    point, so no third point is enclosed; orientation is counterclockwise.
    """
    z0 = np.asarray(z0, dtype=complex)
    d = min(abs(z0[j] - z0[l]) for l in range(len(z0)) if l != j)
    r = radius or d / 2
    u = (z0[i] - z0[j]) / abs(z0[i] - z0[j])
    ang = np.angle(u) + 2 * np.pi * np.arange(nseg + 1) / nseg
    circ = list(z0[j] + r * np.exp(1j * ang))
    circ[-1] = circ[0]
    if abs(circ[0] - z0[i]) < 1e-14:
        return ContourPath(tuple(circ), closed=True)
    return ContourPath(tuple([z0[i]] + circ + [z0[i]]), closed=True)


# ---------------------------------------------------------------------------
# asymptotics

def critical_track(inst, t0, z, tol=1e-13):
    """Newton-continue a critical point from inst.z to z."""
    new = master.MasterInstance(inst.k, z, inst.m, inst.kappa)
    res = master.polish(new, t0, tol=tol)
    return new, res.x


def asymptotic_eigencheck(inst, orbit, h=1e-5):
    """Rayleigh eigenvalue of H_i on the Bethe vector against dS/dz_i.

    S(z) = log Phi(t(z), z) with t(z) the tracked critical point; its z
    derivatives are taken by central differences.  Returns the max relative gap
    and the two arrays.
    """
    space = inst.space()
    w = master.bethe_vector(inst, orbit, space).coords
    z = np.array(inst.z)
    eig = np.zeros(inst.n, dtype=complex)
    dS = np.zeros(inst.n, dtype=complex)
    for i in range(inst.n):
        H = sl2.gaudin_hamiltonian(space, z, i, inst.k)
        eig[i] = np.vdot(w, H @ w) / np.vdot(w, w)
        vals = []
        for s in (1, -1):
            zz = z.copy()
            zz[i] += s * h
            new, t = critical_track(inst, orbit.t, zz)
            vals.append(master.log_phi(new, t))
        dS[i] = (vals[0] - vals[1]) / (2 * h)
    gap = np.max(np.abs(eig - dS) / np.maximum(np.abs(eig), 1e-300))
    return float(gap), eig, dS
