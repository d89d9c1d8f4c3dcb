"""Trigonometric KZ operators and the dynamical operator K(z, lambda).

On V = V_2 (x) ... (x) V_n (here indexed 0..N-1 with points z):

    nabla_i = kappa z_i d/dz_i - sum_{j != i} r^{(ij)}(z_i/z_j) - lambda h^{(i)}/2,
    r(z_i/z_j) = (Omega^+ z_i + Omega^- z_j)/(z_i - z_j),
    Omega^+ = h(x)h/4 + e(x)f,  Omega^- = h(x)h/4 + f(x)e,
    P(lambda) = sum_i f^i e^i / i! prod_{j=1}^i 1/(lambda - h/2 - j),
    K(z, lambda) = prod_i (z_i^{h/2})^{(i)} P(lambda).
"""
from dataclasses import dataclass
import math

import numpy as np

from . import sl2
from .numerics import PoleError
from .selberg import SelbergParams, selberg_closed, contiguous_ratio


@dataclass(frozen=True)
class TrigKZSystem:
    space: sl2.VermaTensorSpace
    kappa: complex
    lam: complex

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")


def omega_plus_minus(space, i, j, k):
    """(Omega^+, Omega^-) with first leg in factor i, second in factor j, on layer k."""
    hh = np.diag(sl2.factor_h(space, k, i) * sl2.factor_h(space, k, j) / 4)
    # e_i f_j: layer k -> k (f raises the layer, e lowers it)
    ef = sl2.factor_e(space, k + 1, i) @ sl2.factor_f(space, k, j) if k + 1 <= space.depth \
        else _ef_direct(space, k, i, j)
    fe = sl2.factor_e(space, k + 1, j) @ sl2.factor_f(space, k, i) if k + 1 <= space.depth \
        else _ef_direct(space, k, j, i)
    return hh + ef, hh + fe


def _ef_direct(space, k, i, j):
    """e^{(i)} f^{(j)} on layer k without passing through layer k+1."""
    basis, idx = space.basis(k), space.index(k)
    m = space.weights
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for a, J in enumerate(basis):
        Jn = list(J)
        Jn[j] += 1
        if Jn[i] == 0:
            continue
        c = Jn[i] * (m[i] - Jn[i] + 1)
        Jn[i] -= 1
        Jn = tuple(Jn)
        if Jn in idx:
            M[idx[Jn], a] += c
    return M


def trig_r(space, z, i, k):
    """sum_{j != i} r^{(ij)}(z_i/z_j) on layer k."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros((space.dim(k), space.dim(k)), dtype=complex)
    for j in range(space.n):
        if j == i:
            continue
        if z[i] == z[j]:
            raise sl2.CoincidentPointsError("z_i = z_j")
        Op, Om = omega_plus_minus(space, i, j, k)
        out += (Op * z[i] + Om * z[j]) / (z[i] - z[j])
    return out


def _h_diag(space, k, i=None):
    """Diagonal of h (total, or in factor i) on layer k."""
    if i is None:
        return sl2.total_h(space, k)
    return sl2.factor_h(space, k, i)


def nabla_apply(system, z, i, u, du):
    """nabla_i(kappa, lambda h/2) applied to a section with value u and d u/d z_i = du."""
    sp, k = system.space, _layer_of(system.space, u)
    h = _h_diag(sp, k, i)
    return system.kappa * z[i] * du - trig_r(sp, z, i, k) @ u - system.lam * h / 2 * u


def _layer_of(space, u):
    for k in range(space.depth + 1):
        if space.dim(k) == len(u):
            return k
    raise ValueError("vector length does not match a layer")


def p_lambda_operator(space, k, lam):
    """P(lambda) on layer k (f^i e^i through lower layers only)."""
    d = space.dim(k)
    hvals = _h_diag(space, k)
    P = np.eye(d, dtype=complex)
    E = [None] * (k + 1)
    F = [None] * (k + 1)
    for s in range(1, k + 1):
        E[s] = sl2.total_e(space, k - s + 1)   # layer k-s+1 -> k-s
        F[s] = sl2.total_f(space, k - s)       # layer k-s -> k-s+1
    for i in range(1, k + 1):
        den = np.ones(d, dtype=complex)
        for j in range(1, i + 1):
            x = lam - hvals / 2 - j
            if np.any(x == 0):
                raise PoleError(f"P(lambda) has a pole at lambda = {lam}")
            den *= x
        A = np.eye(d, dtype=complex)
        for s in range(1, i + 1):
            A = E[s] @ A
        for s in range(i, 0, -1):
            A = F[s] @ A
        P += A @ np.diag(1 / den) / math.factorial(i)
    return P


def k_operator(space, z, k, lam):
    """K(z, lambda) = prod (z_i^{h/2})^{(i)} P(lambda) with principal powers."""
    z = np.asarray(z, dtype=complex)
    zp = np.ones(space.dim(k), dtype=complex)
    for i in range(space.n):
        zp *= np.exp(_h_diag(space, k, i) / 2 * np.log(z[i]))
    return np.diag(zp) @ p_lambda_operator(space, k, lam)


def p_lambda_on_single(m, k, lam):
    """prod_{j<k} (lambda + m/2 - j)/(lambda - m/2 + j)."""
    v = 1.0 + 0j
    for j in range(k):
        v *= (lam + m / 2 - j) / (lam - m / 2 + j)
    return v


def dynamical_compatibility_check(system, z, i, k, degree=3):
    """Residual of nabla_i(lambda + kappa) K u = K nabla_i(lambda) u.

    Test sections are u = z_i^d b for basis vectors b and d = 0..degree; the
    derivative of K in z_i is z_i^{-1} (h^{(i)}/2) K, exact.  Also returns
    the pointwise commutator [sum_j r^{(ij)} + lambda h^{(i)}/2, K] the
    identity reduces to.
    """
    sp, kap, lam = system.space, system.kappa, system.lam
    z = np.asarray(z, dtype=complex)
    K = k_operator(sp, z, k, lam)
    h = _h_diag(sp, k, i)
    dK = np.diag(h / 2) @ K / z[i]
    shifted = TrigKZSystem(sp, kap, lam + kap)
    worst = 0.0
    scale = max(1.0, np.linalg.norm(K))
    for d in range(degree + 1):
        for b in range(sp.dim(k)):
            e = np.zeros(sp.dim(k), dtype=complex)
            e[b] = 1
            u = z[i] ** d * e
            du = d * z[i] ** (d - 1) * e if d else 0 * e
            Ku = K @ u
            dKu = dK @ u + K @ du
            lhs = nabla_apply(shifted, z, i, Ku, dKu)
            rhs = K @ nabla_apply(system, z, i, u, du)
            worst = max(worst, np.linalg.norm(lhs - rhs) / (scale * max(1.0, abs(z[i]) ** d)))
    A = trig_r(sp, z, i, k) + lam * np.diag(h) / 2
    comm = np.linalg.norm(A @ K - K @ A) / (np.linalg.norm(A) * scale)
    return float(worst), float(comm)


def trig_flatness_residual(system, z, i, j, k, h=1e-6):
    """Commutator of the connection matrices (zero curvature) at z.

    Checks d_j A_i - d_i A_j + [A_i, A_j] = 0 with A_i = (r_i + lambda h^{(i)}/2)/(kappa z_i),
    derivatives by central differences.
    """
    sp, kap, lam = system.space, system.kappa, system.lam
    z = np.asarray(z, dtype=complex)

    def A(zz, a):
        return (trig_r(sp, zz, a, k) + lam * np.diag(_h_diag(sp, k, a)) / 2) / (kap * zz[a])

    def d(a, b):
        zp, zm = z.copy(), z.copy()
        zp[b] += h
        zm[b] -= h
        return (A(zp, a) - A(zm, a)) / (2 * h)

    Ai, Aj = A(z, i), A(z, j)
    F = d(i, j) - d(j, i) + Ai @ Aj - Aj @ Ai
    return float(np.linalg.norm(F) / (np.linalg.norm(Ai) * np.linalg.norm(Aj) + 1e-300))


# ---------------------------------------------------------------------------
# one-factor Selberg solution

def selberg_solution(z, m, k, kappa, lam):
    """u(z, lambda) = z^{lambda (m-2k)/(2 kappa)} S_k(a, -m/kappa, 1/kappa),
    a = -(lambda - 1 - (m-2k)/2)/kappa + 1, Selberg value by Gamma products."""
    a = -(lam - 1 - (m - 2 * k) / 2) / kappa + 1
    if k == 0:
        return z ** (lam * m / (2 * kappa))
    S = selberg_closed(SelbergParams(k, a, -m / kappa, 1 / kappa))
    return np.exp(lam * (m - 2 * k) / (2 * kappa) * np.log(complex(z))) * S


def selberg_solution_check(m, k, kappa, lam, z=1.7, h=1e-5):
    """(trig-KZ residual, dynamical residual) for the one-factor solution."""
    u = selberg_solution(z, m, k, kappa, lam)
    du = (selberg_solution(z + h, m, k, kappa, lam) - selberg_solution(z - h, m, k, kappa, lam)) / (2 * h)
    trig = abs(kappa * z * du - lam * (m - 2 * k) / 2 * u) / abs(u)
    K = np.exp((m - 2 * k) / 2 * np.log(complex(z))) * p_lambda_on_single(m, k, lam)
    dyn = abs(selberg_solution(z, m, k, kappa, lam + kappa) - K * u) / abs(K * u)
    return float(trig), float(dyn)
