"""Master function, Bethe equations, Bethe vectors and related counting.

    Phi_{k,n}(t, z, m) = prod_{i<j} (z_i-z_j)^{m_i m_j/2} prod_{i<j} (t_i-t_j)^2
                         prod_{i,l} (t_i-z_l)^{-m_l}

Everything here works with log Phi (principal logarithms), so branch choices
never enter the critical-point equations.
"""
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, permutations, product
import math

import numpy as np

from . import sl2
from .numerics import newton_solve, ConvergenceError, SingularJacobianError


class CollisionError(ValueError):
    """Raised when t_i = t_j or t_i = z_l."""


@dataclass(frozen=True)
class MasterInstance:
    k: int
    z: tuple
    m: tuple
    kappa: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(np.asarray(self.z, dtype=complex)))
        object.__setattr__(self, "m", tuple(np.asarray(self.m, dtype=complex)))
        if len(self.z) != len(self.m):
            raise ValueError("z and m must have the same length")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        z = np.array(self.z)
        if len(z) > 1 and np.min(np.abs(z[:, None] - z[None, :]) + np.eye(len(z))) == 0:
            raise CollisionError("points z must be distinct")

    @property
    def n(self):
        return len(self.z)

    def space(self, depth=None):
        return sl2.VermaTensorSpace(self.m, depth or self.k + 2)


@dataclass
class CriticalOrbit:
    t: np.ndarray
    hessian_log_det: complex
    residual: float

    def canonical(self):
        return _canonical(self.t)

    def to_record(self):
        return {"t": [[c.real, c.imag] for c in self.t],
                "residual": self.residual,
                "hessian_log_det": [self.hessian_log_det.real, self.hessian_log_det.imag]}


def _check(inst, t):
    t = np.asarray(t, dtype=complex)
    z = np.array(inst.z)
    if t.size != inst.k:
        raise ValueError(f"expected {inst.k} coordinates")
    if inst.k and np.min(np.abs(t[:, None] - z[None, :])) == 0:
        raise CollisionError("t_i = z_l")
    if inst.k > 1:
        d = np.abs(t[:, None] - t[None, :]) + np.eye(inst.k)
        if np.min(d) == 0:
            raise CollisionError("t_i = t_j")
    return t


def log_phi(inst, t):
    t = _check(inst, t)
    z, m = np.array(inst.z), np.array(inst.m)
    s = 0j
    for i, j in combinations(range(inst.n), 2):
        s += m[i] * m[j] / 2 * np.log(z[i] - z[j])
    for i, j in combinations(range(inst.k), 2):
        s += 2 * np.log(t[i] - t[j])
    for i in range(inst.k):
        s -= np.sum(m * np.log(t[i] - z))
    return s


def grad_log_phi(inst, t):
    """Bethe expressions sum_l -m_l/(t_i-z_l) + sum_{j != i} 2/(t_i-t_j)."""
    t = _check(inst, t)
    z, m = np.array(inst.z), np.array(inst.m)
    g = -np.sum(m[None, :] / (t[:, None] - z[None, :]), axis=1)
    for i in range(inst.k):
        for j in range(inst.k):
            if i != j:
                g[i] += 2 / (t[i] - t[j])
    return g


def hess_log_phi(inst, t):
    t = _check(inst, t)
    z, m = np.array(inst.z), np.array(inst.m)
    k = inst.k
    H = np.zeros((k, k), dtype=complex)
    for i in range(k):
        H[i, i] = np.sum(m / (t[i] - z) ** 2)
        for j in range(k):
            if i != j:
                H[i, j] = 2 / (t[i] - t[j]) ** 2
                H[i, i] -= 2 / (t[i] - t[j]) ** 2
    return H


def dz_log_phi(inst, t):
    """Partial derivatives of log Phi in z_1..z_n at fixed t."""
    t = np.asarray(t, dtype=complex)
    z, m = np.array(inst.z), np.array(inst.m)
    out = np.zeros(inst.n, dtype=complex)
    for i in range(inst.n):
        for j in range(inst.n):
            if j != i:
                out[i] += m[i] * m[j] / 2 / (z[i] - z[j])
        out[i] += np.sum(m[i] / (t - z[i]))
    return out


# ---------------------------------------------------------------------------
# weight functions

def _assignments(J):
    """Distinct maps {0..k-1} -> factors with |preimage(l)| = j_l."""
    labels = [l for l, j in enumerate(J) for _ in range(j)]
    return sorted(set(permutations(labels)))


def a_j_coefficient(J, t, z):
    """A_J(t, z) = (1/J!) Sym_t prod_l prod_i 1/(t_{..} - z_l).

    Evaluated as the sum over distinct assignments of the t-variables to the
    points z.  t may be a (k,) vector or an (npts, k) array.
    """
    t = np.asarray(t, dtype=complex)
    z = np.asarray(z, dtype=complex)
    single = t.ndim == 1
    T = t[None, :] if single else t
    if T.shape[1] != sum(J):
        raise ValueError("|J| must equal the number of t variables")
    if np.any(T[..., None] == z):
        raise CollisionError("t_i = z_l")
    total = np.zeros(T.shape[0], dtype=complex)
    for sigma in _assignments(J):
        term = np.ones(T.shape[0], dtype=complex)
        for a, l in enumerate(sigma):
            term = term / (T[:, a] - z[l])
        total += term
    return total[0] if single else total


def weight_function(space, k, t, z):
    """Vector (A_J(t,z))_{|J|=k} in the layer basis order."""
    return np.array([a_j_coefficient(J, t, z) for J in space.basis(k)])


# ---------------------------------------------------------------------------
# critical points

def _canonical(t):
    t = np.asarray(t, dtype=complex)
    return t[np.lexsort((np.round(t.imag, 9), np.round(t.real, 9)))]


def _dedup(orbits, tol=1e-6):
    out = []
    for o in orbits:
        c = o.canonical()
        if not any(np.max(np.abs(c - p.canonical())) < tol for p in out):
            out.append(o)
    return out


def _is_isolated(inst, t, sep=1e-8, bound=1e6):
    z = np.array(inst.z)
    if np.max(np.abs(t)) > bound:
        return False
    if np.min(np.abs(t[:, None] - z[None, :])) < sep:
        return False
    if inst.k > 1:
        d = np.abs(t[:, None] - t[None, :]) + np.eye(inst.k)
        if np.min(d) < sep:
            return False
    return True


def _orbit_from_point(inst, t, residual):
    H = hess_log_phi(inst, t)
    sign, logdet = np.linalg.slogdet(H)
    return CriticalOrbit(np.asarray(t), complex(np.log(sign) + logdet), float(residual))


def polish(inst, t0, tol=1e-12, maxiter=100):
    """Newton refinement of a Bethe root from the start t0."""
    res = newton_solve(lambda t: grad_log_phi(inst, t), t0,
                       jac=lambda t: hess_log_phi(inst, t), tol=tol, maxiter=maxiter)
    return res


def chamber_starts(z, k):
    """One start per bounded chamber of the real arrangement, up to S_k.

    z must be real increasing; chambers are labelled by how many of the k
    ordered points fall in each interval (z_l, z_{l+1}).
    """
    z = np.sort(np.real(np.asarray(z)))
    starts = []
    for combo in combinations_with_replacement(range(len(z) - 1), k):
        pts = []
        for l in sorted(set(combo)):
            c = combo.count(l)
            pts.extend(z[l] + (z[l + 1] - z[l]) * (np.arange(1, c + 1) / (c + 1)))
        starts.append(np.array(sorted(pts, reverse=True), dtype=complex))
    return starts


def _chamber_maximize(inst, t0, tol=1e-12, maxiter=200):
    """Newton inside a real chamber, halving steps that leave the chamber."""
    z = np.sort(np.real(np.array(inst.z)))
    t = np.real(t0).astype(float)

    def cell(x):
        return tuple(np.searchsorted(z, x)), tuple(np.argsort(-x))

    home = cell(t)
    for it in range(maxiter):
        g = np.real(grad_log_phi(inst, t))
        r = np.max(np.abs(g))
        if r <= tol:
            return t.astype(complex), r
        H = np.real(hess_log_phi(inst, t))
        dx = np.linalg.solve(H, -g)
        step = 1.0
        while step > 1e-12:
            tn = t + step * dx
            if cell(tn) == home and _is_isolated(inst, tn.astype(complex)):
                gn = np.max(np.abs(np.real(grad_log_phi(inst, tn))))
                if gn < r or step < 1e-3:
                    break
            step *= 0.5
        t = tn
    raise ConvergenceError("chamber Newton did not converge")


def find_critical_orbits(inst, strategy="real", seeds=None, tol=1e-12, rng=None,
                         nstarts=200, box=None):
    """Critical orbits of log Phi, deduplicated under permutations of t.

    strategy "real": z real increasing and m real negative, one start per
    bounded chamber.  strategy "seeds": Newton from the given seeds.
    strategy "random": nstarts complex random starts in a box around z.
    Returns (orbits, report) where report counts failures.
    """
    report = {"starts": 0, "failed": 0, "collapsed": 0}
    found = []
    if strategy == "real":
        for s in chamber_starts(inst.z, inst.k):
            report["starts"] += 1
            try:
                t, r = _chamber_maximize(inst, s, tol=tol)
                found.append(_orbit_from_point(inst, t, r))
            except (ConvergenceError, np.linalg.LinAlgError):
                report["failed"] += 1
    else:
        if strategy == "random":
            rng = np.random.default_rng(rng)
            z = np.array(inst.z)
            c = np.mean(z)
            R = box or 2 * (np.max(np.abs(z - c)) + 1)
            seeds = c + R * (rng.uniform(-1, 1, (nstarts, inst.k))
                             + 1j * rng.uniform(-1, 1, (nstarts, inst.k)))
        for s in seeds:
            report["starts"] += 1
            try:
                res = polish(inst, s, tol=tol)
            except (ConvergenceError, SingularJacobianError, CollisionError,
                    FloatingPointError, ZeroDivisionError):
                report["failed"] += 1
                continue
            if not _is_isolated(inst, res.x):
                report["failed"] += 1
                continue
            H = hess_log_phi(inst, res.x)
            if abs(np.linalg.det(H)) < 1e-10 * max(1.0, np.max(np.abs(H))) ** inst.k:
                report["failed"] += 1
                continue
            found.append(_orbit_from_point(inst, res.x, res.residual))
    orbits = _dedup(found)
    report["collapsed"] = len(found) - len(orbits)
    report["orbits"] = len(orbits)
    return orbits, report


def selberg_critical_symmetric(k, alpha, beta, gamma):
    """Elementary symmetric functions of the Selberg-integrand critical point.

    Critical points of prod t^alpha (1-t)^beta prod (t_i-t_j)^{2 gamma}
    satisfy alpha/t_i + beta/(t_i-1) + sum 2 gamma/(t_i-t_j) = 0, and
        (j+1)(alpha+beta+(2k-j-2)gamma) lambda_{j+1}
            = (k-j)(alpha+(k-j-1)gamma) lambda_j,    lambda_0 = 1.
    """
    lam = [1.0 + 0j]
    for j in range(k):
        den = (j + 1) * (alpha + beta + (2 * k - j - 2) * gamma)
        if den == 0:
            raise ZeroDivisionError("resonant parameters")
        lam.append(lam[-1] * (k - j) * (alpha + (k - j - 1) * gamma) / den)
    return np.array(lam[1:])


def selberg_lambda_closed(k, alpha, beta, gamma):
    """Closed product lambda_j = C(k,j) prod_{i<=j} (alpha+(k-i)g)/(alpha+beta+(2k-i-1)g)."""
    out = []
    for j in range(1, k + 1):
        v = math.comb(k, j)
        for i in range(1, j + 1):
            v *= (alpha + (k - i) * gamma) / (alpha + beta + (2 * k - i - 1) * gamma)
        out.append(v)
    return np.array(out, dtype=complex)


def elementary_symmetric(t):
    """(e_1, ..., e_k) of the entries of t."""
    c = np.poly(np.asarray(t))
    return np.array([(-1) ** j * c[j] for j in range(1, len(c))])


def selberg_critical_point(k, alpha, beta, gamma):
    """A critical point of the Selberg integrand via the roots of its polynomial."""
    lam = selberg_critical_symmetric(k, alpha, beta, gamma)
    coeffs = np.concatenate([[1.0], [(-1) ** j * lam[j - 1] for j in range(1, k + 1)]])
    return np.sort_complex(np.roots(coeffs))


# ---------------------------------------------------------------------------
# Bethe vectors

def bethe_vector(inst, orbit, space=None):
    """omega(t0, z) = sum_{|J|=k} A_J(t0, z) f_J v."""
    space = space or inst.space()
    t = orbit.t if isinstance(orbit, CriticalOrbit) else np.asarray(orbit)
    return sl2.WeightVector(space, inst.k, weight_function(space, inst.k, t, inst.z))


def bethe_eigenvalues(inst, orbit):
    """Predicted eigenvalues of H_i(z) on the Bethe vector: d log Phi / d z_i."""
    t = orbit.t if isinstance(orbit, CriticalOrbit) else np.asarray(orbit)
    return dz_log_phi(inst, t)


def bethe_eigen_residual(inst, orbit, space=None):
    space = space or inst.space()
    w = bethe_vector(inst, orbit, space).coords
    lam = bethe_eigenvalues(inst, orbit)
    worst = 0.0
    for i in range(inst.n):
        H = sl2.gaudin_hamiltonian(space, inst.z, i, inst.k)
        worst = max(worst, np.linalg.norm(H @ w - lam[i] * w) / np.linalg.norm(w))
    return worst


def two_point_generator(space, k):
    """Standard generator of Sing(M_{m1} (x) M_{m2})[m1+m2-2k].

    Coefficient of f^{k-p} v (x) f^p v is
    (-1)^p / ((k-p)! p! m1(m1-1)..(m1-k+p+1) m2(m2-1)..(m2-p+1)).
    """
    m1, m2 = space.weights
    c = []
    for J in space.basis(k):
        a, p = J
        v = (-1) ** p / (math.factorial(a) * math.factorial(p))
        for i in range(a):
            v /= m1 - i
        for i in range(p):
            v /= m2 - i
        c.append(v)
    return sl2.WeightVector(space, k, c)


def two_point_bethe_constant(m1, m2, k):
    """k! prod_{j=1}^k (m1+m2-(2k-j-1))."""
    v = math.factorial(k)
    for j in range(1, k + 1):
        v *= m1 + m2 - (2 * k - j - 1)
    return v


def two_point_norm_closed(m1, m2, k):
    """k! prod_{l<k} (m1+m2-2k+l+2)^3 / ((m1-l)(m2-l))."""
    v = math.factorial(k)
    for l in range(k):
        v *= (m1 + m2 - 2 * k + l + 2) ** 3 / ((m1 - l) * (m2 - l))
    return v


def norm_hessian_check(inst, orbit, space=None):
    """Shapovalov norm of the Bethe vector against det of the Hessian of log Phi."""
    space = space or inst.space()
    w = bethe_vector(inst, orbit, space)
    lhs = sl2.shapovalov(space, w, w)
    H = hess_log_phi(inst, orbit.t)
    rhs = np.linalg.det(H)
    if abs(rhs) == 0:
        raise ValueError("degenerate Hessian")
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


# ---------------------------------------------------------------------------
# Heine-Stieltjes

def heine_stieltjes(t0, z, m, tol=1e-8):
    """Polynomials u = prod(x - t_i) and H with F u'' + G u' + H u = 0.

    F = prod (x - z_j), G = -sum m_j prod_{l != j} (x - z_l).  Returns
    (u, H, relative remainder) as numpy coefficient arrays, highest power first.
    Raises ValueError when the remainder exceeds tol (t0 is not critical).
    """
    t0 = np.asarray(t0, dtype=complex)
    z = np.asarray(z, dtype=complex)
    m = np.asarray(m, dtype=complex)
    F = np.poly(z)
    G = np.zeros(len(z), dtype=complex)
    for j in range(len(z)):
        G = G - m[j] * np.poly(np.delete(z, j))
    u = np.poly(t0)
    num = np.polyadd(np.polymul(F, np.polyder(u, 2)), np.polymul(G, np.polyder(u)))
    q, r = np.polydiv(num, u)
    scale = max(np.max(np.abs(num)), 1e-300)
    rem = float(np.max(np.abs(r)) / scale)
    H = -q
    if rem > tol:
        raise ValueError(f"remainder {rem:.2e} above tolerance: not a critical point")
    return u, H, rem


# ---------------------------------------------------------------------------
# classification for positive integer weights

def classify_critical_set(m, k, z, rng=0, nstarts=400):
    """Four-case description of critical points for positive integer m.

    case 1: |m|+1-k > k, isolated orbits counted against the multiplicity;
    case 2: |m|+1-k = k, no critical points;
    case 3: 0 <= |m|+1-k < k, critical set consists of lines (not searched);
    case 4: |m|+1-k < 0, no critical points.
    """
    M = sum(int(x) for x in m)
    d = M + 1 - k
    out = {"k": k, "m": list(m), "multiplicity": sl2.multiplicity(m, k)}
    if d > k:
        out["case"] = 1
    elif d == k:
        out["case"] = 2
    elif d >= 0:
        out["case"] = 3
        out["orbits"] = None
        out["note"] = "non-isolated, not searched"
        return out
    else:
        out["case"] = 4
    inst = MasterInstance(k, z, m)
    orbits, report = find_critical_orbits(inst, "random", rng=rng, nstarts=nstarts)
    out["orbits"] = len(orbits)
    out["report"] = report
    out["min_grad_norm_on_grid"] = _grad_norm_floor(inst, rng)
    return out


def _grad_norm_floor(inst, rng, npts=2000):
    """Smallest |grad log Phi| over random sample points (evidence only)."""
    rng = np.random.default_rng(rng)
    z = np.array(inst.z)
    R = 2 * (np.max(np.abs(z - z.mean())) + 1)
    best = np.inf
    for _ in range(npts):
        t = z.mean() + R * (rng.uniform(-1, 1, inst.k) + 1j * rng.uniform(-1, 1, inst.k))
        try:
            best = min(best, np.linalg.norm(grad_log_phi(inst, t)))
        except CollisionError:
            pass
    return float(best)
