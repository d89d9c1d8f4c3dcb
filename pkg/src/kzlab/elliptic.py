"""Theta functions, the KZB heat equation, Lame functions, Macdonald polynomials.

    theta(lam, tau)       = -sum_j exp(pi i (j+1/2)^2 tau + 2 pi i (j+1/2)(lam+1/2))
    theta_{n,k}(lam, tau) = sum_j exp(2 pi i k [(j + n/2k)^2 tau + (j + n/2k) lam])

Derivatives in lam and tau are taken term by term.  The KZB equation for
one point is 2 pi i kappa u_tau = u'' + p(p+1) rho' u with rho = theta'/theta.
"""
from dataclasses import dataclass
from functools import lru_cache
import json
import math

import numpy as np

from .numerics import ConvergenceError, newton_solve, quad_regularized

TAIL = 1e-17


# ---------------------------------------------------------------------------
# theta series

def _check_tau(tau):
    if np.imag(tau) <= 0:
        raise ValueError("need Im tau > 0")


def _terms_needed(tau, lam, quad, lin):
    """Half-range N with exp(-quad pi Im tau x^2 + lin 2 pi |Im lam| x) < TAIL at x = N + 1/2."""
    a = quad * np.pi * np.imag(tau)
    lam = np.asarray(lam)
    b = 2 * np.pi * lin * (float(np.max(np.abs(np.imag(lam)))) if lam.size else 0.0)
    # solve a x^2 - b x = -log(TAIL) for x = N + 1/2
    c = -math.log(TAIL)
    x = (b + math.sqrt(b * b + 4 * a * c)) / (2 * a)
    return int(math.ceil(x)) + 2


@dataclass(frozen=True)
class ThetaSeries:
    """Truncated theta series: level 2 is the first Jacobi theta, otherwise
    theta_{n,kappa} with kappa = level."""
    tau: complex
    level: int = 2
    n: int = 0
    N: int = None

    def __post_init__(self):
        _check_tau(self.tau)
        if self.level < 1:
            raise ValueError("level must be positive")
        quad = 1 if self.level == 2 else 2 * self.level
        N = self.N if self.N is not None else _terms_needed(self.tau, 0, quad, 1) + abs(self.n)
        object.__setattr__(self, "N", N)
        if self.tail_bound() > 1e-16:
            raise ConvergenceError("truncation too short for the requested tail")

    def tail_bound(self):
        if self.level == 2:
            return math.exp(-np.pi * np.imag(self.tau) * (self.N + 0.5) ** 2)
        k = self.level
        return math.exp(-2 * np.pi * k * np.imag(self.tau) * (self.N - abs(self.n) / (2 * k)) ** 2)

    def __call__(self, lam, dlam=0, dtau=0):
        if self.level == 2 and self.n == 0:
            return theta(lam, self.tau, dlam, dtau, N=self.N)
        return theta_level(self.n, self.level, lam, self.tau, dlam, dtau, N=self.N)


def theta(lam, tau, dlam=0, dtau=0, N=None):
    """First Jacobi theta and its derivatives d^dlam/dlam d^dtau/dtau."""
    _check_tau(tau)
    lam = np.asarray(lam, dtype=complex)
    N = N or _terms_needed(tau, lam, 1, 1)
    j = np.arange(-N, N + 1) + 0.5
    shape = lam.shape
    L = lam.reshape(-1, 1)
    ex = np.pi * 1j * j ** 2 * tau + 2j * np.pi * j * (L + 0.5)
    coef = (2j * np.pi * j) ** dlam * (np.pi * 1j * j ** 2) ** dtau
    return (-np.sum(coef * np.exp(ex), axis=1)).reshape(shape)[()]


def theta_level(n, kappa, lam, tau, dlam=0, dtau=0, N=None):
    """theta_{n,kappa}(lam, tau) with derivatives."""
    _check_tau(tau)
    lam = np.asarray(lam, dtype=complex)
    N = N or _terms_needed(tau, lam, 2 * kappa, kappa) + abs(int(n)) // (2 * kappa) + 1
    a = np.arange(-N, N + 1) + n / (2 * kappa)
    shape = lam.shape
    L = lam.reshape(-1, 1)
    ex = 2j * np.pi * kappa * (a ** 2 * tau + a * L)
    coef = (2j * np.pi * kappa * a) ** dlam * (2j * np.pi * kappa * a ** 2) ** dtau
    return np.sum(coef * np.exp(ex), axis=1).reshape(shape)[()]


def theta_symmetric(n, kappa, lam, tau):
    """theta_{n,k} + theta_{-n,k}; at level 0 the constant 2."""
    if kappa == 0:
        return 2 * np.ones_like(np.asarray(lam, dtype=complex))[()]
    return theta_level(n, kappa, lam, tau) + theta_level(n, kappa, -np.asarray(lam), tau)


def theta_product(lam, tau, terms=None):
    """i e^{pi i (tau/4 - lam)} (x; Q)(Q/x; Q)(Q; Q), x = e^{2 pi i lam}, Q = e^{2 pi i tau}."""
    x = np.exp(2j * np.pi * np.asarray(lam, dtype=complex))
    Q = np.exp(2j * np.pi * tau)
    terms = terms or int(math.ceil(40 / (2 * np.pi * np.imag(tau)))) + 5
    out = 1j * np.exp(1j * np.pi * (tau / 4 - np.asarray(lam)))
    for s in range(terms):
        out = out * (1 - x * Q ** s) * (1 - Q ** (s + 1) / x) * (1 - Q ** (s + 1))
    return out


def rho(lam, tau):
    return theta(lam, tau, 1) / theta(lam, tau)


def rho_prime(lam, tau):
    t0, t1, t2 = theta(lam, tau), theta(lam, tau, 1), theta(lam, tau, 2)
    return (t2 * t0 - t1 ** 2) / t0 ** 2


def wp_constant(tau):
    """c(tau) with rho' = -wp + c, i.e. theta'''(0)/(3 theta'(0))."""
    return theta(0.0, tau, 3) / (3 * theta(0.0, tau, 1))


def wp_from_theta(lam, tau):
    return -rho_prime(lam, tau) + wp_constant(tau)


def wp_lattice(z, tau, rows=None):
    """Weierstrass wp for the lattice Z + tau Z.

    Each row m + n tau is summed in closed form, sum_m (z - m - n tau)^{-2}
    = pi^2/sin^2(pi (z - n tau)); rows then decay geometrically in |n|.
    """
    z = np.asarray(z, dtype=complex)
    rows = rows or int(math.ceil(40 / (2 * np.pi * np.imag(tau)))) + 3
    out = (np.pi / np.sin(np.pi * z)) ** 2 - np.pi ** 2 / 3
    for n in range(1, rows + 1):
        for s in (n, -n):
            out = out + (np.pi / np.sin(np.pi * (z - s * tau))) ** 2 - (np.pi / np.sin(np.pi * s * tau)) ** 2
    return out


# ---------------------------------------------------------------------------
# heat equation and modular action

def heat_residual(n, kappa, lam, tau):
    """|2 pi i kappa d_tau theta_{n,k} - d_lam^2 theta_{n,k}| relative."""
    a = 2j * np.pi * kappa * theta_level(n, kappa, lam, tau, dtau=1)
    b = theta_level(n, kappa, lam, tau, dlam=2)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(a) + np.abs(b)))


def theta_heat_residual(lam, tau):
    """The first Jacobi theta is level 2: 4 pi i d_tau theta = theta''."""
    a = 4j * np.pi * theta(lam, tau, dtau=1)
    b = theta(lam, tau, 2)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(a) + np.abs(b)))


def modular_t_residual(n, kappa, lam, tau):
    q = np.exp(1j * np.pi / kappa)
    a = theta_level(n, kappa, lam, tau + 1)
    b = q ** (n * n / 2) * theta_level(n, kappa, lam, tau)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def modular_s_check(n, kappa, lam, tau):
    """theta_{n,k}(lam/tau, -1/tau) against
    sqrt(-i tau/2k) e^{pi i k lam^2/(2 tau)} sum_m q^{-mn} theta_{m,k}(lam, tau)."""
    _check_tau(-1 / tau)
    q = np.exp(1j * np.pi / kappa)
    lhs = theta_level(n, kappa, lam / tau, -1 / tau)
    rhs = sum(q ** (-m * n) * theta_level(m, kappa, lam, tau) for m in range(2 * kappa))
    rhs = rhs * np.sqrt(-1j * tau / (2 * kappa)) * np.exp(1j * np.pi * kappa * lam ** 2 / (2 * tau))
    return float(abs(lhs - rhs) / abs(rhs))


def theta_modular_s_check(lam, tau):
    """theta(lam/tau, -1/tau) = -i sqrt(-i tau) e^{pi i lam^2/tau} theta(lam, tau)."""
    lhs = theta(lam / tau, -1 / tau)
    rhs = -1j * np.sqrt(-1j * tau) * np.exp(1j * np.pi * lam ** 2 / tau) * theta(lam, tau)
    return float(abs(lhs - rhs) / abs(rhs))


def s_operator(u, kappa):
    """(S u)(lam, tau) = e^{-pi i k lam^2/(2 tau)} tau^{-1/2} u(lam/tau, -1/tau)."""
    def su(lam, tau):
        return np.exp(-1j * np.pi * kappa * lam ** 2 / (2 * tau)) * tau ** -0.5 * u(lam / tau, -1 / tau)
    return su


def s_squared_scalar(n, kappa, lam, tau):
    """c with S^2 theta_{n,k} = c theta_{-n,k}; |c| = 1 (c = -i on the upper half plane)."""
    def u(l, t):
        return theta_level(n, kappa, l, t)
    ss = s_operator(s_operator(u, kappa), kappa)
    return complex(ss(lam, tau) / theta_level(-n, kappa, lam, tau))


def symmetric_theta_rank(kappa, tau, npts=None, seed=0):
    """Numerical rank of theta^S_{0..2k-1} sampled at kappa+3 points."""
    rng = np.random.default_rng(seed)
    npts = npts or kappa + 3
    lam = rng.uniform(-1, 1, npts) + 1j * rng.uniform(-0.3, 0.3, npts)
    M = np.array([theta_symmetric(n, kappa, lam, tau) for n in range(2 * kappa)]).T
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > 1e-10 * s[0]))


def zero_order(u, point, radius=0.2, npts=512):
    """Winding number of u around a small circle centred at point (argument principle)."""
    w = u(point + radius * np.exp(2j * np.pi * np.arange(npts + 1) / npts))
    return float(np.sum(np.diff(np.unwrap(np.angle(w)))) / (2 * np.pi))


def conformal_block_conditions(p, kappa, n, lam, tau, level=None):
    """Residuals of the four conformal-block conditions for u = theta^{p+1} theta^S_{n,L}.

    L defaults to kappa - 2p - 2, the level that makes u quasi-periodic of
    level kappa.  Returns (period 2, period 2 tau, parity, |order - (p+1)|
    at 0 and at 1 + tau).
    """
    L = kappa - 2 * p - 2 if level is None else level
    if L < 0:
        raise ValueError("need kappa >= 2p + 2")

    def u(l):
        return theta(l, tau) ** (p + 1) * theta_symmetric(n, L, l, tau)

    lam = np.asarray(lam, dtype=complex)
    base = np.max(np.abs(u(lam)))
    r1 = np.max(np.abs(u(lam + 2) - u(lam)) / base)
    r2 = np.max(np.abs(u(lam + 2 * tau) * np.exp(2j * np.pi * kappa * (lam + tau)) - u(lam)) / base)
    r3 = np.max(np.abs(u(-lam) - (-1) ** (p + 1) * u(lam)) / base)
    r4 = max(0.0, p + 1 - zero_order(u, 0.0), p + 1 - zero_order(u, 1 + tau))
    return float(r1), float(r2), float(r3), float(r4)


def conformal_block_dimension(p, kappa, tau, seed=0):
    """Rank of the sampled family theta^{p+1} theta^S_{n,L}, n = 0..L."""
    L = kappa - 2 * p - 2
    if L < 0:
        raise ValueError("need kappa >= 2p + 2")
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-1, 1, L + 4) + 1j * rng.uniform(-0.3, 0.3, L + 4)
    M = np.array([theta(lam, tau) ** (p + 1) * theta_symmetric(n, L, lam, tau) for n in range(L + 1)]).T
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > 1e-10 * s[0]))


# ---------------------------------------------------------------------------
# KZB heat equation

def kzb_residual(u, u_ll, u_tau, lam, tau, p, kappa):
    """|2 pi i k u_tau - u'' - p(p+1) rho' u| relative to the term sizes."""
    a = 2j * np.pi * kappa * u_tau
    c = p * (p + 1) * rho_prime(lam, tau) * u
    num = np.abs(a - u_ll - c)
    den = np.abs(a) + np.abs(u_ll) + np.abs(c)
    return float(np.max(num / den))


def theta_power_jet(p, lam, tau):
    """(u, u'', u_tau) for u = theta^{p+1}."""
    t0, t1, t2 = theta(lam, tau), theta(lam, tau, 1), theta(lam, tau, 2)
    tt = theta(lam, tau, dtau=1)
    u = t0 ** (p + 1)
    u_ll = (p + 1) * t0 ** (p - 1) * (p * t1 ** 2 + t0 * t2) if p > 0 else t2
    u_tau = (p + 1) * t0 ** p * tt
    return u, u_ll, u_tau


_FD4 = {1: (np.array([1, -8, 0, 8, -1]) / 12.0), 2: (np.array([-1, 16, -30, 16, -1]) / 12.0)}


def fd_jet(u, lam, tau, h_lam=1e-2, h_tau=1e-2):
    """(u, u'', u_tau) of a callable u(lam, tau) by 4th-order central differences."""
    s = np.arange(-2, 3)
    ul = np.array([u(lam + k * h_lam, tau) for k in s])
    ut = np.array([u(lam, tau + k * h_tau) for k in s])
    return ul[2], _FD4[2] @ ul / h_lam ** 2, _FD4[1] @ ut / h_tau


def free_heat_exponential(mu, kappa):
    """g = exp(lam mu + mu^2 tau/(2 pi i k)), a solution of 2 pi i k g_tau = g''."""
    def g(lam, tau):
        return np.exp(lam * mu + mu ** 2 * tau / (2j * np.pi * kappa))
    return g


def kzb_integral_solution_p1(lam, tau, kappa, mu, rtol=1e-11, shift=1):
    """int_0^1 E(t)^{-2/k} sigma_lam(t) g(lam + 2t/k) dt for p = 1.

    shift = -1 evaluates g(lam - 2t/k) instead; that variant solves the KZB
    equation only when g is constant.

    E(t) = theta(t)/theta'(0), sigma_lam(t) = theta(lam-t)theta'(0)/(theta(lam)theta(t)).
    The integrand behaves like (t(1-t))^{-1-2/k} at the ends; the integral is
    the analytic continuation in the exponent (finite for kappa > 2).
    """
    if not kappa > 2:
        raise ValueError("endpoint exponent -1-2/kappa needs kappa > 2")
    g = free_heat_exponential(mu, kappa)
    d0 = theta(0.0, tau, 1)
    th_lam = theta(lam, tau)
    a = -1 - 2 / kappa

    def smooth(t):
        t = np.asarray(t, dtype=float)
        inner = (t > 0) & (t < 1)
        e = np.ones(t.shape, dtype=complex)
        ti = t[inner]
        e[inner] = theta(ti, tau) / (d0 * ti * (1 - ti))
        return e ** a * theta(lam - t, tau) / th_lam * g(lam + shift * 2 * t / kappa, tau)

    try:
        return quad_regularized(smooth, 0.0, 1.0, (a, a), rtol=rtol)
    except ConvergenceError:
        # the endpoint subtraction limits attainable accuracy as kappa -> 2
        return quad_regularized(smooth, 0.0, 1.0, (a, a), rtol=100 * rtol)


def kzb_p1_residual(lam, tau, kappa, mu, h=1e-2, shift=1):
    def u(l, t):
        return kzb_integral_solution_p1(l, t, kappa, mu, shift=shift)
    jet = fd_jet(u, lam, tau, h, h)
    return kzb_residual(*jet, lam, tau, 1, kappa)


def kzb_p1_symmetrized(lam, tau, kappa, mu):
    """(u(lam) + u(-lam))/2, which is even as the p = 1 parity condition requires."""
    return (kzb_integral_solution_p1(lam, tau, kappa, mu) + kzb_integral_solution_p1(-lam, tau, kappa, mu)) / 2


# ---------------------------------------------------------------------------
# Lame / Hermite

def hermite_critical_point(mu, tau, t0=None, tol=1e-12):
    """t0 with rho(t0) = mu, i.e. a critical point of theta(t) e^{-mu t}."""
    t0 = 0.5 + 0.3 * tau if t0 is None else t0

    def F(x):
        return np.array([rho(x[0], tau) - mu])

    def J(x):
        return np.array([[rho_prime(x[0], tau)]])

    res = newton_solve(F, [t0], jac=J, tol=tol)
    if not res.converged or res.residual > tol:
        raise ConvergenceError("Newton did not find a critical point")
    return complex(res.x[0])


def lame_hermite_check(mu, tau, lam=None):
    """(t0, eigen-residual, E samples) for v = e^{lam mu} theta(lam-t0)/theta(lam).

    v''/v = (log v)'^2 + (log v)'' with (log v)' = mu + rho(lam-t0) - rho(lam);
    E(lam) = v''/v - 2 wp(lam) should not depend on lam.
    """
    t0 = hermite_critical_point(mu, tau)
    if lam is None:
        lam = np.array([0.21 + 0.13j, 0.37 - 0.4j, 0.61 + 0.52j, 0.83 + 0.1j, 0.45 + 0.77j]) * (1 + 0 * tau)
    lam = np.asarray(lam, dtype=complex)
    dl = mu + rho(lam - t0, tau) - rho(lam, tau)
    ddl = rho_prime(lam - t0, tau) - rho_prime(lam, tau)
    wp = wp_from_theta(lam, tau)
    E = dl ** 2 + ddl - 2 * wp
    Em = np.mean(E)
    residual = float(np.max(np.abs(E - Em)) / max(abs(Em), 1.0))
    return t0, residual, E


# ---------------------------------------------------------------------------
# Macdonald polynomials (exact)

def _field():
    import sympy as sp
    q = sp.symbols("q")
    K = sp.QQ.frac_field(q)
    return K, K.gens[0]


_K, _q = _field()


@dataclass
class QLaurent:
    """Laurent polynomial sum_m c_m Q^m, Q = q^x, with c_m in Q(q)."""
    coeffs: dict

    def __post_init__(self):
        self.coeffs = {int(e): c for e, c in self.coeffs.items() if c != _K.zero}

    @classmethod
    def monomial(cls, m, c=None):
        return cls({m: _K.one if c is None else c})

    def __add__(self, other):
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, _K.zero) + c
        return QLaurent(out)

    def __sub__(self, other):
        return self + other.scale(-_K.one)

    def __mul__(self, other):
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                out[i + j] = out.get(i + j, _K.zero) + a * b
        return QLaurent(out)

    def __eq__(self, other):
        return (self - other).coeffs == {}

    def scale(self, c):
        return QLaurent({e: v * c for e, v in self.coeffs.items()})

    def constant_term(self):
        return self.coeffs.get(0, _K.zero)

    def is_even(self):
        return all(self.coeffs.get(-e, _K.zero) == c for e, c in self.coeffs.items())

    def shift(self, s):
        """f(x + s): Q^m -> q^{m s} Q^m."""
        return QLaurent({e: c * _q ** (e * s) for e, c in self.coeffs.items()})

    def divide(self, den):
        """Exact division by a Laurent polynomial; raises if not divisible."""
        num, quo = QLaurent(dict(self.coeffs)), {}
        if not num.coeffs:
            return num
        dtop, floor = max(den.coeffs), min(num.coeffs) - min(den.coeffs)
        while num.coeffs:
            top = max(num.coeffs)
            if top - dtop < floor:
                raise ValueError("not divisible")
            c = num.coeffs[top] / den.coeffs[dtop]
            quo[top - dtop] = c
            num = num - QLaurent({top - dtop: c}) * den
        return QLaurent(quo)

    def to_table(self):
        return {str(e): str(_K.to_sympy(c)) for e, c in sorted(self.coeffs.items())}

    def to_json(self):
        return json.dumps(self.to_table(), sort_keys=True)


def q_field():
    """(field, q) used for exact Macdonald arithmetic."""
    return _K, _q


def macdonald_kernel(k):
    """prod_{j<k} (1 - q^{2j} Q^2)(1 - q^{2j} Q^{-2})."""
    w = QLaurent.monomial(0)
    for j in range(k):
        w = w * QLaurent({0: _K.one, 2: -_q ** (2 * j)}) * QLaurent({0: _K.one, -2: -_q ** (2 * j)})
    return w


def macdonald_inner(f, g, k):
    return (f * g * macdonald_kernel(k)).constant_term()


def _even_monomial(m):
    if m == 0:
        return QLaurent.monomial(0)
    return QLaurent({m: _K.one, -m: _K.one})


@lru_cache(maxsize=None)
def macdonald_family(nmax, k):
    """(P_0^{(k)}, ..., P_nmax^{(k)}) by exact Gram-Schmidt on Q^m + Q^{-m}."""
    P = []
    for m in range(nmax + 1):
        b = _even_monomial(m)
        v = b
        for prev in P:
            v = v - prev.scale(macdonald_inner(b, prev, k) / macdonald_inner(prev, prev, k))
        P.append(v)
    return tuple(P)


def macdonald_poly(n, k):
    return macdonald_family(n, k)[n]


def shift_operator(f, sign=-1):
    """D f(x) = (f(x-1) + sign f(x+1)) / (q^x + sign q^{-x}).

    sign = -1 is the operator for which D P_n^{(k)} = (q^{-n} - q^n) P_{n-1}^{(k+1)};
    sign = +1 returns None when the quotient is not a Laurent polynomial.
    """
    num = f.shift(-1) + f.shift(1).scale(_K.one * sign)
    den = QLaurent({1: _K.one, -1: _K.one * sign})
    try:
        return num.divide(den)
    except ValueError:
        return None


def shift_operator_check(n, k, sign=-1):
    """True iff D P_n^{(k)} = (q^{-n} - q^n) P_{n-1}^{(k+1)} exactly."""
    if n < 1:
        raise ValueError("need n >= 1")
    lhs = shift_operator(macdonald_poly(n, k), sign)
    if lhs is None:
        return False
    rhs = macdonald_poly(n - 1, k + 1).scale(_q ** (-n) - _q ** n)
    return lhs == rhs


def p22_expected():
    """Q^2 + (1 + 2q^2 + q^4)/(1 + q^2 + q^4) + Q^{-2}."""
    return QLaurent({2: _K.one, 0: (1 + 2 * _q ** 2 + _q ** 4) / (1 + _q ** 2 + _q ** 4), -2: _K.one})
