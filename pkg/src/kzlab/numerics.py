"""Numeric substrate: special functions, singular quadrature, Newton, ODE transport.

Complex scalars are plain Python/numpy complex numbers.  Every routine is a
pure function of its arguments.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import linalg, special
from scipy.integrate import solve_ivp


class PoleError(ValueError):
    """Raised when a function is evaluated at (or numerically on) a pole."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative or adaptive procedure fails to converge."""


class SingularJacobianError(RuntimeError):
    pass


class PoleProximityError(ValueError):
    """Raised when an integration path passes too close to a singular point."""


# ---------------------------------------------------------------------------
# Domain types

@dataclass(frozen=True)
class ContourPath:
    """Piecewise-linear path in the complex plane."""
    points: tuple
    closed: bool = False

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a path needs at least two points")
        for p, r in zip(pts[:-1], pts[1:]):
            if p == r:
                raise ValueError("consecutive path points must be distinct")
        if self.closed and pts[0] != pts[-1]:
            raise ValueError("closed path must end where it starts")
        object.__setattr__(self, "points", pts)

    @classmethod
    def segment(cls, a, b):
        return cls((a, b))

    @classmethod
    def circle(cls, center, radius, nseg=32, start=0.0, turns=1):
        """Closed polygon approximating a circle, counterclockwise for turns > 0."""
        nseg = max(int(nseg), 8)
        n = nseg * abs(turns)
        ang = start + np.sign(turns) * 2 * np.pi * np.arange(n + 1) / nseg
        pts = center + radius * np.exp(1j * ang)
        pts[-1] = pts[0]
        return cls(tuple(pts), closed=True)

    def reversed(self):
        return ContourPath(self.points[::-1], self.closed)

    def __add__(self, other):
        if self.points[-1] != other.points[0]:
            raise ValueError("paths must share the junction point")
        pts = self.points + other.points[1:]
        return ContourPath(pts, closed=pts[0] == pts[-1] and len(pts) > 2)

    def segments(self):
        return list(zip(self.points[:-1], self.points[1:]))

    def distance_to(self, w):
        """Minimal distance from the point w to the path."""
        best = np.inf
        for a, b in self.segments():
            d = b - a
            s = np.clip(((w - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
            best = min(best, abs(a + s * d - w))
        return best


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int
    endpoint_exponents: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        if min(self.endpoint_exponents) <= -1:
            raise ValueError("endpoint exponents must exceed -1")


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool = True


# ---------------------------------------------------------------------------
# Special functions

def _is_pole(z):
    z = np.asarray(z, dtype=complex)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def gamma(z):
    """Gamma function for real or complex arguments (vectorized)."""
    if np.any(_is_pole(z)):
        raise PoleError(f"Gamma has a pole at {z}")
    if np.iscomplexobj(z):
        return special.gamma(np.asarray(z, dtype=complex))[()]
    return special.gamma(z)


def rgamma(z):
    """1/Gamma(z), entire; zero at the poles of Gamma."""
    return special.rgamma(z)


def loggamma(z):
    """Principal branch of log Gamma."""
    if np.any(_is_pole(z)):
        raise PoleError(f"Gamma has a pole at {z}")
    return special.loggamma(np.asarray(z, dtype=complex))[()]


def pochhammer(z, n):
    """Rising power (z)_n = z(z+1)...(z+n-1), with (z)_0 = 1."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    out = 1.0 + 0 * z
    for i in range(int(n)):
        out = out * (z + i)
    return out


def gauss_2f1(a, b, c, z, method="auto", rtol=1e-15, max_terms=200000):
    """Gauss hypergeometric function 2F1(a, b; c; z).

    method is "series" (|z| < 1), "euler" (integral representation, needs
    real 0 < b < c and z off [1, inf)), "gauss" (z = 1 closed value) or
    "auto".
    """
    if _is_pole(c):
        raise PoleError("c must not be a nonpositive integer")
    if method == "auto":
        if z == 1:
            method = "gauss"
        elif abs(z) < 0.9:
            method = "series"
        elif _euler_ok(b, c) and not (np.isreal(z) and np.real(z) >= 1):
            method = "euler"
        elif abs(z) < 1:
            method = "series"
        else:
            raise ConvergenceError("no convergent representation for |z| >= 1")
    if method == "gauss":
        if np.real(c - a - b) <= 0:
            raise ConvergenceError("Gauss value needs Re(c-a-b) > 0")
        return gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b))
    if method == "series":
        if abs(z) >= 1:
            raise ConvergenceError("series diverges for |z| >= 1")
        term = 1.0 + 0j
        total = term
        for n in range(max_terms):
            term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
            total += term
            if term == 0 or abs(term) <= rtol * abs(total) and n > 2:
                return total
        raise ConvergenceError("2F1 series did not converge")
    if method == "euler":
        if not _euler_ok(b, c):
            raise ValueError("Euler integral needs real 0 < b < c")
        b = float(np.real(b))
        c = float(np.real(c))
        pref = gamma(c) / (gamma(b) * gamma(c - b))
        val = quad_singular(lambda t: (1 - z * t) ** (-a), 0.0, 1.0, (b - 1, c - b - 1))
        return pref * val
    raise ValueError(f"unknown method {method!r}")


def _euler_ok(b, c):
    return np.isreal(b) and np.isreal(c) and 0 < np.real(b) < np.real(c)


# ---------------------------------------------------------------------------
# Quadrature

def _jacobi_matrix(n, a, b):
    """Symmetric Jacobi matrix of the weight (1-x)^a (1+x)^b on [-1, 1]."""
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    diag[0] = (b - a) / (a + b + 2)
    kk = np.arange(1, n, dtype=float)
    s1 = 2 * kk + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s1 ** 2 * (s1 + 1) * (s1 - 1))
    if n > 1:
        # k = 1 with the factor (1 + a + b) cancelled, finite at a + b = -1
        off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    return diag, np.sqrt(off2)


@lru_cache(maxsize=256)
def _jacobi_unit(n, alpha, beta):
    """Nodes/weights for int_0^1 u^alpha (1-u)^beta g(u) du.

    Golub-Welsch: weights are mu_0 times the squared first eigenvector
    components, which keeps every moment at machine precision even for
    strongly singular endpoints (scipy's roots_jacobi rescales its weights
    and loses ~1e-9 at n = 1000 when an exponent is near -1).
    """
    if n < 1:
        raise ValueError("need at least one node")
    diag, off = _jacobi_matrix(n, beta, alpha)
    if n == 1:
        x, V = diag.copy(), np.ones((1, 1))
    else:
        x, V = linalg.eigh_tridiagonal(diag, off)
    u = 0.5 * (1 + x)
    w = special.beta(alpha + 1, beta + 1) * V[0] ** 2
    return u, 1 - u, w


def gauss_jacobi_unit(n, alpha, beta):
    """Gauss-Jacobi rule on [0, 1] for the weight u^alpha (1-u)^beta.

    Returns (u, 1-u, w).
    """
    return _jacobi_unit(int(n), float(alpha), float(beta))


def quad_singular(f, a, b, exponents=(0.0, 0.0), rtol=1e-12, atol=0.0,
                  n0=16, nmax=4096, return_nodes=False):
    """Integral of |s-a|^alpha |b-s|^beta f(s) ds along the segment [a, b].

    The weight uses distances along the segment, so on a real interval it is
    the positive branch.  Gauss-Jacobi nodes are doubled until two
    successive estimates agree to rtol.  f must accept an array of nodes.
    """
    alpha, beta = (float(e) for e in exponents)
    if alpha <= -1 or beta <= -1:
        raise ValueError("exponents must exceed -1")
    L = b - a
    if L == 0:
        return 0.0
    scale = L * abs(L) ** (alpha + beta)
    prev = None
    n = n0
    while n <= nmax:
        u, _, w = gauss_jacobi_unit(n, alpha, beta)
        val = scale * np.sum(w * f(a + L * u))
        if prev is not None and abs(val - prev) <= max(rtol * abs(val), atol):
            return val
        prev = val
        n *= 2
    raise ConvergenceError(f"quad_singular did not converge with {nmax} nodes")


def quad_regularized(f, a, b, exponents, rtol=1e-12, n0=16, nmax=4096):
    """Analytic continuation of quad_singular to exponents in (-2, -1].

    With the weight u^A (1-u)^B on the pulled-back segment, the smooth
    factor g is split as g(0)(1-u) + g(1)u + u(1-u)R(u); the first two
    pieces are Beta values (continued in A, B) and the remainder is an
    ordinary Gauss-Jacobi integral with exponents A+1, B+1.  This is the
    value a Pochhammer double loop would give after normalization.
    Exponents equal to -1 are poles of the continuation.
    """
    A, B = (float(e) for e in exponents)
    if min(A, B) <= -2:
        raise ValueError("exponents must exceed -2")
    if A == -1 or B == -1:
        raise PoleError("continued integral has a pole at exponent -1")
    if A > -1 and B > -1:
        return quad_singular(f, a, b, (A, B), rtol=rtol, n0=n0, nmax=nmax)
    L = b - a
    if L == 0:
        return 0.0
    g0 = f(np.array([a]))[0]
    g1 = f(np.array([b]))[0]
    scale = L * abs(L) ** (A + B)
    beta = special.beta
    b0, b1 = g0 * beta(A + 1, B + 2), g1 * beta(A + 2, B + 1)
    val = b0 + b1

    def rem(s):
        u = (s - a) / L
        return (f(s) - g0 * (1 - u) - g1 * u) / (u * (1 - u))

    head = val * scale
    tail = quad_singular(rem, a, b, (A + 1, B + 1), rtol=rtol,
                         atol=1e-13 * (abs(b0) + abs(b1)) * abs(scale), n0=n0, nmax=nmax)
    return head + tail / abs(L) ** 2


@lru_cache(maxsize=32)
def _tanh_sinh(level, xmax):
    h = 2.0 ** (-level)
    x = np.arange(-math.ceil(xmax / h), math.ceil(xmax / h) + 1) * h
    s = np.pi * np.sinh(x)
    lu = special.log_expit(s)
    lv = special.log_expit(-s)
    lw = np.log(h * np.pi * np.cosh(x)) + lu + lv
    keep = np.isfinite(lw) & (lu > -700) & (lv > -700)
    return lu[keep], lv[keep], lw[keep]


def tanh_sinh_unit(level=5, xmax=6.2):
    """Double-exponential rule on [0, 1] in log form.

    Returns (log u, log(1-u), log w).  Both log u and log(1-u) are accurate
    near the endpoints, which is what makes corner singularities of nested
    simplex integrands harmless.
    """
    return _tanh_sinh(int(level), float(xmax))


def log1mexp_sum(*logs):
    """log(1 - prod u_i) given log u_i and log(1 - u_i) pairs.

    Pass alternating (log u, log(1-u)) arrays; uses
    1 - u1 u2 ... = (1 - u1) + u1 (1 - u2 ...).
    """
    pairs = list(zip(logs[0::2], logs[1::2]))
    lu, lv = pairs[-1]
    acc = lv
    for lu_i, lv_i in reversed(pairs[:-1]):
        acc = np.logaddexp(lv_i, lu_i + acc)
    return acc


def trapezoid_line(f, center, direction, half_width, h, rtol=1e-12, max_halvings=8):
    """Trapezoidal rule for int f(t) dt along t = center + direction*y, |y| <= half_width.

    The step is halved until successive estimates agree; suitable for
    integrands analytic in a strip around the line and decaying at the ends.
    """
    prev = None
    for _ in range(max_halvings + 1):
        n = int(math.ceil(half_width / h))
        y = np.arange(-n, n + 1) * h
        val = direction * h * np.sum(f(center + direction * y))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        prev = val
        h /= 2
    raise ConvergenceError("trapezoidal refinement did not converge")


# ---------------------------------------------------------------------------
# Newton

def _fd_jacobian(F, x, h=1e-7):
    x = np.asarray(x, dtype=complex)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h * max(1.0, abs(x[j]))
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * e[j]))
    return np.array(cols).T


def newton_solve(F, x0, jac=None, tol=1e-12, maxiter=100, damping=True):
    """Damped Newton iteration for F(x) = 0 over complex vectors."""
    x = np.atleast_1d(np.asarray(x0, dtype=complex)).copy()
    Fx = np.atleast_1d(np.asarray(F(x), dtype=complex))
    res = np.max(np.abs(Fx))
    for it in range(1, maxiter + 1):
        if res <= tol:
            return NewtonResult(x, float(res), it - 1)
        J = np.atleast_2d(jac(x)) if jac is not None else _fd_jacobian(F, x)
        try:
            if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e15:
                raise np.linalg.LinAlgError
            dx = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError:
            raise SingularJacobianError(f"singular Jacobian at iteration {it}")
        step = 1.0
        while True:
            xn = x + step * dx
            with np.errstate(all="ignore"):
                Fn = np.atleast_1d(np.asarray(F(xn), dtype=complex))
            rn = np.max(np.abs(Fn)) if np.all(np.isfinite(Fn)) else np.inf
            if not damping or rn < res or step < 1e-6:
                break
            step *= 0.5
        if not np.isfinite(rn):
            raise ConvergenceError("Newton iterate left the domain")
        x, Fx, res = xn, Fn, rn
    if res <= tol:
        return NewtonResult(x, float(res), maxiter)
    raise ConvergenceError(f"Newton did not reach tol {tol} (residual {res:.3e})")


# ---------------------------------------------------------------------------
# Linear ODE transport

def ode_transport(rhs, path, y0, singular_points=(), min_distance=1e-3,
                  rtol=1e-12, atol=1e-14):
    """Solve dy/dz = rhs(z) y along a piecewise-linear path.

    rhs(z) returns a square matrix; y0 may be a vector or a matrix whose
    columns are transported together.  Each segment is integrated with the
    DOP853 embedded Runge-Kutta pair in the real path parameter.
    """
    if not isinstance(path, ContourPath):
        path = ContourPath(tuple(path))
    for w in singular_points:
        if path.distance_to(w) < min_distance:
            raise PoleProximityError(f"path passes within {min_distance} of {w}")
    y = np.asarray(y0, dtype=complex)
    shape = y.shape
    y = y.reshape(shape[0], -1)
    ncol = y.shape[1]
    for a, b in path.segments():
        d = b - a

        def f(s, yf, a=a, d=d):
            A = np.asarray(rhs(a + s * d), dtype=complex)
            return (A @ yf.reshape(-1, ncol) * d).ravel()

        sol = solve_ivp(f, (0.0, 1.0), y.ravel(), method="DOP853",
                        rtol=rtol, atol=atol * max(1.0, np.max(np.abs(y))))
        if not sol.success:
            raise ConvergenceError(sol.message)
        y = sol.y[:, -1].reshape(-1, ncol)
    return y.reshape(shape)
