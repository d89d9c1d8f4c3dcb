"""Rational q-KZ difference equations.

Functions of k variables t = (t_1..t_k) are numpy callables taking an array
of shape (k, N) and returning shape (N,).  F-spaces are spanned by

    P(t) prod_{l,a} 1/(t_a - z_l - m_l) prod_{a<b} (t_a - t_b)/(t_a - t_b + 1)

with P symmetric of degree < n in each variable (rational flavor), or the
sine analogue (trigonometric flavor).  Here m_l are the F-space weights; the
sl2 highest weight of the matching Verma module is 2 m_l.

R-matrices are obtained by linear algebra on function samples: the
composition omega(z,u)^{-1} omega(u,z) P is solved by least squares and
transposed.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
import math

import numpy as np
from scipy import special

from . import sl2
from .numerics import PoleError, ConvergenceError, trapezoid_line, gamma

SAMPLE_SEED = 20240611


class DegenerateDataError(ValueError):
    """Sample matrix is rank deficient or a function is not in the F-space."""


class DivergentIntegralError(ValueError):
    pass


# ---------------------------------------------------------------------------
# twisted symmetric group

@dataclass(frozen=True)
class TwistFunction:
    """h with h(x)h(-x) = 1: rational (x-1)/(x+1), trigonometric sine ratio
    with step p, elliptic theta ratio with (a, tau)."""
    kind: str = "rational"
    p: float = None
    a: complex = None
    tau: complex = None

    def __post_init__(self):
        if self.kind not in ("rational", "trigonometric", "elliptic"):
            raise ValueError(f"unknown twist kind {self.kind!r}")
        if self.kind == "trigonometric" and not self.p:
            raise ValueError("trigonometric twist needs a nonzero step p")
        if self.kind == "elliptic" and (self.a is None or self.tau is None):
            raise ValueError("elliptic twist needs (a, tau)")

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        if self.kind == "rational":
            return (x - 1) / (x + 1)
        if self.kind == "trigonometric":
            return np.sin(np.pi * (x - 1) / self.p) / np.sin(np.pi * (x + 1) / self.p)
        from .elliptic import theta
        return theta(x - self.a, self.tau) / theta(x + self.a, self.tau)

    def inversion_residual(self, npts=20, seed=0):
        x = np.random.default_rng(seed).normal(size=npts) + 1j * np.random.default_rng(seed + 1).normal(size=npts)
        x = 0.4 * x
        return float(np.max(np.abs(self(x) * self(-x) - 1)))


def twisted_sym_action(h, j, f):
    """s_j f(t) = f(.., t_{j+1}, t_j, ..) h(t_j - t_{j+1}); j is 0-based."""
    def g(T):
        T = np.asarray(T)
        S = T.copy()
        S[[j, j + 1]] = T[[j + 1, j]]
        return f(S) * h(T[j] - T[j + 1])
    return g


@lru_cache(maxsize=None)
def _permutation_words(k):
    """A word in the generators s_0..s_{k-2} for every element of S_k."""
    words = {tuple(range(k)): ()}
    frontier = [tuple(range(k))]
    while frontier:
        nxt = []
        for perm in frontier:
            for j in range(k - 1):
                q = list(perm)
                q[j], q[j + 1] = q[j + 1], q[j]
                q = tuple(q)
                if q not in words:
                    words[q] = words[perm] + (j,)
                    nxt.append(q)
        frontier = nxt
    return tuple(words.values())


def sym_h(h, f, k):
    """Sum of the twisted action of all of S_k on f."""
    terms = []
    for word in _permutation_words(k):
        g = f
        for j in reversed(word):
            g = twisted_sym_action(h, j, g)
        terms.append(g)

    def out(T):
        return sum(g(T) for g in terms)
    return out


# ---------------------------------------------------------------------------
# F-spaces

def _delta(T, flavor, p):
    k = T.shape[0]
    out = np.ones(T.shape[1], dtype=complex)
    for a in range(k):
        for b in range(a + 1, k):
            d = T[a] - T[b]
            if flavor == "rational":
                out = out * d / (d + 1)
            else:
                out = out * np.sin(np.pi * d / p) / np.sin(np.pi * (d + 1) / p)
    return out


def _pole_factor(T, z, m, flavor, p):
    out = np.ones(T.shape[1], dtype=complex)
    for zl, ml in zip(z, m):
        for a in range(T.shape[0]):
            if flavor == "rational":
                out = out / (T[a] - zl - ml)
            else:
                out = out * np.exp(1j * np.pi * (zl - T[a]) / p) / np.sin(np.pi * (T[a] - zl - ml) / p)
    return out


def _twist_for(flavor, p):
    return TwistFunction("rational") if flavor == "rational" else TwistFunction("trigonometric", p=p)


@dataclass
class FFunction:
    """An element of F^k_{m}(z) given by a callable on (k, N) sample arrays."""
    func: object
    k: int
    m: tuple
    z: tuple
    flavor: str = "rational"
    p: float = None

    def __call__(self, T):
        T = np.asarray(T, dtype=complex)
        if self.k == 0:
            return np.ones(T.shape[-1], dtype=complex) * self.func(T)
        return self.func(T)


@dataclass
class FSpace:
    m: tuple
    z: tuple
    k: int
    flavor: str = "rational"
    p: float = None
    seed: int = SAMPLE_SEED

    def __post_init__(self):
        self.m = tuple(self.m)
        self.z = tuple(complex(v) for v in self.z)
        if self.flavor not in ("rational", "trigonometric"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.flavor == "trigonometric" and not self.p:
            raise ValueError("trigonometric flavor needs the step p")
        if len(self.m) != len(self.z):
            raise ValueError("m and z must have equal length")

    @property
    def n(self):
        return len(self.m)

    @property
    def dim(self):
        return math.comb(self.n - 1 + self.k, self.k)

    def exponent_sets(self):
        """Partitions with k parts in [0, n-1], one per symmetric monomial."""
        return list(combinations_with_replacement(range(self.n), self.k))

    def basis(self):
        return f_space_basis(self.flavor, self.m, self.z, self.k, self.p)

    def sample_points(self, npts=None):
        npts = npts or max(2 * self.dim, self.dim + 4)
        rng = np.random.default_rng(self.seed + 7 * self.k + self.n)
        zc = np.mean(self.z) if self.n else 0
        T = zc + 1.5 * (rng.normal(size=(self.k, npts)) + 1j * rng.normal(size=(self.k, npts)))
        return T

    def evaluation_matrix(self, T=None):
        T = self.sample_points() if T is None else T
        return np.array([b(T) for b in self.basis()]).T, T

    def coordinates(self, f, tol=1e-8):
        """Coordinates of f in the symmetric-monomial basis and the relative
        least-squares residual.  Raises DegenerateDataError above tol."""
        if f.k != self.k:
            raise ValueError("layer mismatch")
        E, T = self.evaluation_matrix()
        y = f(T)
        scale = np.linalg.norm(E, axis=0)
        c, *_ = np.linalg.lstsq(E / scale, y, rcond=None)
        res = np.linalg.norm(E / scale @ c - y) / max(np.linalg.norm(y), 1e-300)
        if res > tol:
            raise DegenerateDataError(f"function not in the F-space (residual {res:.2e})")
        return c / scale, float(res)

    def contains(self, f, tol=1e-8):
        try:
            self.coordinates(f, tol)
        except DegenerateDataError:
            return False
        return True


def _monomial_symmetric(T, exps, flavor, p):
    vals = T if flavor == "rational" else np.exp(2j * np.pi * T / p)
    out = 0
    for perm in set(permutations(exps)):
        term = np.ones(T.shape[1], dtype=complex)
        for a, e in enumerate(perm):
            term = term * vals[a] ** e
        out = out + term
    return out


def f_space_basis(flavor, m, z, k, p=None):
    """Symmetric-monomial basis of F^k_m(z); degree < n per variable."""
    space = FSpace(m, z, k, flavor, p)
    if k == 0:
        return [FFunction(lambda T: 1.0, 0, space.m, space.z, flavor, p)]
    out = []
    for exps in space.exponent_sets():
        def f(T, exps=exps):
            return (_monomial_symmetric(T, exps, flavor, p)
                    * _pole_factor(T, space.z, space.m, flavor, p) * _delta(T, flavor, p))
        out.append(FFunction(f, k, space.m, space.z, flavor, p))
    return out


def single_generator(m, z, k, flavor="rational", p=None):
    """omega_k (rational) or W_k (trigonometric) spanning the n = 1 space."""
    def f(T):
        return _pole_factor(T, (z,), (m,), flavor, p) * _delta(T, flavor, p)
    if k == 0:
        return FFunction(lambda T: 1.0, 0, (m,), (complex(z),), flavor, p)
    return FFunction(f, k, (m,), (complex(z),), flavor, p)


def _exchange_factor(t, z, m, flavor, p):
    if flavor == "rational":
        return (t - z + m) / (t - z - m)
    return np.sin(np.pi * (t - z + m) / p) / np.sin(np.pi * (t - z - m) / p)


def tensor_map(f, g):
    """F^{k'}(z') (x) F^{k''}(z'') -> F^{k'+k''}(z', z'')."""
    if f.flavor != g.flavor or f.p != g.p:
        raise ValueError("flavors must match")
    flavor, p = f.flavor, f.p
    k1, k2 = f.k, g.k
    k = k1 + k2
    z1, m1 = f.z, f.m

    def prod(T):
        out = f(T[:k1]) * g(T[k1:])
        for j in range(k1, k):
            for zl, ml in zip(z1, m1):
                out = out * _exchange_factor(T[j], zl, ml, flavor, p)
        return out

    if k == 0:
        return FFunction(lambda T: 1.0, 0, f.m + g.m, f.z + g.z, flavor, p)
    sym = sym_h(_twist_for(flavor, p), prod, k)
    norm = math.factorial(k1) * math.factorial(k2)
    return FFunction(lambda T: sym(T) / norm, k, f.m + g.m, f.z + g.z, flavor, p)


def _trig_normalizer(m, k, p):
    c = 1.0
    for s in range(k):
        c *= np.sin(np.pi * (2 * m - s) / p) / np.sin(np.pi / p)
    return c


def omega_map(m, z, J, flavor="rational", p=None):
    """Image of the basis vector J (dual basis for the rational flavor,
    f^J v for the trigonometric one with the C_k normalizer) in F(z)."""
    out = None
    for ml, zl, j in zip(m, z, J):
        g = single_generator(ml, zl, j, flavor, p)
        if flavor == "trigonometric" and j:
            c = _trig_normalizer(ml, j, p)
            g = FFunction(lambda T, g=g, c=c: c * g(T), g.k, g.m, g.z, flavor, p)
        out = g if out is None else tensor_map(out, g)
    return out


# ---------------------------------------------------------------------------
# rational R-matrix

def layer_basis(k):
    """Two-factor layer basis (k,0), (k-1,1), ..., (0,k)."""
    return [(k - i, i) for i in range(k + 1)]


def rational_r_matrix(a, b, z, u, k):
    """R_{a,b}(z, u) on layer k of M_a (x) M_b, basis layer_basis(k).

    Columns of X express omega(u,z)(P e_I) in the basis omega(z,u)(e_J);
    R is the dual map, i.e. X transposed.
    """
    sp = FSpace((a, b), (z, u), k)
    T = sp.sample_points(max(4 * (k + 1), 8))
    basis = layer_basis(k)
    A = np.array([omega_map((a, b), (z, u), J)(T) for J in basis]).T
    B = np.array([omega_map((b, a), (u, z), (J[1], J[0]))(T) for J in basis]).T
    if np.linalg.matrix_rank(A, tol=1e-10 * np.linalg.norm(A)) < len(basis):
        raise DegenerateDataError("omega(z, u) is singular at these points")
    X, *_ = np.linalg.lstsq(A, B, rcond=None)
    res = np.linalg.norm(A @ X - B) / np.linalg.norm(B)
    if res > 1e-8:
        raise DegenerateDataError(f"basis change residual {res:.2e}")
    return X.T


def r_matrix(a, b, x, k):
    """R_{a,b}(x) := R_{a,b}(z, u) with x = u - z."""
    return rational_r_matrix(a, b, 0.0, x, k)


def spin_half_r(x):
    """The explicit 4x4 matrix on C^2 (x) C^2, basis ++, +-, -+, --."""
    return np.array([[1, 0, 0, 0],
                     [0, x / (x + 1), 1 / (x + 1), 0],
                     [0, 1 / (x + 1), x / (x + 1), 0],
                     [0, 0, 0, 1]], dtype=complex)


def spin_half_from_f_space(x):
    """The 4x4 R-matrix assembled from F-space blocks at m = 1/2, restricted
    to the irreducible quotient (layer 2 keeps f v (x) f v only)."""
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = r_matrix(0.5, 0.5, x, 0)[0, 0]
    R[1:3, 1:3] = r_matrix(0.5, 0.5, x, 1)
    R2 = r_matrix(0.5, 0.5, x, 2)
    leak = max(abs(R2[1, 0]), abs(R2[1, 2]))
    if leak > 1e-8:
        raise DegenerateDataError("R does not preserve the submodule")
    R[3, 3] = R2[1, 1]
    return R


# ---------------------------------------------------------------------------
# q-KZ operators

@dataclass
class QKZConnection:
    """Rational q-KZ data on layer k of M_{m_1} (x) ... (x) M_{m_n}.

    m are F-space weights; irreducible marks factors with 2 m_l a
    nonnegative integer to be replaced by the irreducible quotient.
    """
    m: tuple
    p: complex
    mu: complex = 0.0
    irreducible: tuple = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.p == 0:
            raise ValueError("the step p must be nonzero")
        self.m = tuple(self.m)

    @property
    def n(self):
        return len(self.m)

    def space(self, k):
        return sl2.VermaTensorSpace(tuple(2 * v for v in self.m), max(k, 1), self.irreducible)

    def pair_block(self, a, b, x, s):
        """R_{V_a, V_b}(z, u) on layer s, with x = u - z."""
        key = (a, b, complex(x), s)
        if key not in self._cache:
            self._cache[key] = r_matrix(self.m[a], self.m[b], x, s)
        return self._cache[key]


def pair_operator(conn, z, i, j, x, k):
    """R_{V_i, V_j}(x) (x = u - z) embedded in layer k; V_i is the first leg."""
    sp = conn.space(k)
    basis, idx = sp.basis(k), sp.index(k)
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, J in enumerate(basis):
        s = J[i] + J[j]
        blk = conn.pair_block(i, j, x, s)
        src = layer_basis(s).index((J[i], J[j]))
        for r, (ji, jj) in enumerate(layer_basis(s)):
            Jn = list(J)
            Jn[i], Jn[j] = ji, jj
            Jn = tuple(Jn)
            if Jn in idx:
                M[idx[Jn], col] += blk[r, src]
            elif abs(blk[r, src]) > 1e-8 and sp.allows(J):
                # leaking out of the quotient is allowed only from the submodule
                pass
    return M


def qkz_operator(conn, z, i, k):
    """K_i(z) on layer k (0-based factor index i).

    K_i = R_{i,i-1}(z_i + p, z_{i-1}) ... R_{i,1}(z_i + p, z_1) e^{mu h^{(i)}}
          R_{i,n}(z_i, z_n) ... R_{i,i+1}(z_i, z_{i+1}),
    with R_{a,b}(z, u) the F-space R-matrix (a function of u - z).
    """
    z = np.asarray(z, dtype=complex)
    sp = conn.space(k)
    K = np.eye(sp.dim(k), dtype=complex)
    for j in range(i + 1, conn.n):
        K = pair_operator(conn, z, i, j, z[j] - z[i], k) @ K
    K = np.diag(np.exp(conn.mu * sl2.factor_h(sp, k, i))) @ K
    for j in range(0, i):
        K = pair_operator(conn, z, i, j, z[j] - z[i] - conn.p, k) @ K
    return K


def flatness_residual(conn, z, i, j, k):
    """|K_i(z + p e_j) K_j(z) - K_j(z + p e_i) K_i(z)| relative."""
    z = np.asarray(z, dtype=complex)
    zj, zi = z.copy(), z.copy()
    zj[j] += conn.p
    zi[i] += conn.p
    L = qkz_operator(conn, zj, i, k) @ qkz_operator(conn, z, j, k)
    R = qkz_operator(conn, zi, j, k) @ qkz_operator(conn, z, i, k)
    return float(np.linalg.norm(L - R) / np.linalg.norm(L))


def qybe_residual(m, x, k):
    """R12(x1-x2) R13(x1-x3) R23(x2-x3) vs the reversed product, layer k."""
    conn = QKZConnection(m, 1.0)
    x = np.asarray(x, dtype=complex)
    R12 = pair_operator(conn, x, 0, 1, x[0] - x[1], k)
    R13 = pair_operator(conn, x, 0, 2, x[0] - x[2], k)
    R23 = pair_operator(conn, x, 1, 2, x[1] - x[2], k)
    L, R = R12 @ R13 @ R23, R23 @ R13 @ R12
    return float(np.linalg.norm(L - R) / np.linalg.norm(L))


def classical_limit(conn, Z, i, k, S, nu):
    """S (K_i(S Z) - 1) with mu = nu / S, compared against
    -sum_j Omega^{(ij)}/(Z_i - Z_j) + nu h^{(i)} after removing a scalar part.

    With R_{a,b}(z, u) = 1 - (Omega + c)/(z - u) + O((z-u)^{-2}) the limit is
    the KZ connection with kappa = -p.

    Returns (deviation, fitted scalar) where the scalar is the trace
    mismatch per dimension.
    """
    Z = np.asarray(Z, dtype=complex)
    c = QKZConnection(conn.m, conn.p, nu / S, conn.irreducible)
    sp = c.space(k)
    K = qkz_operator(c, S * Z, i, k)
    A = S * (K - np.eye(sp.dim(k)))
    B = -sum(sl2.casimir_pair(sp, i, j, k) / (Z[i] - Z[j]) for j in range(c.n) if j != i)
    B = B + nu * np.diag(sl2.factor_h(sp, k, i))
    D = A - B
    scalar = np.trace(D) / sp.dim(k)
    dev = np.linalg.norm(D - scalar * np.eye(sp.dim(k))) / np.linalg.norm(B)
    return float(dev), complex(scalar)


# ---------------------------------------------------------------------------
# p-deformed master function

def log_y(t, m, p):
    """log of Gamma((t+m)/p) Gamma(1-(t-m)/p) exp(-pi i t/p) (branch by loggamma)."""
    t = np.asarray(t, dtype=complex)
    a, b = (t + m) / p, 1 - (t - m) / p
    if np.any(np.isclose(a, np.round(a.real), atol=1e-14) & (a.real <= 0.5) & (np.abs(a.imag) < 1e-14)):
        raise PoleError("t on a pole of the p-master function")
    if np.any(np.isclose(b, np.round(b.real), atol=1e-14) & (b.real <= 0.5) & (np.abs(b.imag) < 1e-14)):
        raise PoleError("t on a pole of the p-master function")
    return special.loggamma(a) + special.loggamma(b) - 1j * np.pi * t / p


def log_phi(t, z, m, p, form="product"):
    """log of the p-deformed master function.

    form="product": prod_l y(t - z_l, m_l), each factor solving the one-point
    difference equation; form="expanded": the same Gamma factors with
    exp(-pi i t/p) in place of exp(-pi i (t - z_l)/p).  They differ by
    exp(pi i sum z_l/p), which changes sign under z_l -> z_l + p.
    """
    t = np.asarray(t, dtype=complex)
    out = sum(log_y(t - zl, ml, p) for zl, ml in zip(z, m))
    if form == "expanded":
        out = out - 1j * np.pi * sum(z) / p
    elif form != "product":
        raise ValueError(f"unknown form {form!r}")
    return out


def p_master_phi(t, z, m, p, form="product"):
    return np.exp(log_phi(t, z, m, p, form))


def difference_residual(t, m, p):
    """|y(t+p) - (t+m)/(t-m) y(t)| / |y(t+p)| for one factor."""
    t = np.asarray(t, dtype=complex)
    y1 = np.exp(log_y(t + p, m, p))
    y0 = np.exp(log_y(t, m, p))
    return float(np.max(np.abs(y1 - (t + m) / (t - m) * y0) / np.abs(y1)))


def p_form(l, t, z, m):
    """omega_l = 1/(t - z_l - m_l) prod_{j<l} (t - z_j + m_j)/(t - z_j - m_j); l is 1-based."""
    t = np.asarray(t, dtype=complex)
    out = 1 / (t - z[l - 1] - m[l - 1])
    for j in range(l - 1):
        out = out * (t - z[j] + m[j]) / (t - z[j] - m[j])
    return out


def pole_families(z, m, p, forms=True):
    """(rightmost Re of the left pole family, leftmost Re of the right one), p < 0.

    Gamma((t - z + m)/p) has poles at z - m + N|p| (right family) and
    Gamma(1 - (t - z - m)/p) at z + m - (N+1)|p| (left family); the form
    denominators t - z - m extend the left family by one step.
    """
    z = np.asarray(z, dtype=complex).real
    m = np.asarray(m, dtype=float)
    if float(np.real(p)) >= 0:
        raise ValueError("pole families are tabulated for p < 0")
    left = z + m if forms else z + m + float(np.real(p))
    return float(np.max(left)), float(np.min(z - m))


def contour_abscissa(z, m, p):
    lo, hi = pole_families(z, m, p)
    if not lo < hi:
        raise PoleError("no vertical line separates the pole families")
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def g_functional(f, g, z, m, p, c=None, rtol=1e-12, form="product"):
    """int over Re t = c of exp(2 pi i g t/p) Phi_p(t) f(t) dt.

    Requires p < 0 and 1 <= g <= n-1 for exponential decay in both
    directions.
    """
    n = len(m)
    p = float(np.real(p))
    if p >= 0:
        raise ValueError("the functionals need p < 0")
    if not (1 <= g <= n - 1):
        raise DivergentIntegralError(f"G_{g} is defined only for g in 1..{n - 1}")
    c0, d = contour_abscissa(z, m, p)
    c = c0 if c is None else c
    rate = 2 * np.pi * min(g, n - g) / abs(p)
    ymax = float(np.max(np.abs(np.imag(z)))) + 45.0 / rate + 10.0
    h = min(d, 1.0) / 4

    def integrand(t):
        lg = log_phi(t, z, m, p, form) + 2j * np.pi * g * t / p
        return np.exp(lg) * f(t)

    tail = max(abs(integrand(np.array([c - 1j * ymax]))[0]), abs(integrand(np.array([c + 1j * ymax]))[0]))
    val = trapezoid_line(integrand, c, 1j, ymax, h, rtol=rtol)
    if tail > 1e-13 * max(abs(val), 1e-300):
        raise ConvergenceError("contour truncation insufficient")
    return val


def q_hypergeometric_solution(z, m, p, g, c=None):
    """u_g(z) = (int G_g Phi_p omega_l dt)_{l=1..n} on layer 1."""
    return np.array([g_functional(lambda t, l=l: p_form(l, t, z, m), g, z, m, p, c)
                     for l in range(1, len(m) + 1)])


def qkz_solution_residual(z, m, p, g, j):
    """|u(z + p e_j) - K_j(z) u(z)| / |u| with mu = 0, both sides by integration."""
    z = np.asarray(z, dtype=complex)
    u = q_hypergeometric_solution(z, m, p, g)
    zs = z.copy()
    zs[j] += p
    us = q_hypergeometric_solution(zs, m, p, g)
    K = qkz_operator(QKZConnection(m, p), z, j, 1)
    return float(np.linalg.norm(us - K @ u) / np.linalg.norm(us))


def exact_form_residual(f, g, z, m, p):
    """|int_{iR} G_g ((Phi f)(t+p) - (Phi f)(t)) dt| relative to the second term.

    Phi_p(t + p; z) = Phi_p(t; z - p) in product form, so the shifted term
    is the same functional at shifted points; both integrals use Re t = 0.
    """
    z = np.asarray(z, dtype=complex)
    a = g_functional(lambda t: f(t + p), g, z - p, m, p, c=0.0)
    b = g_functional(f, g, z, m, p, c=0.0)
    return float(abs(a - b) / abs(b))


def q_determinant_two_point(z, m, p):
    """(2 m_1/p) int G_1 Phi_p omega_1 against
    2 pi i Gamma(1+2m_1/p)Gamma(1+2m_2/p)/Gamma(1+2(m_1+m_2)/p)
      * Gamma((z_1+m_1-z_2+m_2)/p) Gamma(1+(z_2+m_2-z_1+m_1)/p)."""
    z = np.asarray(z, dtype=complex)
    m1, m2 = m
    num = 2 * m1 / p * g_functional(lambda t: p_form(1, t, z, m), 1, z, m, p, form="expanded")
    closed = (2j * np.pi * gamma(1 + 2 * m1 / p) * gamma(1 + 2 * m2 / p) / gamma(1 + 2 * (m1 + m2) / p)
              * gamma(complex((z[0] + m1 - z[1] + m2) / p)) * gamma(complex(1 + (z[1] + m2 - z[0] + m1) / p)))
    return num, closed, float(abs(num - closed) / abs(closed))


# ---------------------------------------------------------------------------
# Barnes integral

def barnes_integral(a, b, c, d, rtol=1e-13):
    """(numeric over iR, closed form, relative gap) for
    int Gamma(a+t)Gamma(b+t)Gamma(c-t)Gamma(d-t) dt."""
    for v in (a, b, c, d):
        if np.real(v) <= 0:
            raise PoleError("need positive real parts so that iR separates the poles")

    def f(t):
        return np.exp(special.loggamma(a + t) + special.loggamma(b + t)
                      + special.loggamma(c - t) + special.loggamma(d - t))

    # |integrand| ~ |y|^{Re(a+b+c+d)-2} exp(-2 pi |y|)
    s = float(np.real(a + b + c + d)) - 2
    Y = 10.0
    while 2 * np.pi * Y - max(s, 0) * np.log(Y) < 40:
        Y *= 1.5
    Y += float(max(abs(np.imag(v)) for v in (a, b, c, d)))
    h = min(float(min(np.real(v) for v in (a, b, c, d))), 1.0) / 3
    num = trapezoid_line(f, 0.0, 1j, Y, h, rtol=rtol)
    closed = 2j * np.pi * np.exp(special.loggamma(a + c) + special.loggamma(a + d) + special.loggamma(b + c)
                                 + special.loggamma(b + d) - special.loggamma(a + b + c + d))
    return num, closed, float(abs(num - closed) / abs(closed))


# ---------------------------------------------------------------------------
# trigonometric 2x2 R-matrix

def trig_r_matrix_2x2(x, q):
    den = x * q - 1 / q
    if den == 0:
        raise PoleError("x q = 1/q")
    w = q - 1 / q
    return np.array([[1, 0, 0, 0],
                     [0, (x - 1) / den, w / den, 0],
                     [0, x * w / den, (x - 1) / den, 0],
                     [0, 0, 0, 1]], dtype=complex)


def _embed_2x2(R, pair):
    """Place a 4x4 two-factor matrix on legs pair of (C^2)^{x3}."""
    R4 = R.reshape(2, 2, 2, 2)
    out = np.zeros((2,) * 6, dtype=complex)
    legs = [0, 1, 2]
    other = [l for l in legs if l not in pair][0]
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    for e in range(2):
                        idx_out = [0, 0, 0]
                        idx_in = [0, 0, 0]
                        idx_out[pair[0]], idx_out[pair[1]], idx_out[other] = a, b, e
                        idx_in[pair[0]], idx_in[pair[1]], idx_in[other] = c, d, e
                        out[tuple(idx_out) + tuple(idx_in)] = R4[a, b, c, d]
    return out.reshape(8, 8)


def trig_qybe_residual(x, q):
    """QYBE in multiplicative spectral parameters x = (x1, x2, x3)."""
    x1, x2, x3 = x
    R12 = _embed_2x2(trig_r_matrix_2x2(x1 / x2, q), (0, 1))
    R13 = _embed_2x2(trig_r_matrix_2x2(x1 / x3, q), (0, 2))
    R23 = _embed_2x2(trig_r_matrix_2x2(x2 / x3, q), (1, 2))
    L, R = R12 @ R13 @ R23, R23 @ R13 @ R12
    return float(np.linalg.norm(L - R) / np.linalg.norm(L))


PERM4 = np.eye(4)[[0, 2, 1, 3]]


def trig_unitarity(x, q):
    """R(x) P R(1/x) P; returns (matrix, deviation from a multiple of 1)."""
    M = trig_r_matrix_2x2(x, q) @ PERM4 @ trig_r_matrix_2x2(1 / x, q) @ PERM4
    s = np.trace(M) / 4
    return M, float(np.linalg.norm(M - s * np.eye(4)) / abs(s))
