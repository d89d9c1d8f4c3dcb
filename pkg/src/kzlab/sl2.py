"""Truncated tensor products of sl2 Verma modules.

A basis vector f_J v = f^{j_1} v_{m_1} (x) ... (x) f^{j_n} v_{m_n} is labelled by
the multi-index J.  The weight-|m|-2k layer is spanned by |J| = k and its basis
is listed in descending lexicographic order, so for k = 1 the coordinates are
ordered (1,0,..,0), (0,1,0,..), ..., (0,..,0,1).

Conventions: h = diag(1, -1) on the defining representation,
e f^k v = k(m-k+1) f^{k-1} v, h f^k v = (m-2k) f^k v and
Omega = e(x)f + f(x)e + h(x)h/2.
"""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
import json
import math
import warnings

import numpy as np


class DepthError(ValueError):
    """Raised when an operation leaves the truncated range of layers."""


class CoincidentPointsError(ValueError):
    pass


def _compositions(k, caps):
    """All J with |J| = k and j_i <= caps[i], descending lexicographic."""
    n = len(caps)
    out = []

    def rec(prefix, left, i):
        if i == n - 1:
            if left <= caps[i]:
                out.append(tuple(prefix + [left]))
            return
        for j in range(min(left, caps[i]), -1, -1):
            rec(prefix + [j], left - j, i + 1)

    if n == 0:
        return [()] if k == 0 else []
    rec([], k, 0)
    return out


@dataclass(frozen=True)
class VermaTensorSpace:
    """M_{m_1} (x) ... (x) M_{m_n} truncated to layers |J| <= depth.

    A factor with irreducible flag set and m_i a nonnegative integer is the
    quotient L_{m_i}: powers f^j with j > m_i are dropped.
    """
    weights: tuple
    depth: int = 3
    irreducible: tuple = None

    def __post_init__(self):
        w = tuple(complex(m) if np.iscomplexobj(m) or isinstance(m, complex) else m
                  for m in self.weights)
        object.__setattr__(self, "weights", w)
        if self.irreducible is None:
            object.__setattr__(self, "irreducible", (False,) * len(w))
        if len(self.irreducible) != len(w):
            raise ValueError("one irreducible flag per factor")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    @property
    def n(self):
        return len(self.weights)

    @cached_property
    def caps(self):
        caps = []
        for m, flag in zip(self.weights, self.irreducible):
            if flag and _is_nonneg_int(m):
                caps.append(int(round(np.real(m))))
            else:
                caps.append(self.depth)
        return tuple(caps)

    @property
    def total_weight(self):
        return sum(self.weights)

    def basis(self, k):
        if k < 0:
            return []
        if k > self.depth:
            raise DepthError(f"layer {k} beyond depth {self.depth}")
        return _basis_cached(self.caps, k)

    def index(self, k):
        return {J: a for a, J in enumerate(self.basis(k))}

    def dim(self, k):
        return len(self.basis(k))

    def layer_weight(self, k):
        return self.total_weight - 2 * k

    def allows(self, J):
        return all(0 <= j <= c for j, c in zip(J, self.caps))

    def with_depth(self, depth):
        return VermaTensorSpace(self.weights, depth, self.irreducible)


_BASIS_CACHE = {}


def _basis_cached(caps, k):
    key = (caps, k)
    if key not in _BASIS_CACHE:
        _BASIS_CACHE[key] = tuple(_compositions(k, list(caps)))
    return _BASIS_CACHE[key]


def _is_nonneg_int(m):
    return np.imag(m) == 0 and np.real(m) >= 0 and float(np.real(m)).is_integer()


@dataclass
class WeightVector:
    space: VermaTensorSpace
    k: int
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=complex)
        if self.coords.shape != (self.space.dim(self.k),):
            raise ValueError("coordinate length does not match the layer")

    def as_dict(self):
        return dict(zip(self.space.basis(self.k), self.coords))

    def to_json(self):
        return json.dumps({
            "weights": [[complex(m).real, complex(m).imag] for m in self.space.weights],
            "k": self.k,
            "basis": [list(J) for J in self.space.basis(self.k)],
            "coords": [[c.real, c.imag] for c in self.coords],
        })

    @classmethod
    def from_json(cls, text, depth=None):
        d = json.loads(text)
        w = tuple(complex(a, b) for a, b in d["weights"])
        space = VermaTensorSpace(w, depth or max(d["k"], 1))
        return cls(space, d["k"], [complex(a, b) for a, b in d["coords"]])


@dataclass
class WeightOperator:
    """Dense matrix between two weight layers of the same space."""
    space: VermaTensorSpace
    k_from: int
    k_to: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.space.dim(self.k_to), self.space.dim(self.k_from)):
            raise ValueError("matrix shape does not match the layers")

    def __call__(self, v):
        if v.k != self.k_from:
            raise ValueError("vector lies in the wrong layer")
        return WeightVector(self.space, self.k_to, self.matrix @ v.coords)

    def to_json(self):
        return json.dumps({
            "k_from": self.k_from, "k_to": self.k_to,
            "matrix": [[[c.real, c.imag] for c in row] for row in self.matrix],
        })


# ---------------------------------------------------------------------------
# generator actions

def factor_e(space, k, i):
    """Matrix of e acting in factor i, layer k -> k-1."""
    if k == 0:
        return np.zeros((0, space.dim(0)), dtype=complex)
    src, dst = space.basis(k), space.index(k - 1)
    M = np.zeros((len(dst), len(src)), dtype=complex)
    m = space.weights[i]
    for a, J in enumerate(src):
        j = J[i]
        if j > 0:
            Jn = J[:i] + (j - 1,) + J[i + 1:]
            M[dst[Jn], a] = j * (m - j + 1)
    return M


def factor_f(space, k, i):
    """Matrix of f acting in factor i, layer k -> k+1."""
    if k + 1 > space.depth:
        raise DepthError(f"f from layer {k} leaves the truncation depth {space.depth}")
    src, dst = space.basis(k), space.index(k + 1)
    M = np.zeros((len(dst), len(src)), dtype=complex)
    for a, J in enumerate(src):
        Jn = J[:i] + (J[i] + 1,) + J[i + 1:]
        if Jn in dst:
            M[dst[Jn], a] = 1.0
    return M


def factor_h(space, k, i):
    """Diagonal of h acting in factor i on layer k."""
    m = space.weights[i]
    return np.array([m - 2 * J[i] for J in space.basis(k)], dtype=complex)


def total_e(space, k):
    return sum(factor_e(space, k, i) for i in range(space.n))


def total_f(space, k):
    return sum(factor_f(space, k, i) for i in range(space.n))


def total_h(space, k):
    return np.full(space.dim(k), space.layer_weight(k), dtype=complex)


def act_generator(g, v):
    """Apply e, f or h (acting diagonally on the tensor product) to v."""
    space, k = v.space, v.k
    if g == "h":
        return WeightVector(space, k, total_h(space, k) * v.coords)
    if g == "e":
        if k == 0:
            return WeightVector(space, 0, np.zeros(space.dim(0)))
        return WeightVector(space, k - 1, total_e(space, k) @ v.coords)
    if g == "f":
        return WeightVector(space, k + 1, total_f(space, k) @ v.coords)
    raise ValueError(f"unknown generator {g!r}")


def basis_vector(space, J):
    k = sum(J)
    c = np.zeros(space.dim(k), dtype=complex)
    c[space.index(k)[tuple(J)]] = 1.0
    return WeightVector(space, k, c)


# ---------------------------------------------------------------------------
# Casimir, Gaudin, Shapovalov

def casimir_pair(space, i, j, k):
    """Matrix of Omega^{(ij)} on layer k (symmetric in i, j)."""
    if i == j:
        raise ValueError("need two distinct factors")
    basis, idx = space.basis(k), space.index(k)
    m = space.weights
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for a, J in enumerate(basis):
        M[a, a] += 0.5 * (m[i] - 2 * J[i]) * (m[j] - 2 * J[j])
        for s, t in ((i, j), (j, i)):
            # e in factor s, f in factor t
            if J[s] > 0:
                Jn = list(J)
                Jn[s] -= 1
                Jn[t] += 1
                Jn = tuple(Jn)
                if space.allows(Jn):
                    M[idx[Jn], a] += J[s] * (m[s] - J[s] + 1)
    return M


def gaudin_hamiltonian(space, z, i, k):
    """H_i(z) = sum_{j != i} Omega^{(ij)} / (z_i - z_j) on layer k."""
    z = np.asarray(z, dtype=complex)
    if len(set(np.round(z, 14))) != len(z):
        raise CoincidentPointsError("points z must be distinct")
    H = np.zeros((space.dim(k), space.dim(k)), dtype=complex)
    for j in range(space.n):
        if j != i:
            H += casimir_pair(space, i, j, k) / (z[i] - z[j])
    return H


def shapovalov_diagonal(space, k):
    """S(f_J v, f_J v) = prod_l j_l! m_l (m_l-1) ... (m_l-j_l+1); off-diagonal zero."""
    out = []
    for J in space.basis(k):
        s = 1.0 + 0j
        for j, m in zip(J, space.weights):
            s *= math.factorial(j)
            for r in range(j):
                s *= m - r
        out.append(s)
    return np.array(out)


def shapovalov(space, u, v):
    """Symmetric bilinear Shapovalov form on a weight layer."""
    if isinstance(u, WeightVector):
        if u.k != v.k:
            return 0.0
        k, u, v = u.k, u.coords, v.coords
    else:
        raise TypeError("expected WeightVector arguments")
    return np.sum(shapovalov_diagonal(space, k) * u * v)


# ---------------------------------------------------------------------------
# singular vectors and conformal blocks

def null_space(A, rtol=1e-9, ncols=None):
    """Orthonormal kernel basis (columns) via SVD with a relative threshold."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if ncols is None:
        ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    thresh = rtol * max(smax, 1e-300)
    rank = int(np.sum(s > thresh))
    ambiguous = np.sum((s > thresh * 1e-2) & (s < thresh * 1e2))
    if ambiguous:
        warnings.warn("numerical rank is ambiguous at the kernel threshold",
                      RuntimeWarning, stacklevel=2)
    return vh[rank:].conj().T


def singular_space(space, k):
    """Orthonormal basis of Sing = ker(e) in layer k."""
    if k == 0:
        return [WeightVector(space, 0, np.ones(1))]
    K = null_space(total_e(space, k), ncols=space.dim(k))
    return [WeightVector(space, k, K[:, a]) for a in range(K.shape[1])]


def singular_projector(space, k):
    """Orthogonal projector onto Sing in layer k."""
    B = np.array([w.coords for w in singular_space(space, k)]).T
    return B @ B.conj().T


class ResonanceParameterError(ValueError):
    pass


def conformal_block_subspace(space, z, k, kappa):
    """W(z) = ker e  intersected with  ker (z.e)^p on layer k, p = kappa-1-|m|+2k.

    z.e = sum_i z_i e^{(i)}.  Weights must be nonnegative integers.
    """
    m = [int(round(np.real(w))) for w in space.weights]
    if any(mi < 0 or mi != w for mi, w in zip(m, space.weights)):
        raise ValueError("conformal blocks need nonnegative integer weights")
    p = int(kappa) - 1 - sum(m) + 2 * k
    if p <= 0:
        raise ResonanceParameterError(f"p = {p} must be positive")
    E = total_e(space, k)
    rows = [E]
    if p <= k:
        Z = np.eye(space.dim(k), dtype=complex)
        for s in range(p):
            Zs = sum(zi * factor_e(space, k - s, i) for i, zi in enumerate(z))
            Z = Zs @ Z
        rows.append(Z)
    K = null_space(np.vstack(rows), ncols=space.dim(k))
    return [WeightVector(space, k, K[:, a]) for a in range(K.shape[1])]


def multiplicity(m, k):
    """Multiplicity of L_{|m|-2k} in L_{m_1} (x) ... (x) L_{m_n} (Clebsch-Gordan)."""
    m = [int(x) for x in m]
    if any(x < 0 for x in m):
        raise ValueError("weights must be nonnegative integers")
    mult = {m[0]: 1}
    for l in m[1:]:
        new = {}
        for a, c in mult.items():
            for b in range(a + l, abs(a - l) - 1, -2):
                new[b] = new.get(b, 0) + c
        mult = new
    return mult.get(sum(m) - 2 * k, 0)
