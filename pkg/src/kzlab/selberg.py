"""Selberg integrals over the ordered simplex 0 <= s_k < ... < s_1 <= 1.

    S_k(a, b, c) = int prod s_i^{a-1} (1-s_i)^{b-1} prod_{i<j} (s_i-s_j)^{2c} ds

The numeric engine maps the simplex to the unit cube by s_1 = u_1,
s_i = s_{i-1} u_i and applies a tanh-sinh rule per axis, keeping every
factor in log form so that corner singularities never underflow.
"""
from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from .numerics import (gamma, loggamma, quad_singular, tanh_sinh_unit,
                       ConvergenceError, PoleError, _is_pole)


@dataclass(frozen=True)
class SelbergParams:
    k: int
    a: complex
    b: complex
    c: complex

    def check_convergent(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if np.real(self.a) <= 0 or np.real(self.b) <= 0 or np.real(self.c) < 0:
            raise ValueError("numeric evaluation needs Re a > 0, Re b > 0, Re c >= 0")


@dataclass
class SimplexNodes:
    """Log-form nodes for the ordered simplex in [0, 1]^k.

    ls[i], l1s[i]: log s_i, log(1 - s_i); ldiff[(i, j)]: log(s_i - s_j) for
    i < j; lw: log of the quadrature weight including the Jacobian.
    """
    s: np.ndarray
    ls: np.ndarray
    l1s: np.ndarray
    ldiff: dict
    lw: np.ndarray

    @property
    def size(self):
        return self.lw.size


def _simplex_block(LU, LV, lw):
    """SimplexNodes from per-axis log u, log(1-u) arrays of a node block."""
    k = len(LU)
    ls = np.cumsum(np.array(LU), axis=0)
    # Jacobian of s_i = u_1...u_i is prod_{i<k} s_i
    lw = lw + np.sum(ls[:-1], axis=0)
    l1s = np.empty_like(ls)
    for i in range(k):
        acc = LV[i]
        for p in range(i - 1, -1, -1):
            acc = np.logaddexp(LV[p], LU[p] + acc)
        l1s[i] = acc
    ldiff = {}
    for i, j in combinations(range(k), 2):
        # s_i - s_j = s_i (1 - u_{i+1} ... u_j)
        acc = LV[j]
        for p in range(j - 1, i, -1):
            acc = np.logaddexp(LV[p], LU[p] + acc)
        ldiff[(i, j)] = ls[i] + acc
    keep = lw > -745
    return SimplexNodes(np.exp(ls[:, keep]), ls[:, keep], l1s[:, keep],
                        {key: v[keep] for key, v in ldiff.items()}, lw[keep])


def iter_simplex_nodes(k, level):
    """Yield SimplexNodes blocks covering the ordered k-simplex.

    Blocks are slices over the first cube axis so memory stays bounded.
    """
    lu, lv, lw1 = tanh_sinh_unit(level)
    n = lu.size
    if k == 1:
        yield _simplex_block([lu], [lv], lw1.copy())
        return
    rest = np.meshgrid(*([np.arange(n)] * (k - 1)), indexing="ij")
    rest = [g.ravel() for g in rest]
    lw_rest = sum(lw1[i] for i in rest)
    for i0 in range(n):
        LU = [np.full(rest[0].size, lu[i0])] + [lu[i] for i in rest]
        LV = [np.full(rest[0].size, lv[i0])] + [lv[i] for i in rest]
        yield _simplex_block(LU, LV, lw_rest + lw1[i0])


def ordered_simplex_nodes(k, level):
    """All nodes of one level as a single SimplexNodes (small k/level only)."""
    blocks = list(iter_simplex_nodes(k, level))
    if len(blocks) == 1:
        return blocks[0]
    keys = blocks[0].ldiff.keys()
    return SimplexNodes(np.concatenate([b.s for b in blocks], axis=1),
                        np.concatenate([b.ls for b in blocks], axis=1),
                        np.concatenate([b.l1s for b in blocks], axis=1),
                        {key: np.concatenate([b.ldiff[key] for b in blocks]) for key in keys},
                        np.concatenate([b.lw for b in blocks]))


def simplex_integral(log_integrand, k, rtol=1e-10, levels=None):
    """Integrate exp(log_integrand(nodes)) over the ordered k-simplex.

    log_integrand receives a SimplexNodes object and returns an array of log
    values (complex allowed; an additional sign may be folded into the
    imaginary part).  Successive levels are compared until rtol is met.
    """
    if levels is None:
        levels = {1: (4, 5, 6, 7), 2: (3, 4, 5, 6), 3: (2, 3, 4)}[k]
    prev = None
    for level in levels:
        val = 0j
        for nd in iter_simplex_nodes(k, level):
            val += np.sum(np.exp(nd.lw + log_integrand(nd)))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        prev = val
    if k == 3 and prev is not None:
        return prev
    raise ConvergenceError(f"simplex quadrature did not reach rtol={rtol}")


def selberg_log_integrand(a, b, c):
    def f(nd):
        out = (a - 1) * np.sum(nd.ls, axis=0) + (b - 1) * np.sum(nd.l1s, axis=0)
        for v in nd.ldiff.values():
            out = out + 2 * c * v
        return out
    return f


def selberg_numeric(params, rtol=1e-10):
    """Numeric value of the ordered-simplex Selberg integral, k <= 3."""
    params.check_convergent()
    k, a, b, c = params.k, params.a, params.b, params.c
    if k > 3:
        raise ValueError("numeric evaluation is limited to k <= 3")
    if k == 1 and np.isreal(a) and np.isreal(b):
        return quad_singular(lambda s: np.ones_like(s), 0.0, 1.0,
                             (np.real(a) - 1, np.real(b) - 1), rtol=1e-14)
    val = simplex_integral(selberg_log_integrand(a, b, c), k, rtol=rtol)
    return val.real if all(np.isreal(x) for x in (a, b, c)) else val


def _gamma_args(k, a, b, c):
    num, den = [], []
    for j in range(k):
        num += [1 + c + j * c, a + j * c, b + j * c]
        den += [1 + c, a + b + (k + j - 1) * c]
    return num, den


def selberg_closed(params, ordered=True):
    """Gamma-product value of the Selberg integral.

    The product prod_j Gamma(1+c+jc)/Gamma(1+c) Gamma(a+jc)Gamma(b+jc)
    /Gamma(a+b+(k+j-1)c) is the integral over the full cube [0,1]^k; the
    ordered simplex carries an extra 1/k!.  Set ordered=False for the cube.
    """
    k, a, b, c = params.k, params.a, params.b, params.c
    num, den = _gamma_args(k, a, b, c)
    for x in num:
        if _is_pole(x):
            raise PoleError(f"Gamma pole at argument {x}")
    val = 1.0 + 0j
    for x in num:
        val *= gamma(complex(x))
    for x in den:
        if not _is_pole(x):
            val /= gamma(complex(x))
        else:
            val *= 0.0
    if ordered:
        val /= math.factorial(k)
    return val if np.iscomplexobj(np.array([a, b, c])) else val.real


def selberg_log_closed(params, ordered=True):
    k, a, b, c = params.k, params.a, params.b, params.c
    num, den = _gamma_args(k, a, b, c)
    val = sum(loggamma(complex(x)) for x in num) - sum(loggamma(complex(x)) for x in den)
    if ordered:
        val -= math.lgamma(k + 1)
    return val


def contiguous_ratio(k, a, b, c):
    """S_k(a+1, b, c) / S_k(a, b, c) = prod_j (a+jc)/(a+b+(k+j-1)c)."""
    r = 1.0
    for j in range(k):
        r *= (a + j * c) / (a + b + (k + j - 1) * c)
    return r


# ---------------------------------------------------------------------------
# Gaussian limit

def mehta_closed(k, a, c):
    """int_{R^k} exp(-a sum s^2) prod_{i<j} |s_i-s_j|^{2c} ds."""
    val = (2 * np.pi) ** (k / 2) * (2 * a) ** (-k * (c * (k - 1) + 1) / 2)
    for j in range(1, k + 1):
        val *= gamma(1 + j * c) / gamma(1 + c)
    return val


def macdonald_gaussian_value(degrees, c):
    """prod_j Gamma(1 + d_j c)/Gamma(1 + c) for the Gaussian normalized integral."""
    val = 1.0
    for d in degrees:
        val *= gamma(1 + d * c) / gamma(1 + c)
    return val


def mehta_numeric(k, a, c, tail=1e-12, rtol=1e-10):
    """Truncated-box numeric Gaussian integral.

    The box [-L, L]^k uses L with exp(-a L^2) <= tail.  The ordered part
    of the box is mapped onto the ordered simplex and multiplied by k!.
    """
    if a <= 0 or c < 0:
        raise ValueError("need a > 0 and c >= 0")
    L = math.sqrt(math.log(1 / tail) / a)
    width = 2 * L

    def f(nd):
        s = -L + width * nd.s
        out = -a * np.sum(s * s, axis=0) + k * math.log(width)
        for v in nd.ldiff.values():
            out = out + 2 * c * (math.log(width) + v)
        return out

    if k == 1:
        levels = (5, 6, 7, 8)
    elif k == 2:
        levels = (5, 6, 7)
    else:
        levels = (3, 4)
    val = simplex_integral(f, k, rtol=rtol, levels=levels)
    return math.factorial(k) * np.real(val), L


def mehta_gaussian(k, a, c):
    """(numeric, closed, relative gap)."""
    num, _ = mehta_numeric(k, a, c)
    cl = mehta_closed(k, a, c)
    return num, cl, abs(num - cl) / abs(cl)
