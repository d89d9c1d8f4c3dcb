import math

import mpmath
import numpy as np
import pytest
from scipy import special

from kzlab import numerics as nm


def test_gamma_against_mpmath():
    for z in (0.3, 2.5, -1.7, 1.2 + 0.8j, -3.4 - 2.1j):
        assert abs(nm.gamma(z) - complex(mpmath.gamma(z))) <= 1e-13 * abs(complex(mpmath.gamma(z)))


def test_gamma_poles():
    with pytest.raises(nm.PoleError):
        nm.gamma(-2)
    assert nm.rgamma(-3) == 0
    assert nm.pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)


@pytest.mark.parametrize("z", [-0.8, 0.2, 0.6])
def test_2f1_series_and_euler_against_mpmath(z):
    ref = float(mpmath.hyp2f1(0.3, 0.7, 1.9, z))
    assert abs(nm.gauss_2f1(0.3, 0.7, 1.9, z, method="series") - ref) <= 1e-13
    assert abs(nm.gauss_2f1(0.3, 0.7, 1.9, z, method="euler") - ref) <= 1e-12


def test_2f1_gauss_value_and_errors():
    ref = float(mpmath.hyp2f1(0.3, 0.7, 1.9, 1))
    assert abs(nm.gauss_2f1(0.3, 0.7, 1.9, 1.0) - ref) <= 1e-13
    with pytest.raises(nm.PoleError):
        nm.gauss_2f1(0.3, 0.7, -2, 0.1)
    with pytest.raises(nm.ConvergenceError):
        nm.gauss_2f1(0.3, 0.7, 1.9, 1.5, method="series")


def test_quad_singular_beta():
    val = nm.quad_singular(lambda s: np.ones_like(s), 0.0, 1.0, (-0.6, 0.4))
    assert abs(val - special.beta(0.4, 1.4)) <= 1e-13
    with pytest.raises(ValueError):
        nm.quad_singular(lambda s: s, 0.0, 1.0, (-1.2, 0.0))


def test_quad_regularized_is_beta_continuation():
    # int_0^1 u^A (1-u)^B du continued to A in (-2, -1) is B(A+1, B+1)
    for A, B in ((-1.4, 0.3), (-1.7, -1.2)):
        val = nm.quad_regularized(lambda s: np.ones_like(s), 0.0, 1.0, (A, B))
        ref = math.gamma(A + 1) * math.gamma(B + 1) / math.gamma(A + B + 2)
        assert abs(val - ref) <= 1e-11 * abs(ref)
    with pytest.raises(nm.PoleError):
        nm.quad_regularized(lambda s: s, 0.0, 1.0, (-1.0, 0.2))


def test_trapezoid_line_gaussian():
    val = nm.trapezoid_line(lambda t: np.exp(-t * t), 0.0, 1.0, 8.0, 0.5)
    assert abs(val - math.sqrt(math.pi)) <= 1e-13
    # vertical line: int exp(t^2) dt over iR = i sqrt(pi)
    val = nm.trapezoid_line(lambda t: np.exp(t * t), 0.0, 1j, 8.0, 0.5)
    assert abs(val - 1j * math.sqrt(math.pi)) <= 1e-13


def test_newton_solve_and_singular_jacobian():
    res = nm.newton_solve(lambda x: np.array([x[0] ** 2 - 2, x[1] - x[0]]), [1.0, 0.0])
    assert res.converged and abs(res.x[0] - math.sqrt(2)) <= 1e-12
    with pytest.raises(nm.SingularJacobianError):
        nm.newton_solve(lambda x: np.array([0 * x[0] + 1.0]), [1.0], jac=lambda x: np.array([[0.0]]))


def test_ode_transport_exponential_and_pole_guard():
    path = nm.ContourPath((0.0, 1.0, 1.0 + 1.0j))
    y = nm.ode_transport(lambda z: np.array([[2.0]]), path, np.array([1.0]))
    assert abs(y[0] - np.exp(2 * (1 + 1j))) <= 1e-11 * abs(np.exp(2 + 2j))
    with pytest.raises(nm.PoleProximityError):
        nm.ode_transport(lambda z: np.array([[1.0]]), path, np.array([1.0]), singular_points=[0.5])


@pytest.mark.parametrize("n", [16, 256, 1024])
def test_gauss_jacobi_moments_with_strong_endpoint_singularity(n):
    a, b = -0.825, 0.525
    u, _, w = nm.gauss_jacobi_unit(n, a, b)
    for p in (0, 1, 7):
        ref = special.beta(a + 1 + p, b + 1)
        assert abs(np.sum(w * u ** p) / ref - 1) <= 1e-13
    assert np.all(np.diff(u) > 0) and np.all(w > 0)


def test_gauss_jacobi_exponent_sum_minus_one():
    u, _, w = nm.gauss_jacobi_unit(32, -0.3, -0.7)
    assert abs(np.sum(w * u ** 3) - special.beta(3.7, 0.3)) <= 1e-13 * special.beta(3.7, 0.3)
