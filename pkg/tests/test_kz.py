import numpy as np
import pytest

from kzlab import kz, sl2


def _system(m=(-1.3, -0.7, -2.1), kappa=3.0):
    return kz.KZSystem(sl2.VermaTensorSpace(m, 2), 1, kappa)


def test_analytic_derivative_matches_finite_difference():
    system = _system()
    z = (0.0, 1.0, 2.7)
    cyc = kz.interval_cycle(3)
    for i in range(3):
        assert kz.kz_residual(system, cyc, z, i) <= 1e-10
        assert kz.kz_residual_fd(system, cyc, z, i) <= 1e-6


def test_wrong_kappa_is_not_a_solution():
    good = _system()
    bad = _system(kappa=3.5)
    z = (0.0, 1.0, 2.7)
    # the integrals are built with kappa = 3; check against the kappa = 3.5 right-hand side
    I, D = kz.interval_integrals(z, good.m, 3.0, kz.interval_cycle(2), derivatives=True)
    rhs = kz.kz_rhs(bad, np.array(z), 0) @ I
    assert np.linalg.norm(D[0] - rhs) / np.linalg.norm(I) > 1e-3


def test_sing_trace_formula():
    system = _system()
    for i, j in ((0, 1), (0, 2), (1, 2)):
        assert abs(kz.sing_trace(system, i, j) - kz.sing_trace_predicted(system.m, i, j, 3)) <= 1e-12


def test_euler_determinant_requires_positive_alpha():
    with pytest.raises(ValueError):
        kz.euler_determinant((0.0, 1.0, 2.0), (0.4, -0.3, 1.0))


def test_two_point_monodromy_eigenvalue():
    # n = 2, k = 1: the solution is (z1-z2)^e times a constant with
    # e = m1 m2/(2 kappa) - (m1+m2)/kappa, so a full loop multiplies by exp(2 pi i e)
    m, kappa = (-1.3, -0.7), 5.3
    system = kz.KZSystem(sl2.VermaTensorSpace(m, 2), 1, kappa)
    z0 = np.array([0.0, 1.0], dtype=complex)
    loop = kz.circle_loop(z0, 0, 1, nseg=64)
    M = kz.monodromy(system, z0, 0, loop)
    e = m[0] * m[1] / (2 * kappa) - (m[0] + m[1]) / kappa
    assert abs(np.linalg.eigvals(M)[0] - np.exp(2j * np.pi * e)) <= 1e-8


def test_interval_derivatives_converge_for_other_kappa():
    system = _system(kappa=4.0)
    z = (0.0, 1.0, 2.7)
    for i in range(3):
        assert kz.kz_residual(system, kz.interval_cycle(3), z, i) <= 1e-10
