import mpmath
import numpy as np
import pytest

from kzlab import qkz
from kzlab.numerics import PoleError


@pytest.mark.parametrize("kind,kw", [("rational", {}), ("trigonometric", {"p": 1.7}),
                                     ("elliptic", {"a": 0.3, "tau": 0.2 + 1.1j})])
def test_twist_inversion(kind, kw):
    assert qkz.TwistFunction(kind, **kw).inversion_residual() <= 1e-12


def test_twist_validation():
    with pytest.raises(ValueError):
        qkz.TwistFunction("hyperbolic")
    with pytest.raises(ValueError):
        qkz.TwistFunction("trigonometric")


def test_qkz_flatness_spin_half():
    conn = qkz.QKZConnection((0.5, 0.5, 0.5), 1.7, 0.4, irreducible=(True,) * 3)
    z = np.array([0.3, 1.1, 2.6], dtype=complex)
    assert max(qkz.flatness_residual(conn, z, 0, 1, k) for k in (1, 2)) <= 1e-10


def test_f_space_r_matrix_matches_spin_half_table():
    for x in (0.37, -1.9):
        assert np.max(np.abs(qkz.spin_half_from_f_space(x) - qkz.spin_half_r(x))) <= 1e-10


def test_qybe():
    assert qkz.qybe_residual((0.6, 1.1, 0.8), (0.3, 1.4, -0.9), 1) <= 1e-10


def test_trig_r_matrix_relations():
    assert qkz.trig_qybe_residual((0.3, 1.1 + 0.2j, -0.8), 0.7 + 0.2j) <= 1e-12
    assert qkz.trig_unitarity(0.45, 0.7 + 0.2j)[1] <= 1e-12


def test_barnes_against_mpmath_quadrature():
    a, b, c, d = 0.3, 0.5, 0.7, 0.9
    f = lambda y: mpmath.gamma(a + 1j * y) * mpmath.gamma(b + 1j * y) * mpmath.gamma(c - 1j * y) * mpmath.gamma(d - 1j * y)
    ref = 1j * complex(mpmath.quad(f, [-mpmath.inf, 0, mpmath.inf]))
    num, closed, gap = qkz.barnes_integral(a, b, c, d)
    assert abs(num - ref) <= 1e-10 * abs(ref)
    assert gap <= 1e-10
    with pytest.raises(PoleError):
        qkz.barnes_integral(-0.1, 0.5, 0.7, 0.9)


def test_q_hypergeometric_solution_and_determinant():
    z = np.array([0.2 + 0.3j, 0.1 - 0.4j])
    assert max(qkz.qkz_solution_residual(z, (-0.6, -0.7), -0.5, 1, j) for j in range(2)) <= 1e-6
    _, _, gap = qkz.q_determinant_two_point((0.2, 1.0), (-0.6, -0.7), -1.3)
    assert gap <= 1e-8


def test_classical_limit_decreases():
    conn = qkz.QKZConnection((0.6, 1.1, 0.8), 1.0)
    Z = np.array([0.3, 1.1, 2.6], dtype=complex)
    devs = [qkz.classical_limit(conn, Z, 0, 1, S, 0.0)[0] for S in (1e2, 1e3)]
    assert devs[1] < devs[0] / 5
