import numpy as np
import pytest

from kzlab import sl2, trigdyn
from kzlab.numerics import PoleError


def test_trig_connection_is_flat():
    sp = sl2.VermaTensorSpace((1.3, 0.7, 2.2), 3)
    system = trigdyn.TrigKZSystem(sp, 2.3, 0.7)
    z = np.array([1.0, 2.1 + 0.3j, -0.7])
    assert max(trigdyn.trig_flatness_residual(system, z, 0, 1, k) for k in range(3)) <= 1e-7


def test_compatibility_fails_for_wrong_shift():
    sp = sl2.VermaTensorSpace((1.3, 0.7), 3)
    good = trigdyn.TrigKZSystem(sp, 2.3, 0.7)
    assert max(trigdyn.dynamical_compatibility_check(good, np.array([1.0, 2.1]), 0, 2)) <= 1e-10


def test_p_lambda_pole():
    sp = sl2.VermaTensorSpace((1.0,), 3)
    with pytest.raises(PoleError):
        trigdyn.p_lambda_operator(sp, 1, 0.5)


def test_p_lambda_identity_on_top_layer():
    sp = sl2.VermaTensorSpace((1.3, 0.7), 3)
    assert np.allclose(trigdyn.p_lambda_operator(sp, 0, 0.7), np.eye(1))


def test_selberg_solution_wrong_kappa_fails():
    t, d = trigdyn.selberg_solution_check(1.7, 2, 2.3, 0.7)
    assert max(t, d) <= 1e-8
    sol = trigdyn.selberg_solution(1.7, 1.7, 2, 2.3, 0.7 + 2.3)
    wrong = trigdyn.selberg_solution(1.7, 1.7, 2, 2.3, 0.7 + 2.0)
    assert abs(sol - wrong) > 1e-3 * abs(sol)
