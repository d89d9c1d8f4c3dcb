import numpy as np
import pytest

from kzlab import master


def test_bethe_roots_solve_bethe_equations():
    inst = master.MasterInstance(2, (0.0, 1.0, 2.5), (-1.3, -0.7, -2.1))
    orbits, report = master.find_critical_orbits(inst)
    assert report["failed"] == 0
    for o in orbits:
        assert np.max(np.abs(master.grad_log_phi(inst, o.t))) <= 1e-10


def test_weight_function_is_symmetric_in_t():
    from kzlab import sl2
    space = sl2.VermaTensorSpace((-1.3, -0.7, -2.1), depth=3)
    t = np.array([0.4 + 0.2j, 1.7 - 0.1j])
    a = master.weight_function(space, 2, t, (0.0, 1.0, 2.5))
    b = master.weight_function(space, 2, t[::-1], (0.0, 1.0, 2.5))
    assert np.allclose(a, b)


def test_collision_rejected():
    with pytest.raises(master.CollisionError):
        master.MasterInstance(1, (0.0, 0.0), (1.0, 1.0))


def test_selberg_critical_recurrence_matches_closed_product():
    lam = master.selberg_critical_symmetric(3, 0.7, 1.2, 0.4)
    assert np.allclose(lam, master.selberg_lambda_closed(3, 0.7, 1.2, 0.4), rtol=1e-13)


def test_heine_stieltjes_rejects_non_critical_point():
    with pytest.raises(ValueError):
        master.heine_stieltjes([0.3, 1.7], (0.0, 1.0, 2.5), (-1.3, -0.7, -2.1))


def test_two_point_bethe_vector_is_multiple_of_generator():
    inst = master.MasterInstance(2, (0.0, 1.0), (-1.3, -0.7))
    o = master.find_critical_orbits(inst)[0][0]
    space = inst.space()
    w = master.bethe_vector(inst, o, space).coords
    g = master.two_point_generator(space, 2)
    g = getattr(g, "coords", g)
    c = np.vdot(g, w) / np.vdot(g, g)
    assert np.linalg.norm(w - c * g) <= 1e-12 * np.linalg.norm(w)
