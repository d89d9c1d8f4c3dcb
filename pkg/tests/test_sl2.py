import numpy as np
import pytest

from kzlab import sl2


def _ef_commutator(space, k):
    ef = sl2.total_e(space, k + 1) @ sl2.total_f(space, k)
    fe = sl2.total_f(space, k - 1) @ sl2.total_e(space, k) if k > 0 else 0
    return ef - fe


@pytest.mark.parametrize("k", [0, 1, 2])
def test_ef_commutator_is_h(k):
    space = sl2.VermaTensorSpace((1.3, -0.7, 2.0), depth=4)
    H = np.diag(sl2.total_h(space, k))
    assert np.allclose(_ef_commutator(space, k), H, atol=1e-12)


def test_h_is_relation_consistent():
    # h v = m v on the highest vector and h drops by 2 along f
    space = sl2.VermaTensorSpace((3.0,), depth=3)
    assert [sl2.total_h(space, k)[0] for k in range(3)] == [3.0, 1.0, -1.0]


def test_basis_order_and_depth_error():
    space = sl2.VermaTensorSpace((1.0, 1.0), depth=2)
    assert list(space.basis(2)) == [(2, 0), (1, 1), (0, 2)]
    with pytest.raises(sl2.DepthError):
        space.basis(3)


def test_singular_dimension_matches_clebsch_gordan():
    m = (1, 2, 2)
    space = sl2.VermaTensorSpace(m, depth=3, irreducible=(True, True, True))
    for k in range(3):
        assert len(sl2.singular_space(space, k)) == sl2.multiplicity(m, k)


def test_gaudin_hamiltonians_commute_and_sum_to_zero():
    space = sl2.VermaTensorSpace((1.3, -0.7, 2.1), depth=3)
    z = [0.0, 1.0, 2.5]
    H = [sl2.gaudin_hamiltonian(space, z, i, 2) for i in range(3)]
    assert np.linalg.norm(H[0] @ H[1] - H[1] @ H[0]) <= 1e-12 * np.linalg.norm(H[0]) ** 2
    assert np.linalg.norm(sum(H)) <= 1e-12
    with pytest.raises(sl2.CoincidentPointsError):
        sl2.gaudin_hamiltonian(space, [0.0, 0.0, 1.0], 0, 1)


def test_casimir_pair_symmetric_and_weight_vector_json():
    space = sl2.VermaTensorSpace((1.3, 0.7), depth=2)
    assert np.allclose(sl2.casimir_pair(space, 0, 1, 1), sl2.casimir_pair(space, 1, 0, 1))
    v = sl2.WeightVector(space, 1, [1.0, 2.0j])
    w = sl2.WeightVector.from_json(v.to_json(), depth=2)
    assert np.allclose(w.coords, v.coords)
