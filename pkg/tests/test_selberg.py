import math

import numpy as np
import pytest
from scipy import special

from kzlab import selberg
from kzlab.numerics import PoleError


def test_k1_is_beta_function():
    p = selberg.SelbergParams(1, 0.7, 1.9, 0.3)
    assert abs(selberg.selberg_numeric(p) - special.beta(0.7, 1.9)) <= 1e-13
    assert abs(selberg.selberg_closed(p) - special.beta(0.7, 1.9)) <= 1e-13


def test_ordered_versus_cube():
    p = selberg.SelbergParams(2, 1.1, 0.8, 0.6)
    assert selberg.selberg_closed(p, ordered=False) == pytest.approx(2 * selberg.selberg_closed(p))


def test_c_zero_factorizes():
    p = selberg.SelbergParams(2, 1.3, 0.9, 0.0)
    assert selberg.selberg_numeric(p) == pytest.approx(special.beta(1.3, 0.9) ** 2 / 2, rel=1e-9)


def test_divergent_parameters_rejected():
    with pytest.raises(ValueError):
        selberg.selberg_numeric(selberg.SelbergParams(2, -0.5, 1.0, 0.3))
    with pytest.raises(PoleError):
        selberg.selberg_closed(selberg.SelbergParams(1, -1.0, 1.0, 0.3))


def test_mehta_k1_is_gaussian():
    assert selberg.mehta_closed(1, 0.7, 0.5) == pytest.approx(math.sqrt(math.pi / 0.7), rel=1e-14)
    _, _, gap = selberg.mehta_gaussian(2, 0.7, 1.0)
    assert gap <= 1e-6


def test_log_closed_consistent():
    p = selberg.SelbergParams(3, 0.9, 1.4, 0.35)
    assert np.exp(selberg.selberg_log_closed(p)).real == pytest.approx(selberg.selberg_closed(p), rel=1e-12)
