import numpy as np
import pytest

from kzlab import uq


def test_qnum_classical_limit_and_symmetry():
    assert abs(uq.qnum(3.0, 1e6) - 3.0) <= 1e-9
    assert abs(uq.qnum(-1.7, 4.1) + uq.qnum(1.7, 4.1)) <= 1e-14


def test_uq_relations():
    sp = uq.QVermaTensorSpace.make((1.3, 0.7, 2.2), 3.7, depth=3)
    for k in range(3):
        assert max(uq.relation_residuals(sp, k)) <= 1e-12


def test_hexagon_and_far_commutation():
    sp = uq.QVermaTensorSpace.make((1.3, 0.7, 2.2, 0.4), 3.7, depth=2)
    assert uq.hexagon_residual(sp, 2) <= 1e-12
    assert max(uq.braid_relation_residuals(sp, 2).values()) <= 1e-12


def test_pr_derived_table_and_sing_sign():
    comp = uq.pr_two_factor_values(1.3, 0.7, 3.7)
    assert uq.compare_value_tables(comp, uq.pr_derived_values(1.3, 0.7, 3.7)) <= 1e-12
    sp = uq.QVermaTensorSpace.make((1.3, 0.7, 2.2), 3.7, depth=2)
    res = uq.sing_sign_from_invariance(sp)
    assert res[1] <= 1e-10 < res[-1]


def test_kohno_drinfeld_two_points():
    recs = uq.kohno_drinfeld_compare((-1.3, -0.7), 5.3)
    assert recs[0]["gap"] <= 1e-6
