"""Bilinear lookup and the EM efficiency map."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evtransmission.config import EMParams
from evtransmission.interp import bilinear
from evtransmission.motor import EfficiencyMap, load_map_csv, save_map_csv, synthetic_map


def test_exact_at_nodes(rng):
    vals = rng.random((7, 9))
    x = 0.3 + 0.1 * np.arange(7)
    y = -2.0 + 0.5 * np.arange(9)
    X, Y = np.meshgrid(x, y, indexing="ij")
    out, n = bilinear(0.3, 0.1, -2.0, 0.5, vals, X, Y)
    assert n == 0
    assert np.array_equal(out, vals)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 5), st.floats(-5, 5))
def test_reproduces_bilinear_functions(a, b, c, d):
    x = np.linspace(0, 2, 5)
    y = np.linspace(-1, 1, 4)
    X, Y = np.meshgrid(x, y, indexing="ij")
    f = lambda u, v: a + b * u + c * v + d * u * v  # noqa: E731
    q = np.array([0.13, 1.71, 0.5]), np.array([-0.9, 0.2, 0.77])
    out, _ = bilinear(0.0, 0.5, -1.0, 2 / 3, f(X, Y), *q)
    assert np.allclose(out, f(*q), atol=1e-12)


def test_clamps_outside():
    vals = np.arange(4.0).reshape(2, 2)
    out, n = bilinear(0.0, 1.0, 0.0, 1.0, vals, [-1.0, 5.0, 0.5], [0.0, 1.0, 0.5])
    assert n == 2
    assert np.array_equal(out, [0.0, 3.0, 1.5])


def test_synthetic_map_invariants():
    em = EMParams()
    m = synthetic_map(em)
    assert np.all((m.eta > 0) & (m.eta <= 1))
    assert m.peak_torque == em.max_torque
    assert np.isclose(m.max_power, em.rated_power, rtol=1e-3)
    assert 0.93 < m.eta.max() < 0.97
    # same efficiency motoring and generating
    assert m.efficiency(-100.0, 400.0) == m.efficiency(100.0, 400.0)
    assert m.torque_limit(em.max_speed * 1.01) == 0.0


def test_map_csv_round_trip(tmp_path):
    m = synthetic_map(EMParams(), 11, 13)
    save_map_csv(m, tmp_path / "em.csv")
    back = load_map_csv(tmp_path / "em.csv")
    assert np.array_equal(back.eta, m.eta)
    assert np.array_equal(back.max_torque, m.max_torque)


def test_map_rejects_bad_values():
    with pytest.raises(ValueError):
        EfficiencyMap(np.linspace(0, 1, 3), np.linspace(0, 1, 3), np.full((3, 3), 1.2), np.ones(3))
