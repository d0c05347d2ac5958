"""Drive-cycle ingestion and the built-in missions."""
from __future__ import annotations

import numpy as np
import pytest

from evtransmission.cycles import (
    CycleError, DriveCycle, cadc_like, load_cycle_csv, nedc, save_cycle_csv, synthetic_cycle,
)


def test_nedc_shape():
    c = nedc()
    assert len(c) == 1181
    assert np.isclose(c.v_max * 3.6, 120.0)
    assert np.isclose(c.distance / 1000, 11.0, rtol=0.03)


def test_cadc_like_phases():
    c = cadc_like()
    assert np.isclose(c.v_max * 3.6, 131.4)
    assert 3000 < len(c) < 3300
    assert np.all(c.v >= 0)


def test_forward_difference_acceleration():
    c = DriveCycle.from_speed([0.0, 1.0, 3.0, 3.0], dt=0.5)
    assert np.array_equal(c.a, [2.0, 4.0, 0.0, 0.0])
    assert np.array_equal(c.t, [0.0, 0.5, 1.0, 1.5])


def test_csv_round_trip(tmp_path):
    c = synthetic_cycle(50, seed=4)
    path = tmp_path / "c.csv"
    save_cycle_csv(c, path)
    back = load_cycle_csv(path)
    assert np.array_equal(back.v, c.v) and np.array_equal(back.a, c.a) and back.dt == c.dt


def test_csv_without_acceleration(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("t,v\n0,0\n1,2\n2,3\n")
    c = load_cycle_csv(path)
    assert np.array_equal(c.a, [2.0, 1.0, 0.0])
    assert np.array_equal(c.beta, [0.0, 0.0, 0.0])


@pytest.mark.parametrize("text, line", [
    ("t,v\n0,0\n1,-2\n", 3),
    ("t,v\n0,0\n1,abc\n", 3),
    ("t,v\n0,0\n1,1\n3,1\n", 4),
    ("time,speed\n0,0\n", 1),
    ("t,v\n0,0,0\n", 2),
])
def test_malformed_csv_reports_line(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(CycleError) as exc:
        load_cycle_csv(path)
    assert exc.value.line == line


def test_missing_file(tmp_path):
    with pytest.raises(CycleError):
        load_cycle_csv(tmp_path / "nope.csv")


def test_synthetic_deterministic():
    a, b = synthetic_cycle(300, seed=7), synthetic_cycle(300, seed=7)
    assert np.array_equal(a.v, b.v)
    assert not np.array_equal(a.v, synthetic_cycle(300, seed=8).v)
    assert a.v_max <= 30.0 and np.all(a.v >= 0)
