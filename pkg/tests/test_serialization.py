import json
import struct

import numpy as np
import pytest

from chpeakon import serialization as io
from chpeakon.model import preset
from chpeakon.pde_solver import MONITOR_COLUMNS, MonitorSeries, gaussian_field
from chpeakon.peakon_dynamics import integrate
from chpeakon.state import GridField, PeakonState


def test_fmt_round_trips_floats(rng):
    for v in rng.standard_normal(50) * 10.0 ** rng.integers(-300, 300, 50):
        assert float(io.fmt(v)) == v


def test_csv_round_trip(tmp_path, rng):
    rows = rng.standard_normal((7, 3))
    io.write_csv(tmp_path / "a.csv", ["x", "y", "z"], rows)
    header, data = io.read_csv(tmp_path / "a.csv")
    assert header == ["x", "y", "z"]
    np.testing.assert_array_equal(data, rows)


def test_empty_csv(tmp_path):
    io.write_csv(tmp_path / "e.csv", ["a", "b"], [])
    header, data = io.read_csv(tmp_path / "e.csv")
    assert header == ["a", "b"] and data.shape == (0, 2)


def test_trajectory_and_events(tmp_path):
    traj = integrate(preset("camassa-holm"), PeakonState([2.0, 1.0], [-3.0, 0.0]), 1.0, output_times=[0.5, 1.0])
    io.write_trajectory(tmp_path / "t.csv", traj, with_h1=True)
    header, data = io.read_csv(tmp_path / "t.csv")
    assert header == ["t", "p_1", "p_2", "q_1", "q_2", "h1_norm"]
    np.testing.assert_allclose(data[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_allclose(data[:, -1], data[0, -1], rtol=1e-8)
    io.write_events(tmp_path / "ev.json", traj)
    ev = json.loads((tmp_path / "ev.json").read_text())
    assert ev["status"] == "reached_t_end"
    assert all({"kind", "t", "indices"} <= set(e) for e in ev["events"])


def test_field_binary_round_trip(tmp_path):
    f = gaussian_field(7.5, 64, 1.0, 2.0)
    f = GridField(f.L, f.n, f.values, 0.25)
    io.write_field_binary(tmp_path / "f.bin", f)
    g = io.read_field_binary(tmp_path / "f.bin")
    assert (g.L, g.n, g.t) == (f.L, f.n, f.t)
    np.testing.assert_array_equal(g.values, f.values)
    raw = (tmp_path / "f.bin").read_bytes()
    assert raw[:4] == b"PKLB" and len(raw) == struct.calcsize("<4sIIdd") + 8 * 64


def test_field_binary_rejects_bad_input(tmp_path):
    f = gaussian_field(5.0, 16, 1.0, 1.0)
    io.write_field_binary(tmp_path / "f.bin", f)
    raw = (tmp_path / "f.bin").read_bytes()
    (tmp_path / "magic.bin").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        io.read_field_binary(tmp_path / "magic.bin")
    (tmp_path / "short.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="expected"):
        io.read_field_binary(tmp_path / "short.bin")
    (tmp_path / "version.bin").write_bytes(raw[:4] + struct.pack("<I", 9) + raw[8:])
    with pytest.raises(ValueError, match="version"):
        io.read_field_binary(tmp_path / "version.bin")
    (tmp_path / "tiny.bin").write_bytes(b"PK")
    with pytest.raises(ValueError):
        io.read_field_binary(tmp_path / "tiny.bin")


def test_field_csv(tmp_path):
    f = gaussian_field(5.0, 16, 1.0, 1.0)
    io.write_field_csv(tmp_path / "f.csv", f)
    header, data = io.read_csv(tmp_path / "f.csv")
    assert header == ["x", "u"]
    np.testing.assert_array_equal(data[:, 0], f.x)
    np.testing.assert_array_equal(data[:, 1], f.values)


def test_monitors(tmp_path):
    m = MonitorSeries()
    m.append((0.0, 1, 2, 3, 4, 5, 6))
    m.append((0.1, 1, 2, 3, 4, 5, 6))
    with pytest.raises(ValueError):
        m.append((0.1, 1, 2, 3, 4, 5, 6))
    io.write_monitors(tmp_path / "m.csv", m)
    header, data = io.read_csv(tmp_path / "m.csv")
    assert tuple(header) == MONITOR_COLUMNS
    assert data.shape == (2, 7)


def test_gnuplot_script(tmp_path):
    io.write_gnuplot(tmp_path / "plots" / "x.gp", "../d.csv", "demo", 1, {"a": 2, "b": 3})
    text = (tmp_path / "plots" / "x.gp").read_text()
    assert "using 1:2" in text and "using 1:3" in text and "separator ','" in text


def test_json_is_sorted(tmp_path):
    io.write_json(tmp_path / "j.json", {"b": 1, "a": 2})
    assert (tmp_path / "j.json").read_text().index('"a"') < (tmp_path / "j.json").read_text().index('"b"')
