import numpy as np
import pytest

from hexdg.io import (SnapshotError, read_series_csv, read_snapshot,
                      read_trace_csv, write_series_csv, write_snapshot,
                      write_trace_csv)


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    U = rng.standard_normal((6, 4, 4, 4, 5))
    alpha = rng.random(6)
    path = tmp_path / "field.hdgf"
    write_snapshot(path, U, 1.25, alpha)
    U2, t2, a2 = read_snapshot(path)
    assert t2 == 1.25
    assert np.array_equal(U, U2)
    assert np.array_equal(alpha, a2)


def test_snapshot_default_alpha(tmp_path):
    U = np.zeros((2, 3, 3, 3, 5))
    path = tmp_path / "f.hdgf"
    write_snapshot(path, U, 0.0)
    _, _, a = read_snapshot(path)
    assert np.array_equal(a, np.zeros(2))


def test_snapshot_bad_magic(tmp_path):
    path = tmp_path / "junk.hdgf"
    path.write_bytes(b"WHAT" + b"\x00" * 100)
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(path)


def test_snapshot_alpha_shape_checked(tmp_path):
    with pytest.raises(SnapshotError):
        write_snapshot(tmp_path / "x.hdgf", np.zeros((2, 3, 3, 3, 5)), 0.0,
                       np.zeros(3))


def test_series_csv_round_trip_bitwise(tmp_path):
    rows = [{"t": 0.1234567890123456789, "E_k": 1 / 3, "eps_S": 2e-300,
             "eps_D": 0.0, "dt": 1e-3, "mass": 248.07584916380995,
             "mom_x": -7.871307772244762e-17, "mom_y": 0.0, "mom_z": 0.0,
             "energy": 44331.14337013478, "max_alpha": 0.5}]
    path = tmp_path / "series.csv"
    write_series_csv(path, rows)
    back = read_series_csv(path)
    for k, v in rows[0].items():
        assert back[0][k] == v, k


def test_trace_csv_round_trip(tmp_path):
    from hexdg.parallel import TraceRow
    rows = [TraceRow("vol_int", 0, 0.0, 0.5, 1)]
    path = tmp_path / "trace.csv"
    write_trace_csv(path, rows)
    text = path.read_text().splitlines()
    assert text[0] == "task,priority,start,end,rank"
    assert text[1].startswith("vol_int,0,")
    back = read_trace_csv(path)
    assert back == [{"task": "vol_int", "priority": 0, "start": 0.0,
                     "end": 0.5, "rank": 1}]
