"""On-disk formats: binary field snapshots, time-series CSV, scheduler traces.

Snapshot files ("HDGF") are little-endian: a fixed header (magic, format
version, N, element count, variable count, time) followed by the solution in
the canonical layout (variable fastest, node lexicographic with i fastest,
element major) and one blending factor per element.
"""

import csv

import numpy as np

_MAGIC = b"HDGF"
_FORMAT_VERSION = 1

SERIES_COLUMNS = ["t", "E_k", "eps_S", "eps_D", "dt", "mass", "mom_x",
                  "mom_y", "mom_z", "energy", "max_alpha"]


class SnapshotError(ValueError):
    pass


def write_snapshot(path, U: np.ndarray, time: float, alpha: np.ndarray = None):
    """Write a field snapshot; U has shape (nelem, n1, n1, n1, nvar)."""
    nelem, n1 = U.shape[0], U.shape[1]
    nvar = U.shape[-1]
    if alpha is None:
        alpha = np.zeros(nelem)
    if alpha.shape != (nelem,):
        raise SnapshotError(f"alpha must have one entry per element, got {alpha.shape}")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.array([_FORMAT_VERSION, n1 - 1, nelem, nvar], dtype="<u4").tobytes())
        fh.write(np.array([time], dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(U, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(alpha, dtype="<f8").tobytes())


def read_snapshot(path):
    """Read a snapshot; returns (U, time, alpha)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise SnapshotError(f"not a snapshot file (magic {magic!r})")
        version, N, nelem, nvar = np.frombuffer(fh.read(16), dtype="<u4")
        if version != _FORMAT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {version}")
        time = float(np.frombuffer(fh.read(8), dtype="<f8")[0])
        n1 = int(N) + 1
        count = int(nelem) * n1 ** 3 * int(nvar)
        U = np.frombuffer(fh.read(count * 8), dtype="<f8").reshape(
            int(nelem), n1, n1, n1, int(nvar)).astype(np.float64)
        alpha = np.frombuffer(fh.read(int(nelem) * 8), dtype="<f8").astype(np.float64)
    return U, time, alpha


def write_series_csv(path, series):
    """Time-series rows (dicts) to CSV with the canonical column order."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SERIES_COLUMNS)
        for row in series:
            wr.writerow([repr(float(row.get(c, 0.0))) for c in SERIES_COLUMNS])


def read_series_csv(path):
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = [{k: float(v) for k, v in zip(header, line)} for line in rd]
    return rows


def write_trace_csv(path, trace):
    """Scheduler trace rows for overlap diagnostics."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["task", "priority", "start", "end", "rank"])
        for row in trace:
            wr.writerow([row.task, row.priority, f"{row.start:.9f}",
                         f"{row.end:.9f}", row.rank])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        next(rd)
        return [{"task": task, "priority": int(prio), "start": float(start),
                 "end": float(end), "rank": int(rank)}
                for task, prio, start, end, rank in rd]
