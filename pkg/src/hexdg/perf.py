"""Performance accounting: per-DOF-update cost, energy normalization, scaling.

The performance index is walltime * ranks / (RK stages * DOF): the time one
rank needs to advance one degree of freedom by one Runge-Kutta stage. Its
energy-normalized variant multiplies by the configured power per rank, giving
joules per DOF-update. Power is always a config input, never measured here.
"""

import csv
from dataclasses import dataclass, field


class PerfError(ValueError):
    pass


@dataclass
class PerfRecord:
    walltime: float
    n_ranks: int
    n_rk_stages: int
    n_dof: int
    power_per_rank: float = 0.0
    kernel_seconds: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.walltime < 0.0:
            raise PerfError(f"negative walltime {self.walltime}")
        for name, secs in self.kernel_seconds.items():
            if secs > self.walltime * self.n_ranks * 1.001:
                raise PerfError(
                    f"kernel {name!r} accumulated {secs:.3g} s, more than the "
                    f"total rank time {self.walltime * self.n_ranks:.3g} s")


def compute_pid(rec: PerfRecord) -> float:
    """Seconds of single-rank walltime per DOF per RK stage."""
    if rec.n_rk_stages <= 0 or rec.n_dof <= 0 or rec.n_ranks <= 0:
        raise PerfError(
            f"counts must be positive (stages={rec.n_rk_stages}, "
            f"dof={rec.n_dof}, ranks={rec.n_ranks})")
    return rec.walltime * rec.n_ranks / (rec.n_rk_stages * rec.n_dof)


def compute_epid(rec: PerfRecord) -> float:
    """Joules per DOF-update: power per rank times the performance index."""
    if rec.power_per_rank < 0.0:
        raise PerfError(f"negative power per rank {rec.power_per_rank}")
    return rec.power_per_rank * compute_pid(rec)


def from_run(result, power_per_rank: float = 0.0, label: str = "") -> PerfRecord:
    """PerfRecord from a parallel.RunResult (timestepping walltime only)."""
    merged = {}
    for per_rank in result.kernel_seconds:
        for k, v in per_rank.items():
            merged[k] = merged.get(k, 0.0) + v
    return PerfRecord(walltime=result.walltime, n_ranks=result.n_ranks,
                      n_rk_stages=result.rk_stages, n_dof=result.n_dof,
                      power_per_rank=power_per_rank, kernel_seconds=merged,
                      label=label)


def kernel_breakdown(rec: PerfRecord):
    """Rows of (kernel, seconds, percent of the summed kernel time)."""
    total = sum(rec.kernel_seconds.values())
    if total <= 0.0:
        return []
    rows = [(name, secs, 100.0 * secs / total)
            for name, secs in sorted(rec.kernel_seconds.items(),
                                     key=lambda kv: -kv[1])]
    return rows


def write_perf_report(records, path):
    """Fig.-5-style per-kernel breakdown CSV: (kernel, total_s, percent, rank)."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["kernel", "total_s", "percent", "rank"])
        for rank, rec in enumerate(records):
            for name, secs, pct in kernel_breakdown(rec):
                wr.writerow([name, f"{secs:.6e}", f"{pct:.2f}", rank])


def scaling_report(runs):
    """PID-versus-load, weak-efficiency and strong-speedup tables.

    runs: list of PerfRecord ordered as measured; the first record is the
    reference for efficiency/speedup. All runs must describe the same case
    size series (weak: same DOF per rank; strong: same total DOF).
    """
    if len(runs) < 2:
        raise PerfError("scaling report needs at least two runs")
    ref = runs[0]
    pid_ref = compute_pid(ref)
    rows = []
    for rec in runs:
        pid = compute_pid(rec)
        rows.append({
            "label": rec.label,
            "ranks": rec.n_ranks,
            "dof": rec.n_dof,
            "dof_per_rank": rec.n_dof / rec.n_ranks,
            "pid": pid,
            "epid": compute_epid(rec),
            "efficiency": pid_ref / pid,
            "speedup": (ref.walltime / rec.walltime) if rec.walltime > 0 else 0.0,
        })
    return rows


def write_scaling_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["label", "ranks", "dof", "dof_per_rank", "pid", "epid",
                     "efficiency", "speedup"])
        for r in rows:
            wr.writerow([r["label"], r["ranks"], r["dof"],
                         f"{r['dof_per_rank']:.6g}", f"{r['pid']:.6e}",
                         f"{r['epid']:.6e}", f"{r['efficiency']:.4f}",
                         f"{r['speedup']:.4f}"])
