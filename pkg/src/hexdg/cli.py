"""Command-line entry point: run, convergence, scaling, perf-report.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (the
solution left the admissible set), 4 I/O error. The worker thread cap can be
limited with the HEXDG_THREADS environment variable.
"""

import csv
import sys
from pathlib import Path

import click

from . import io as hio
from . import perf as hperf
from .config import ConfigError, RunConfig, format_config, parse_config
from .parallel import NumericalFailure, run_distributed
from .testcases import run_convergence_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _load_config(config_path, ranks, output):
    if config_path is None:
        raise ConfigError("a config file is required (--config PATH)")
    cfg = parse_config(config_path)
    if ranks is not None:
        cfg.nranks = ranks
    if output is not None:
        cfg.outputdir = output
    cfg.validate()
    return cfg


def common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="parameter file (key = value, '!' comments)")(fn)
    fn = click.option("--ranks", type=int, default=None,
                      help="override the number of worker ranks")(fn)
    fn = click.option("--output", type=click.Path(), default=None,
                      help="override the output directory")(fn)
    fn = click.option("--print-defaults", is_flag=True,
                      help="print every config key with its default and exit")(fn)
    return fn


def _maybe_print_defaults(flag):
    if flag:
        click.echo(format_config(RunConfig()), nl=False)
        sys.exit(EXIT_OK)


@click.group()
def main():
    """Desk-scale high-order DG solver for the compressible Navier-Stokes equations."""


@main.command("run")
@common_options
def cmd_run(config_path, ranks, output, print_defaults):
    """Run one simulation: time-series CSV plus field snapshots."""
    _maybe_print_defaults(print_defaults)
    try:
        cfg = _load_config(config_path, ranks, output)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(cfg.outputdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)

    series_rows = []

    def on_analyze(t, row, U_rows, alpha_rows):
        series_rows.append(row)
        n1 = cfg.n + 1
        U = U_rows.reshape(-1, n1, n1, n1, 5)
        hio.write_series_csv(out / "timeseries.csv", series_rows)
        hio.write_snapshot(out / "snapshot_latest.hdgf", U, t, alpha_rows[:, 0])

    try:
        res = run_distributed(cfg, on_analyze=on_analyze)
    except NumericalFailure as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        click.echo(f"last valid snapshot: {out / 'snapshot_latest.hdgf'}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)

    try:
        hio.write_snapshot(out / "snapshot_final.hdgf", res.U, res.t, res.alpha)
        hio.write_series_csv(out / "timeseries.csv", res.series)
        hio.write_trace_csv(out / "trace.csv", res.trace)
        with open(out / "kernel_times.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["kernel", "seconds", "rank"])
            for rank, per_rank in enumerate(res.kernel_seconds):
                for name, secs in sorted(per_rank.items()):
                    wr.writerow([name, f"{secs:.9f}", rank])
        rec = hperf.from_run(res, cfg.powerperrank)
        with open(out / "perf_summary.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["walltime", "ranks", "rk_stages", "dof", "pid", "epid"])
            wr.writerow([f"{rec.walltime:.6f}", rec.n_ranks, rec.n_rk_stages,
                         rec.n_dof, f"{hperf.compute_pid(rec):.6e}",
                         f"{hperf.compute_epid(rec):.6e}"])
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"completed {res.steps} steps to t = {res.t:.6g} "
               f"on {res.n_ranks} rank(s); output in {out}")
    sys.exit(EXIT_OK)


@main.command("convergence")
@common_options
def cmd_convergence(config_path, ranks, output, print_defaults):
    """Mesh-refinement study of the manufactured solution; writes the EOC table."""
    _maybe_print_defaults(print_defaults)
    try:
        cfg = _load_config(config_path, ranks, output)
        degrees = [int(v) for v in cfg.convdegrees.split()]
        meshes = [int(v) for v in cfg.convmeshes.split()]
    except (ConfigError, ValueError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(cfg.outputdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        rows = run_convergence_study(degrees, meshes, cfg.nodetype, cfg.operator,
                                     nranks=cfg.nranks, amplitude=cfg.mmsamplitude,
                                     speed=cfg.mmsspeed, mu=cfg.muref)
        path = out / f"eoc_{cfg.nodetype}_{cfg.operator}.csv"
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["N", "cells", "l2_error", "eoc", "monotone", "failed"])
            for r in rows:
                wr.writerow([r["N"], r["cells"], repr(r["error"]),
                             f"{r['eoc']:.4f}", int(r["monotone"]),
                             int(r["failed"])])
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)
    for r in rows:
        flag = "  [failed]" if r["failed"] else ("" if r["monotone"] else "  [non-monotone]")
        click.echo(f"N={r['N']} cells={r['cells']:3d}: "
                   f"L2 = {r['error']:.6e}  EOC = {r['eoc']:6.3f}{flag}")
    click.echo(f"table written to {path}")
    sys.exit(EXIT_OK)


@main.command("scaling")
@common_options
def cmd_scaling(config_path, ranks, output, print_defaults):
    """Sweep worker counts on the configured case; writes scaling CSVs."""
    _maybe_print_defaults(print_defaults)
    try:
        cfg = _load_config(config_path, ranks, output)
        rank_list = [int(v) for v in cfg.scalingranks.split()]
    except (ConfigError, ValueError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(cfg.outputdir)
    records = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for nr in rank_list:
            import copy
            c = copy.copy(cfg)
            c.nranks = nr
            c.validate()
            res = run_distributed(c)
            records.append(hperf.from_run(res, cfg.powerperrank, label=f"ranks{nr}"))
            click.echo(f"ranks = {nr}: walltime {res.walltime:.3f} s, "
                       f"PID {hperf.compute_pid(records[-1]):.3e} s")
        rows = hperf.scaling_report(records)
        hperf.write_scaling_csv(rows, out / "scaling.csv")
        hperf.write_perf_report(records, out / "scaling_kernels.csv")
    except NumericalFailure as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"scaling tables written to {out}")
    sys.exit(EXIT_OK)


@main.command("perf-report")
@common_options
@click.argument("timer_csvs", nargs=-1, type=click.Path())
def cmd_perf_report(config_path, ranks, output, print_defaults, timer_csvs):
    """Aggregate kernel timer CSVs into a per-kernel breakdown."""
    _maybe_print_defaults(print_defaults)
    try:
        if not timer_csvs:
            cfg = _load_config(config_path, ranks, output)
            timer_csvs = [Path(cfg.outputdir) / "kernel_times.csv"]
            out = Path(cfg.outputdir)
        else:
            out = Path(output) if output else Path(".")
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    per_rank = {}
    try:
        for path in timer_csvs:
            with open(path, newline="") as fh:
                rd = csv.reader(fh)
                next(rd)
                for kernel, secs, rank in rd:
                    d = per_rank.setdefault(int(rank), {})
                    d[kernel] = d.get(kernel, 0.0) + float(secs)
        out.mkdir(parents=True, exist_ok=True)
        records = []
        for rank in sorted(per_rank):
            total = sum(per_rank[rank].values())
            records.append(hperf.PerfRecord(
                walltime=total, n_ranks=1, n_rk_stages=1, n_dof=1,
                kernel_seconds=per_rank[rank]))
        hperf.write_perf_report(records, out / "perf_report.csv")
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)
    for rank, rec in enumerate(records):
        for name, secs, pct in hperf.kernel_breakdown(rec)[:6]:
            click.echo(f"rank {rank}: {name:<18s} {secs:9.4f} s  {pct:5.1f} %")
    click.echo(f"report written to {out / 'perf_report.csv'}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
