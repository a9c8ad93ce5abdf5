"""Command line interface: run, sweep, trace-minmax, compare-approx.

Exit codes: 0 ok, 1 configuration error, 2 runtime error. Output CSV paths
can be redirected wholesale by setting RIFOSIM_OUTPUT_DIR.
"""

from __future__ import annotations

import argparse
import multiprocessing
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .config import OUTPUT_DIR_ENV, ConfigError, ExperimentConfig
from .dpapprox import ApproxMode, fidelity_report
from .metrics import FLOW_CLASSES, read_csv, result_rows, write_csv
from .netsim import run_simulation
from .schedulers import DEFAULT_QUEUE_CAPACITY, RifoState, rifo_track_update
from .workload import generate_arrivals

APPROX_MODES = {
    "crossmul": ApproxMode("crossmul", False),
    "crossmul-scaled": ApproxMode("crossmul", True),
    "shift": ApproxMode("shift", False),
    "shift-scaled": ApproxMode("shift", True),
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; bad usage is a config problem here (1)
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rifosim",
                     description="Admission-scheduler simulation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured experiment")
    p_run.add_argument("config", help="YAML experiment config")

    p_sweep = sub.add_parser("sweep", help="scheduler x load x seed sweep")
    p_sweep.add_argument("config", help="YAML experiment config with a sweep section")

    p_trace = sub.add_parser("trace-minmax",
                             help="log min/max register values over a rank stream")
    p_trace.add_argument("--T", type=int, required=True, help="tracking range")
    p_trace.add_argument("--packets", type=int, required=True)
    p_trace.add_argument("--seed", type=int, required=True)
    p_trace.add_argument("--lo", type=int, default=0, help="lowest rank (default 0)")
    p_trace.add_argument("--hi", type=int, default=100, help="highest rank (default 100)")
    p_trace.add_argument("--output", default="-", help="CSV path, '-' for stdout")

    p_cmp = sub.add_parser("compare-approx",
                           help="fidelity of division-free admission arithmetic")
    p_cmp.add_argument("--mode", choices=sorted(APPROX_MODES), required=True)
    p_cmp.add_argument("--trials", type=int, required=True)
    p_cmp.add_argument("--seed", type=int, required=True)
    p_cmp.add_argument("--capacity", type=int, default=DEFAULT_QUEUE_CAPACITY)
    p_cmp.add_argument("--output", default="-", help="CSV path, '-' for stdout")
    return parser


@contextmanager
def _open_output(path_str: str):
    """'-' is stdout; files honor the output-directory override variable."""
    if path_str == "-":
        yield sys.stdout
        return
    path = Path(path_str)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        path = Path(env_dir) / path.name
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        yield fh


# ---------------------------------------------------------------------------
# run / sweep
# ---------------------------------------------------------------------------


def simulate_once(cfg: ExperimentConfig) -> list[dict]:
    """One (scheduler, load, seed) experiment -> CSV rows."""
    topology = cfg.build_topology()
    transport = cfg.build_transport(topology)
    dist = cfg.distribution()
    rng = np.random.default_rng(cfg.workload.seed)
    arrivals = generate_arrivals(
        cfg.workload.load, dist, topology.hosts, cfg.workload.horizon_ns,
        rng, topology.access_bps,
    )
    result = run_simulation(
        topology,
        cfg.scheduler.kind,
        cfg.policy.kind,
        arrivals,
        transport,
        cfg.until_ns,
        scheduler_params=cfg.scheduler.params(),
        rank_quantum=cfg.policy.rank_quantum,
    )
    return result_rows(
        result.flows,
        result.dropped_packets,
        result.unfinished_flows,
        scheduler=cfg.scheduler.kind,
        policy=cfg.policy.kind,
        workload=cfg.workload_label(),
        load=cfg.workload.load,
        seed=cfg.workload.seed,
    )


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_yaml(args.config)
    rows = simulate_once(cfg)
    out = cfg.output_path()
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, rows)
    print(f"wrote {out}")
    return 0


def _sweep_worker(payload) -> tuple[str, float, int, str | None]:
    """Run one sweep cell and write its part file; returns an error string
    instead of raising so the pool can name the failing combination."""
    raw, base_dir, scheduler, load, seed, part_path = payload
    try:
        raw = dict(raw)
        raw["scheduler"] = dict(raw.get("scheduler", {}), kind=scheduler)
        raw["workload"] = dict(raw.get("workload", {}), load=load, seed=seed)
        cfg = ExperimentConfig.from_dict(raw, base_dir=Path(base_dir))
        rows = simulate_once(cfg)
        tmp = part_path + ".tmp"
        write_csv(tmp, rows)
        os.replace(tmp, part_path)  # parts appear atomically: resume-safe
        return scheduler, load, seed, None
    except Exception as exc:  # noqa: BLE001 - reported by the parent
        return scheduler, load, seed, f"{type(exc).__name__}: {exc}"


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_yaml(args.config)
    out = cfg.output_path()
    parts_dir = out.with_name(out.name + ".parts")
    parts_dir.mkdir(parents=True, exist_ok=True)

    raw = cfg.effective_dict()
    jobs = []
    for scheduler in cfg.sweep.schedulers:
        for load in cfg.sweep.loads:
            for seed in cfg.sweep.seeds:
                part = parts_dir / f"{scheduler}_load{load}_seed{seed}.csv"
                if part.exists():
                    continue  # resume: completed cells are never recomputed
                jobs.append((raw, str(cfg.base_dir), scheduler, load, seed, str(part)))

    processes = cfg.sweep.processes or os.cpu_count() or 1
    processes = max(1, min(processes, len(jobs) or 1))
    if processes == 1 or len(jobs) <= 1:
        outcomes = [_sweep_worker(job) for job in jobs]
    else:
        with multiprocessing.Pool(processes) as pool:
            outcomes = pool.map(_sweep_worker, jobs)
    failures = [o for o in outcomes if o[3] is not None]
    if failures:
        scheduler, load, seed, error = failures[0]
        raise RuntimeError(
            f"sweep job failed (scheduler={scheduler}, load={load}, seed={seed}): {error}"
        )

    merged: list[dict] = []
    for scheduler in cfg.sweep.schedulers:
        for load in cfg.sweep.loads:
            for seed in cfg.sweep.seeds:
                part = parts_dir / f"{scheduler}_load{load}_seed{seed}.csv"
                merged.extend(read_csv(part))
    class_order = {name: i for i, name in enumerate(FLOW_CLASSES)}
    merged.sort(key=lambda r: (r["scheduler"], float(r["load"]), int(r["seed"]),
                               class_order[r["class"]]))
    write_csv(out, merged)
    print(f"wrote {out} ({len(merged)} rows)")
    return 0


# ---------------------------------------------------------------------------
# trace-minmax / compare-approx
# ---------------------------------------------------------------------------


def cmd_trace_minmax(args) -> int:
    if args.T < 1:
        raise ConfigError("--T must be >= 1")
    if args.packets < args.T:
        raise ConfigError("--packets must be >= --T")
    if not 0 <= args.lo <= args.hi:
        raise ConfigError("need 0 <= --lo <= --hi")
    rng = np.random.default_rng(args.seed)
    state = RifoState(tracking_range=args.T)
    ranks = rng.integers(args.lo, args.hi + 1, size=args.packets)
    with _open_output(args.output) as fh:
        fh.write("packet_index,sampled_min,sampled_max\n")
        for index, rank in enumerate(ranks, start=1):
            rifo_track_update(state, int(rank))
            fh.write(f"{index},{state.min_rank},{state.max_rank}\n")
    return 0


def cmd_compare_approx(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.capacity < 1:
        raise ConfigError("--capacity must be >= 1")
    rng = np.random.default_rng(args.seed)
    report = fidelity_report(APPROX_MODES[args.mode], args.trials, rng, args.capacity)
    with _open_output(args.output) as fh:
        fh.write("mode,trials,agreement,false_admit,false_drop\n")
        fh.write(
            f"{args.mode},{report.trials},{float(report.agreement):.9f},"
            f"{report.false_admit},{report.false_drop}\n"
        )
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": cmd_run,
            "sweep": cmd_sweep,
            "trace-minmax": cmd_trace_minmax,
            "compare-approx": cmd_compare_approx,
        }[args.command]
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
