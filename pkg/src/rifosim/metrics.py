"""FCT aggregation: size classes, mean/p99 statistics, large-flow throughput,
and the fixed CSV schema shared by the run and sweep commands.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import ceil

from .core import FlowRecord

SMALL_FLOW_BYTES = 100_000  # small: size < 100 KB
LARGE_FLOW_BYTES = 1_000_000  # large: size >= 1 MB

FLOW_CLASSES = ("small", "medium", "large")

CSV_COLUMNS = (
    "scheduler",
    "policy",
    "workload",
    "load",
    "seed",
    "class",
    "count",
    "mean_fct_ns",
    "p99_fct_ns",
    "throughput_bps",
    "dropped_packets",
    "unfinished_flows",
)


def classify(size_bytes: int) -> str:
    if size_bytes < SMALL_FLOW_BYTES:
        return "small"
    if size_bytes >= LARGE_FLOW_BYTES:
        return "large"
    return "medium"


@dataclass(frozen=True, slots=True)
class FctStats:
    """Statistics over one class; mean/p99 are None when the class is empty."""

    count: int
    mean_ns: float | None
    p99_ns: int | None


def percentile_nearest_rank(sorted_values, fraction: float):
    """Nearest-rank percentile: element at index ceil(q * n) - 1 (1-based rank)."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("empty sample")
    rank = max(1, ceil(fraction * n))
    return sorted_values[rank - 1]


def fct_stats(flows, flow_class: str) -> FctStats:
    """Mean and nearest-rank p99 FCT over the completed flows of one class."""
    if flow_class not in FLOW_CLASSES:
        raise ValueError(f"unknown flow class {flow_class!r}")
    fcts = sorted(
        f.fct_ns for f in flows if f.completed and classify(f.size_bytes) == flow_class
    )
    if not fcts:
        return FctStats(0, None, None)
    return FctStats(
        count=len(fcts),
        mean_ns=sum(fcts) / len(fcts),
        p99_ns=percentile_nearest_rank(fcts, 0.99),
    )


def large_flow_throughput(flows) -> float | None:
    """8 * total received bytes / total FCT seconds over completed large flows."""
    sizes = 0
    fct_ns = 0
    for f in flows:
        if f.completed and classify(f.size_bytes) == "large":
            sizes += f.size_bytes
            fct_ns += f.fct_ns
    if fct_ns == 0:
        return None
    return 8 * sizes * 1_000_000_000 / fct_ns


def result_rows(
    flows: list[FlowRecord],
    dropped_packets: int,
    unfinished_flows: int,
    *,
    scheduler: str,
    policy: str,
    workload: str,
    load,
    seed,
) -> list[dict]:
    """One CSV row per flow class, each carrying the full experiment key."""
    rows = []
    for flow_class in FLOW_CLASSES:
        stats = fct_stats(flows, flow_class)
        throughput = large_flow_throughput(flows) if flow_class == "large" else None
        rows.append(
            {
                "scheduler": scheduler,
                "policy": policy,
                "workload": workload,
                "load": load,
                "seed": seed,
                "class": flow_class,
                "count": stats.count,
                "mean_fct_ns": stats.mean_ns,
                "p99_fct_ns": stats.p99_ns,
                "throughput_bps": throughput,
                "dropped_packets": dropped_packets,
                "unfinished_flows": unfinished_flows,
            }
        )
    return rows


def write_csv(path, rows) -> None:
    """Write rows in the fixed column order; None becomes an empty cell."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in CSV_COLUMNS})


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
