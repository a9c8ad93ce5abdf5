"""Plot small-flow FCT vs load per scheduler from a merged sweep CSV."""

import argparse
import statistics
import sys
from collections import defaultdict

from rifosim.metrics import read_csv


def collect(rows, flow_class, column):
    """-> {scheduler: ([loads], [median over seeds of column])}"""
    cells = defaultdict(list)
    for row in rows:
        if row["class"] != flow_class or not row[column]:
            continue
        cells[(row["scheduler"], float(row["load"]))].append(float(row[column]))
    series = defaultdict(lambda: ([], []))
    for (scheduler, load), values in sorted(cells.items()):
        xs, ys = series[scheduler]
        xs.append(load)
        ys.append(statistics.median(values))
    return series


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="merged sweep CSV")
    parser.add_argument("--class", dest="flow_class", default="small",
                        choices=["small", "medium", "large"])
    parser.add_argument("--metric", default="mean_fct_ns",
                        choices=["mean_fct_ns", "p99_fct_ns"])
    parser.add_argument("--output", default=None,
                        help="PNG path (default: <csv>.<class>.<metric>.png)")
    args = parser.parse_args()

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = collect(read_csv(args.csv), args.flow_class, args.metric)
    if not series:
        print("no rows matched; is the CSV a merged sweep output?", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(6, 4))
    for scheduler, (xs, ys) in sorted(series.items()):
        ax.plot(xs, [y / 1000 for y in ys], marker="o", label=scheduler)
    ax.set_xlabel("load")
    ax.set_ylabel(f"{args.flow_class}-flow {args.metric.replace('_ns', '')} (us)")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    out = args.output or f"{args.csv}.{args.flow_class}.{args.metric}.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
