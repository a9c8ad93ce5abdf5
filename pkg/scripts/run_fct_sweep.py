"""Run a full FCT sweep from a YAML config, writing one starter config on demand.

Usage:
    python3 scripts/run_fct_sweep.py --init sweep.yaml   # write a template
    python3 scripts/run_fct_sweep.py sweep.yaml          # run it
"""

import argparse
import sys
from pathlib import Path

from rifosim import cli

TEMPLATE = """\
topology: desk
scheduler:
  kind: rifo
  capacity: 20
  tracking_range: 50
  guaranteed_fraction: 0.1
policy:
  kind: srpt
workload:
  distribution: workloads/websearch_approx.cdf
  horizon_ns: 50000000
output: results/fct_sweep.csv
sweep:
  schedulers: [rifo, aifo, sppifo, pifo, droptail]
  loads: [0.2, 0.4, 0.6, 0.8]
  seeds: [1, 2, 3, 4, 5]
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", help="sweep config YAML")
    parser.add_argument("--init", action="store_true",
                        help="write a starter config to CONFIG and exit")
    args = parser.parse_args()
    if args.init:
        path = Path(args.config)
        if path.exists():
            print(f"refusing to overwrite {path}", file=sys.stderr)
            return 1
        path.write_text(TEMPLATE)
        print(f"wrote {path}; edit it and re-run without --init")
        return 0
    return cli.main(["sweep", args.config])


if __name__ == "__main__":
    sys.exit(main())
