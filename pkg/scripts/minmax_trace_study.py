"""Study how the tracking range T shapes the min/max registers.

Streams uniform random ranks through the registers for several T values and
compares the observed mean per-window maximum against the closed-form
expectation for the maximum of T uniform draws.
"""

import argparse
import statistics
import sys

import numpy as np

from rifosim.schedulers import RifoState, rifo_track_update


def expected_window_max(tracking: int, hi: int) -> float:
    n = hi + 1
    return sum(m * (((m + 1) / n) ** tracking - (m / n) ** tracking)
               for m in range(n))


def trace(tracking: int, packets: int, hi: int, seed: int):
    state = RifoState(tracking_range=tracking, guaranteed_fraction=0)
    ranks = np.random.default_rng(seed).integers(0, hi + 1, size=packets)
    maxima, minima = [], []
    for i, rank in enumerate(ranks, start=1):
        rifo_track_update(state, int(rank))
        if i % tracking == 0:
            maxima.append(state.max_rank)
            minima.append(state.min_rank)
    return maxima, minima


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--T", type=int, nargs="+", default=[10, 30, 100, 1000])
    parser.add_argument("--packets", type=int, default=100_000)
    parser.add_argument("--hi", type=int, default=100)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    print(f"{'T':>6} {'windows':>8} {'mean max':>9} {'analytic':>9} "
          f"{'mean min':>9} {'analytic':>9}")
    for tracking in args.T:
        maxima, minima = trace(tracking, args.packets, args.hi, args.seed)
        if not maxima:
            print(f"{tracking:>6} {'-':>8}  (stream shorter than one window)")
            continue
        emax = expected_window_max(tracking, args.hi)
        emin = args.hi - emax  # uniform symmetry
        print(f"{tracking:>6} {len(maxima):>8} {statistics.fmean(maxima):>9.2f} "
              f"{emax:>9.2f} {statistics.fmean(minima):>9.2f} {emin:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
