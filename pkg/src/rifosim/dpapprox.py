"""Division-free admission arithmetic as a switch data plane would compute it.

The rational admission test (max - r_p)/(max - min) >= (B - l)/B is not
implementable with pipeline ALUs, so it is restated as a cross-multiplied
integer comparison, optionally with the multipliers rounded to powers of two
so the products become left-shifts. This module emulates both forms and
measures how often the shift form disagrees with the exact comparison.

Decision-path functions (`admit_crossmul`, `admit_shift`,
`round_to_power_of_two`) are integer-only: no division, no floats. The test
suite enforces this with an AST lint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

import numpy as np

from .schedulers import DEFAULT_QUEUE_CAPACITY, _as_fraction

MAX_INPUT_BITS = 32


@dataclass(frozen=True, slots=True)
class ApproxMode:
    """Which arithmetic emulation to run.

    kind: "crossmul" (exact integer cross-multiplication) or "shift"
    (multipliers rounded to powers of two, evaluated with left-shifts).
    scale_by_guaranteed_buffer: if True the left multiplier is the integer
    (1 - k) * B instead of B.
    """

    kind: str = "crossmul"
    scale_by_guaranteed_buffer: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("crossmul", "shift"):
            raise ValueError(f"unknown approximation kind {self.kind!r}")


EXACT_CROSSMUL = ApproxMode("crossmul", False)
SCALED_CROSSMUL = ApproxMode("crossmul", True)
SHIFT_APPROX = ApproxMode("shift", False)
SCALED_SHIFT_APPROX = ApproxMode("shift", True)


def guaranteed_scaled_capacity(capacity: int, guaranteed_fraction) -> int:
    """Integer (1 - k) * B used as the left multiplier, rounded half up.

    Precomputed once per configuration; not part of the per-packet decision
    path, so exact rational arithmetic is fine here.
    """
    k = _as_fraction(guaranteed_fraction)
    if not 0 <= k < 1:
        raise ValueError("guaranteed fraction must be in [0, 1)")
    scaled = (1 - k) * capacity
    return int(floor(scaled + Fraction(1, 2)))


def _check_inputs(min_rank: int, max_rank: int, rank: int, capacity: int, occupancy: int):
    assert 0 <= min_rank < max_rank < (1 << MAX_INPUT_BITS)
    assert min_rank <= rank <= max_rank
    assert 0 < capacity < (1 << MAX_INPUT_BITS)
    assert 0 <= occupancy < capacity


def admit_crossmul(
    min_rank: int,
    max_rank: int,
    rank: int,
    capacity: int,
    occupancy: int,
    left_multiplier: int | None = None,
) -> bool:
    """Cross-multiplied admission test on integers.

    With the default left multiplier (capacity itself) this is algebraically
    identical to the rational score >= headroom comparison. Passing the
    scaled (1 - k) * capacity integer gives the guaranteed-buffer-scaled
    variant. Products of 32-bit inputs fit 64 bits; Python ints never
    overflow, the asserts just pin the modeled width.
    """
    _check_inputs(min_rank, max_rank, rank, capacity, occupancy)
    if left_multiplier is None:
        left_multiplier = capacity
    lhs = (max_rank - rank) * left_multiplier
    rhs = (max_rank - min_rank) * (capacity - occupancy)
    assert lhs < (1 << 64) and rhs < (1 << 64)
    return lhs >= rhs


def round_to_power_of_two(value: int) -> int:
    """Round a positive integer to the nearest power of two, ties upward."""
    assert value >= 1
    low = 1 << (value.bit_length() - 1)
    if value == low:
        return value
    high = low << 1
    return low if (value - low) < (high - value) else high


def admit_shift(
    min_rank: int,
    max_rank: int,
    rank: int,
    capacity: int,
    occupancy: int,
    left_multiplier: int | None = None,
) -> bool:
    """Shift-approximated admission test.

    Both multipliers are rounded to powers of two and applied as left-shifts
    of the rank differences. Identical to admit_crossmul whenever both
    multipliers already are powers of two.
    """
    _check_inputs(min_rank, max_rank, rank, capacity, occupancy)
    if left_multiplier is None:
        left_multiplier = capacity
    left_shift = round_to_power_of_two(left_multiplier).bit_length() - 1
    right_shift = round_to_power_of_two(capacity - occupancy).bit_length() - 1
    return (max_rank - rank) << left_shift >= (max_rank - min_rank) << right_shift


def _mode_left_multiplier(mode: ApproxMode, capacity: int, guaranteed_fraction) -> int:
    if mode.scale_by_guaranteed_buffer:
        return guaranteed_scaled_capacity(capacity, guaranteed_fraction)
    return capacity


@dataclass(frozen=True, slots=True)
class FidelityReport:
    """Agreement of an approximation mode with the exact rational decision."""

    mode: ApproxMode
    trials: int
    false_admit: int  # mode admits, exact comparison drops
    false_drop: int  # mode drops, exact comparison admits

    @property
    def disagreements(self) -> int:
        return self.false_admit + self.false_drop

    @property
    def agreement(self) -> Fraction:
        return 1 - Fraction(self.disagreements, self.trials)


MAX_SAMPLED_RANK = 65535


def sample_admission_states(rng: np.random.Generator, trials: int, capacity: int):
    """Draw random valid (min, max, r_p, l) tuples for a fixed capacity.

    min < max <= 65535, min <= r_p <= max, 0 <= l < capacity. The draw order
    is part of the reproducibility contract for frozen fidelity baselines.
    """
    mins = rng.integers(0, MAX_SAMPLED_RANK, size=trials, dtype=np.int64)
    maxs = rng.integers(mins + 1, MAX_SAMPLED_RANK + 1, dtype=np.int64)
    ranks = rng.integers(mins, maxs + 1, dtype=np.int64)
    occs = rng.integers(0, capacity, size=trials, dtype=np.int64)
    return mins, maxs, ranks, occs


def fidelity_report(
    mode: ApproxMode,
    trials: int,
    rng: np.random.Generator,
    capacity: int = DEFAULT_QUEUE_CAPACITY,
    guaranteed_fraction=Fraction(1, 10),
) -> FidelityReport:
    """Measure agreement between a mode and the exact rational comparison.

    The reference decision is always the unscaled exact form, so for scaled
    modes the report also captures the cost of the (1 - k) * B substitution.
    Vectorized; 10^6 trials run in well under a second.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mins, maxs, ranks, occs = sample_admission_states(rng, trials, capacity)
    score_num = maxs - ranks
    score_den = maxs - mins
    free = capacity - occs

    exact = score_num * capacity >= score_den * free

    left = _mode_left_multiplier(mode, capacity, guaranteed_fraction)
    if mode.kind == "crossmul":
        approx = score_num * left >= score_den * free
    else:
        left_pot = round_to_power_of_two(left)
        # free is in 1..capacity; table lookup avoids a per-row rounding call
        pot_table = np.array(
            [0] + [round_to_power_of_two(v) for v in range(1, capacity + 1)],
            dtype=np.int64,
        )
        approx = score_num * left_pot >= score_den * pot_table[free]

    false_admit = int(np.count_nonzero(approx & ~exact))
    false_drop = int(np.count_nonzero(~approx & exact))
    return FidelityReport(mode, trials, false_admit, false_drop)
