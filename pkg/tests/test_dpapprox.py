"""Division-free admission arithmetic: exactness, rounding, fidelity, lint."""

import ast
import inspect
import textwrap
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rifosim import dpapprox
from rifosim.dpapprox import (
    EXACT_CROSSMUL,
    SCALED_CROSSMUL,
    SHIFT_APPROX,
    ApproxMode,
    admit_crossmul,
    admit_shift,
    fidelity_report,
    guaranteed_scaled_capacity,
    round_to_power_of_two,
)


def rational_reference(min_rank, max_rank, rank, capacity, occupancy) -> bool:
    score = Fraction(max_rank - rank, max_rank - min_rank)
    headroom = Fraction(capacity - occupancy, capacity)
    return score >= headroom


class TestCrossmul:
    def test_drop_case(self):
        assert admit_crossmul(1, 6, 5, 3, 2) is False

    def test_admit_case(self):
        assert admit_crossmul(1, 6, 4, 3, 2) is True

    @given(st.integers(0, 2**16), st.integers(1, 2**16), st.integers(1, 64),
           st.integers(0, 63))
    def test_best_rank_always_admitted(self, lo, span, capacity, occupancy):
        occupancy = min(occupancy, capacity - 1)
        assert admit_crossmul(lo, lo + span, lo, capacity, occupancy) is True

    @given(st.integers(0, 2**20), st.integers(1, 2**16), st.integers(0, 2**16),
           st.integers(1, 256), st.integers(0, 255))
    @settings(max_examples=300)
    def test_matches_rational_reference(self, lo, span, roff, capacity, occupancy):
        rank = lo + min(roff, span)
        occupancy = min(occupancy, capacity - 1)
        assert admit_crossmul(lo, lo + span, rank, capacity, occupancy) == \
            rational_reference(lo, lo + span, rank, capacity, occupancy)

    def test_input_contract(self):
        with pytest.raises(AssertionError):
            admit_crossmul(5, 5, 5, 3, 0)  # degenerate belongs upstream
        with pytest.raises(AssertionError):
            admit_crossmul(0, 9, 4, 3, 3)  # full queue belongs upstream


class TestScaledCapacity:
    def test_default_parameters(self):
        assert guaranteed_scaled_capacity(20, Fraction(1, 10)) == 18

    def test_round_half_up(self):
        assert guaranteed_scaled_capacity(3, Fraction(1, 2)) == 2  # 1.5 -> 2
        assert guaranteed_scaled_capacity(20, Fraction(1, 3)) == 13  # 13.33 -> 13

    def test_scaled_never_false_admits(self):
        # smaller left multiplier only makes admission stricter
        for r in range(0, 10):
            scaled = admit_crossmul(0, 9, r, 20, 5,
                                    guaranteed_scaled_capacity(20, Fraction(1, 10)))
            exact = admit_crossmul(0, 9, r, 20, 5)
            assert not (scaled and not exact)


class TestRounding:
    @pytest.mark.parametrize("value,expected", [
        (1, 1), (2, 2), (3, 4), (4, 4), (5, 4), (6, 8), (7, 8), (8, 8),
        (12, 16), (20, 16), (24, 32), (48, 64), (1023, 1024), (1025, 1024),
    ])
    def test_known_values(self, value, expected):
        assert round_to_power_of_two(value) == expected

    def test_exhaustive_against_brute_force(self):
        powers = [1 << i for i in range(14)]
        for v in range(1, 4097):
            best = min(powers, key=lambda p: (abs(v - p), -p))  # ties up
            assert round_to_power_of_two(v) == best


class TestShift:
    def test_example_b3(self):
        # B=3 rounds to 4 (tie up), B-l=1 stays 1:
        # decision becomes (max-r)<<2 >= (max-min)<<0
        for lo, hi, r in [(1, 6, 4), (1, 6, 5), (0, 100, 37), (2, 9, 9)]:
            assert admit_shift(lo, hi, r, 3, 2) == (((hi - r) << 2) >= (hi - lo))

    @given(st.integers(0, 2**12), st.integers(1, 2**12), st.integers(0, 2**12),
           st.sampled_from([1, 2, 4, 8, 16, 32]), st.integers(0, 5))
    def test_identity_when_both_powers_of_two(self, lo, span, roff, capacity, lexp):
        rank = lo + min(roff, span)
        free_pot = 1 << lexp
        if free_pot > capacity:
            return
        occupancy = capacity - free_pot
        assert admit_shift(lo, lo + span, rank, capacity, occupancy) == \
            admit_crossmul(lo, lo + span, rank, capacity, occupancy)

    @given(st.integers(0, 2**12), st.integers(1, 2**12), st.integers(0, 2**12),
           st.sampled_from([1, 2, 4, 8, 16, 32, 64]))
    def test_identity_at_empty_queue_pot_capacity(self, lo, span, roff, capacity):
        rank = lo + min(roff, span)
        assert admit_shift(lo, lo + span, rank, capacity, 0) == \
            admit_crossmul(lo, lo + span, rank, capacity, 0)


class TestApproxMode:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            ApproxMode("sqrt")


class TestFidelity:
    def test_crossmul_is_always_exact(self):
        for seed in (0, 1, 99):
            r = fidelity_report(EXACT_CROSSMUL, 20_000, np.random.default_rng(seed))
            assert r.agreement == 1 and r.disagreements == 0

    def test_reproducible_under_fixed_seed(self):
        a = fidelity_report(SHIFT_APPROX, 50_000, np.random.default_rng(7))
        b = fidelity_report(SHIFT_APPROX, 50_000, np.random.default_rng(7))
        assert (a.false_admit, a.false_drop) == (b.false_admit, b.false_drop)

    def test_scaled_crossmul_only_false_drops(self):
        r = fidelity_report(SCALED_CROSSMUL, 50_000, np.random.default_rng(3))
        assert r.false_admit == 0 and r.false_drop > 0

    def test_agreement_accounting(self):
        r = fidelity_report(SHIFT_APPROX, 10_000, np.random.default_rng(5))
        assert r.agreement == 1 - Fraction(r.false_admit + r.false_drop, 10_000)

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            fidelity_report(SHIFT_APPROX, 0, np.random.default_rng(0))


class TestIntegerOnlyLint:
    """Decision-path functions must stay free of division and floats."""

    FORBIDDEN = (ast.Div, ast.FloorDiv, ast.Mod, ast.Pow)

    @pytest.mark.parametrize("func", [admit_crossmul, admit_shift,
                                      round_to_power_of_two])
    def test_no_division_or_floats(self, func):
        tree = ast.parse(textwrap.dedent(inspect.getsource(func)))
        for node in ast.walk(tree):
            assert not isinstance(node, self.FORBIDDEN), \
                f"{func.__name__} uses {type(node).__name__}"
            if isinstance(node, ast.Constant):
                assert not isinstance(node.value, float), \
                    f"{func.__name__} contains float literal {node.value}"

    def test_module_decision_path_documented(self):
        assert "integer-only" in dpapprox.__doc__
