"""Rank policies: SRPT remaining-size ranks and STFQ start tags."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rifosim.core import MTU
from rifosim.policies import FlowProgress, srpt_rank, stfq_rank


class TestSrpt:
    def test_two_packets_remaining(self):
        assert srpt_rank(FlowProgress(0, 3000)) == 2

    def test_completed_flow(self):
        assert srpt_rank(FlowProgress(0, 3000, sent_bytes=3000)) == 0

    def test_hundred_kb(self):
        assert srpt_rank(FlowProgress(0, 100_000)) == 67  # ceil(100000/1500)

    def test_custom_quantum(self):
        assert srpt_rank(FlowProgress(0, 100_000), quantum=1) == 100_000

    def test_oversent_clamps_to_zero(self):
        assert srpt_rank(FlowProgress(0, 1000, sent_bytes=2500)) == 0

    def test_bad_quantum(self):
        with pytest.raises(ValueError):
            srpt_rank(FlowProgress(0, 1000), quantum=0)

    @given(total=st.integers(1, 10**7), deliveries=st.lists(st.integers(1, MTU), max_size=30))
    def test_nonincreasing_over_lifetime(self, total, deliveries):
        flow = FlowProgress(0, total)
        last = srpt_rank(flow)
        for d in deliveries:
            flow.sent_bytes = min(total, flow.sent_bytes + d)
            rank = srpt_rank(flow)
            assert rank <= last
            last = rank


class TestStfq:
    def test_cold_start(self):
        flow = FlowProgress(0, 10_000)
        rank, tag = stfq_rank(flow, Fraction(0), 1500)
        assert (rank, tag) == (0, 0)
        assert flow.last_finish_tag == 1500

    def test_second_packet_starts_at_finish_tag(self):
        flow = FlowProgress(0, 10_000)
        stfq_rank(flow, Fraction(0), 1500)
        rank, tag = stfq_rank(flow, Fraction(0), 1500)
        assert tag == 1500
        assert rank == 1  # ceil(1500/1500)

    def test_virtual_time_dominates(self):
        flow = FlowProgress(0, 10_000)
        rank, tag = stfq_rank(flow, Fraction(4000), 1500)
        assert tag == 4000
        assert flow.last_finish_tag == 5500

    def test_weight_scales_finish_tag(self):
        flow = FlowProgress(0, 10_000)
        stfq_rank(flow, Fraction(0), 1500, weight=2)
        assert flow.last_finish_tag == Fraction(750)

    def test_bad_weight(self):
        with pytest.raises(ValueError):
            stfq_rank(FlowProgress(0, 100), Fraction(0), 100, weight=0)

    @given(sizes=st.lists(st.integers(1, MTU), min_size=1, max_size=30),
           vt_steps=st.lists(st.integers(0, 5000), min_size=30, max_size=30))
    def test_start_tags_nondecreasing(self, sizes, vt_steps):
        flow = FlowProgress(0, 10**9)
        vt = Fraction(0)
        last_tag = None
        for size, step in zip(sizes, vt_steps):
            vt += step
            _, tag = stfq_rank(flow, vt, size)
            if last_tag is not None:
                assert tag >= last_tag
            last_tag = tag
