"""Rank-assignment policies: SRPT (remaining flow size) and STFQ (fair share).

Ranks must be integers (the admission arithmetic models integer registers),
so byte counts and virtual-time tags are divided by a configurable quantum
(default one MTU) and rounded up before becoming ranks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .core import MTU

DEFAULT_RANK_QUANTUM = MTU

POLICY_KINDS = ("srpt", "stfq")


@dataclass(slots=True)
class FlowProgress:
    """Per-flow policy state: bytes moved so far and the STFQ finish tag."""

    flow_id: int
    total_bytes: int
    sent_bytes: int = 0
    last_finish_tag: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.total_bytes < 1:
            raise ValueError("total_bytes must be >= 1")
        if self.sent_bytes < 0:
            raise ValueError("sent_bytes must be >= 0")

    @property
    def remaining_bytes(self) -> int:
        return max(0, self.total_bytes - self.sent_bytes)


def srpt_rank(flow: FlowProgress, quantum: int = DEFAULT_RANK_QUANTUM) -> int:
    """Remaining flow size in quantum units, rounded up. 0 once complete."""
    if quantum < 1:
        raise ValueError("quantum must be >= 1")
    return -(-flow.remaining_bytes // quantum)


def stfq_rank(
    flow: FlowProgress,
    virtual_time: Fraction,
    packet_size: int,
    weight=1,
    quantum: int = DEFAULT_RANK_QUANTUM,
) -> tuple[int, Fraction]:
    """Start-time fair queueing tag for one packet of the flow.

    start_tag = max(virtual_time, flow's last finish tag); the flow's finish
    tag advances by packet_size / weight. Returns the quantized rank and the
    exact start tag; the caller advances virtual time to the start tag of
    whichever packet is in service at the bottleneck.
    """
    if quantum < 1:
        raise ValueError("quantum must be >= 1")
    weight = Fraction(weight)
    if weight <= 0:
        raise ValueError("weight must be > 0")
    start_tag = max(Fraction(virtual_time), flow.last_finish_tag)
    flow.last_finish_tag = start_tag + Fraction(packet_size) / weight
    return ceil(start_tag / quantum), start_tag
