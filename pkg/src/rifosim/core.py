"""Shared domain types and the admission-queue interface.

Every scheduler in this package is an admission-controlled queue that sits at
an egress port: packets are offered to it, it admits or drops each one, and a
transmitter drains it one packet at a time. Concrete disciplines live in
:mod:`rifosim.schedulers`; this module pins down the types they share and the
counters that make conservation checks possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

MTU = 1500
"""Maximum packet payload in bytes; flows are split into MTU-sized packets."""

MAX_RANK = 2**32 - 1
"""Ranks must fit a 32-bit switch register."""


class Verdict(Enum):
    ADMIT = "admit"
    DROP = "drop"


class Reason(Enum):
    """Which admission branch produced the verdict."""

    GUARANTEED_BUFFER = "guaranteed_buffer"
    SCORE_CONDITION = "score_condition"
    DEGENERATE_MINMAX = "degenerate_minmax"
    INSERTED = "inserted"
    REJECTED = "rejected"
    QUEUE_FULL = "queue_full"
    TAIL_DROPPED = "tail_dropped"


ADMIT_REASONS = frozenset(
    {
        Reason.GUARANTEED_BUFFER,
        Reason.SCORE_CONDITION,
        Reason.DEGENERATE_MINMAX,
        Reason.INSERTED,
    }
)
DROP_REASONS = frozenset({Reason.REJECTED, Reason.QUEUE_FULL, Reason.TAIL_DROPPED})


@dataclass(frozen=True, slots=True)
class SchedulerDecision:
    """Admit/drop verdict plus the branch that fired."""

    verdict: Verdict
    reason: Reason

    def __post_init__(self) -> None:
        allowed = ADMIT_REASONS if self.verdict is Verdict.ADMIT else DROP_REASONS
        if self.reason not in allowed:
            raise ValueError(f"reason {self.reason} inconsistent with verdict {self.verdict}")

    @property
    def admitted(self) -> bool:
        return self.verdict is Verdict.ADMIT


# Decisions are value objects; reuse the nine legal combinations.
ADMIT_GUARANTEED = SchedulerDecision(Verdict.ADMIT, Reason.GUARANTEED_BUFFER)
ADMIT_SCORE = SchedulerDecision(Verdict.ADMIT, Reason.SCORE_CONDITION)
ADMIT_DEGENERATE = SchedulerDecision(Verdict.ADMIT, Reason.DEGENERATE_MINMAX)
ADMIT_INSERTED = SchedulerDecision(Verdict.ADMIT, Reason.INSERTED)
DROP_REJECTED = SchedulerDecision(Verdict.DROP, Reason.REJECTED)
DROP_QUEUE_FULL = SchedulerDecision(Verdict.DROP, Reason.QUEUE_FULL)
DROP_TAIL = SchedulerDecision(Verdict.DROP, Reason.TAIL_DROPPED)


@dataclass(slots=True)
class Packet:
    """A ranked unit of transmission.

    ``packet_id`` is unique per simulation run and strictly increasing in
    creation order; ``enqueue_time`` is stamped (ns) when a scheduler admits
    the packet.
    """

    packet_id: int
    flow_id: int
    rank: int
    size_bytes: int
    enqueue_time: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.rank <= MAX_RANK:
            raise ValueError(f"rank {self.rank} outside 32-bit range")
        if not 0 < self.size_bytes <= MTU:
            raise ValueError(f"size_bytes {self.size_bytes} outside (0, {MTU}]")


@dataclass(frozen=True, slots=True)
class QueueState:
    """Queue capacity and current length, both in packets."""

    capacity: int
    occupancy: int

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0 <= self.occupancy <= self.capacity:
            raise ValueError(f"occupancy {self.occupancy} outside [0, {self.capacity}]")


@dataclass(slots=True)
class QueueCounters:
    """Lifetime packet counters for one scheduler instance.

    Invariants: offered = admitted + dropped, and
    admitted = dequeued + resident at any quiescent point.
    """

    offered: int = 0
    admitted: int = 0
    dropped: int = 0
    dequeued: int = 0


class Scheduler:
    """Base class for admission-controlled queues.

    Subclasses implement ``_admit`` (store the packet and return a decision)
    and ``_pop`` (remove and return the next packet per the service
    discipline). One instance must only be driven from one logical thread.
    """

    kind = "abstract"

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.counters = QueueCounters()

    # -- interface -----------------------------------------------------

    def enqueue(self, packet: Packet, now: int = 0) -> SchedulerDecision:
        """Offer a packet; on Admit it is stored and will be dequeued exactly once."""
        self.counters.offered += 1
        decision = self._admit(packet)
        if decision.admitted:
            packet.enqueue_time = now
            self.counters.admitted += 1
        else:
            self.counters.dropped += 1
        return decision

    def dequeue(self, now: int = 0) -> Packet | None:
        """Remove and return the next packet, or None when empty."""
        packet = self._pop()
        if packet is not None:
            self.counters.dequeued += 1
        return packet

    def __len__(self) -> int:
        raise NotImplementedError

    @property
    def occupancy(self) -> int:
        return len(self)

    def queue_state(self) -> QueueState:
        return QueueState(self.capacity, len(self))

    # -- subclass hooks ------------------------------------------------

    def _admit(self, packet: Packet) -> SchedulerDecision:
        raise NotImplementedError

    def _pop(self) -> Packet | None:
        raise NotImplementedError


@dataclass(slots=True)
class FlowRecord:
    """One generated flow and its completion bookkeeping (times in ns)."""

    flow_id: int
    src_host: int
    dst_host: int
    size_bytes: int
    arrival_ns: int
    completion_ns: int | None = None

    def __post_init__(self) -> None:
        if self.src_host == self.dst_host:
            raise ValueError("src_host and dst_host must differ")
        if self.size_bytes < 1:
            raise ValueError("size_bytes must be positive")
        if self.completion_ns is not None and self.completion_ns < self.arrival_ns:
            raise ValueError("completion_ns before arrival_ns")

    @property
    def completed(self) -> bool:
        return self.completion_ns is not None

    @property
    def fct_ns(self) -> int:
        if self.completion_ns is None:
            raise ValueError(f"flow {self.flow_id} did not complete")
        return self.completion_ns - self.arrival_ns
