"""Concrete scheduler disciplines: RIFO, AIFO, SP-PIFO, PIFO, drop-tail.

RIFO admits into a single FIFO by scoring the incoming rank against the
min/max of recently seen ranks (periodically reset every ``tracking_range``
packets) and comparing the score with the share of the queue still free.
All admission arithmetic on the reference path here is exact rational; the
division-free integer emulation of the same inequality lives in
:mod:`rifosim.dpapprox`.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .core import (
    ADMIT_DEGENERATE,
    ADMIT_GUARANTEED,
    ADMIT_INSERTED,
    ADMIT_SCORE,
    DROP_QUEUE_FULL,
    DROP_REJECTED,
    DROP_TAIL,
    Packet,
    QueueState,
    Scheduler,
    SchedulerDecision,
)

DEFAULT_QUEUE_CAPACITY = 20
DEFAULT_TRACKING_RANGE = 50
DEFAULT_GUARANTEED_FRACTION = Fraction(1, 10)
DEFAULT_AIFO_WINDOW = 50
DEFAULT_SP_PIFO_QUEUES = 8


def _as_fraction(value) -> Fraction:
    # str() round-trip keeps decimal configs exact (0.1 -> 1/10, not the
    # nearest binary double).
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def guaranteed_occupancy_limit(capacity: int, guaranteed_fraction: Fraction) -> int:
    """Largest queue length still inside the guaranteed admission buffer.

    The guarantee covers queue lengths with utilization strictly below the
    configured fraction, so a fraction of 0 disables it entirely (returns -1).
    """
    k = _as_fraction(guaranteed_fraction)
    if not 0 <= k < 1:
        raise ValueError("guaranteed fraction must be in [0, 1)")
    # largest integer l with l < k * capacity
    return ceil(k * capacity) - 1


# ---------------------------------------------------------------------------
# RIFO
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class RifoState:
    """The three mutable RIFO cells (min, max, packet counter) plus parameters.

    ``min_rank``/``max_rank`` are None until the first packet is observed,
    standing in for the +inf / 0 initial register values.
    """

    tracking_range: int = DEFAULT_TRACKING_RANGE
    guaranteed_fraction: Fraction = DEFAULT_GUARANTEED_FRACTION
    min_rank: int | None = None
    max_rank: int | None = None
    counter: int = 0

    def __post_init__(self) -> None:
        if self.tracking_range < 1:
            raise ValueError("tracking_range must be >= 1")
        self.guaranteed_fraction = _as_fraction(self.guaranteed_fraction)
        if not 0 <= self.guaranteed_fraction < 1:
            raise ValueError("guaranteed fraction must be in [0, 1)")


def rifo_track_update(state: RifoState, rank: int) -> RifoState:
    """Fold one arriving rank into the min/max registers.

    Runs for every arriving packet, admitted or not. When the counter has
    reached the tracking range the registers reset to this packet's rank and
    the counter restarts at 1 (the resetting packet opens the next range).
    """
    if state.counter == state.tracking_range:
        state.min_rank = rank
        state.max_rank = rank
        state.counter = 1
    else:
        state.min_rank = rank if state.min_rank is None else min(state.min_rank, rank)
        state.max_rank = rank if state.max_rank is None else max(state.max_rank, rank)
        state.counter += 1
    return state


def rifo_normalize(min_rank: int, max_rank: int, rank: int) -> Fraction:
    """Min-max score of a rank: (max - rank) / (max - min), clamped to [0, 1].

    Lower ranks score higher (cost-criterion orientation). Requires
    min_rank < max_rank; the equal case must be routed to the degenerate
    admit branch by the caller.
    """
    if min_rank >= max_rank:
        raise ValueError("rifo_normalize requires min_rank < max_rank")
    if rank <= min_rank:
        return Fraction(1)
    if rank >= max_rank:
        return Fraction(0)
    return Fraction(max_rank - rank, max_rank - min_rank)


def rifo_queue_headroom(queue: QueueState) -> Fraction:
    """Share of the queue still free: (capacity - occupancy) / capacity."""
    return Fraction(queue.capacity - queue.occupancy, queue.capacity)


def _rifo_admit_ints(
    min_rank: int,
    max_rank: int,
    rank: int,
    capacity: int,
    occupancy: int,
    guaranteed_limit: int,
) -> SchedulerDecision:
    # Integer-only decision path; cross-multiplying the score/headroom
    # comparison is algebraically identical to the rational form.
    if occupancy >= capacity:
        return DROP_QUEUE_FULL
    if min_rank == max_rank:
        return ADMIT_DEGENERATE
    if occupancy <= guaranteed_limit:
        return ADMIT_GUARANTEED
    if (max_rank - rank) * capacity >= (max_rank - min_rank) * (capacity - occupancy):
        return ADMIT_SCORE
    return DROP_REJECTED


def rifo_admit(state: RifoState, rank: int, queue: QueueState) -> SchedulerDecision:
    """Decide admission for a rank given tracked min/max and queue fill.

    Expects ``rifo_track_update`` to have already run for this packet, so the
    packet's own rank is part of the tracked range. Branch order: a
    physically full queue drops unconditionally; equal min/max admits (the
    score is undefined); occupancy strictly below the guaranteed share
    admits; otherwise admit iff score >= free-queue share.
    """
    if state.min_rank is None or state.max_rank is None:
        raise ValueError("rifo_admit called before any rank was tracked")
    limit = guaranteed_occupancy_limit(queue.capacity, state.guaranteed_fraction)
    return _rifo_admit_ints(
        state.min_rank, state.max_rank, rank, queue.capacity, queue.occupancy, limit
    )


class RifoQueue(Scheduler):
    """Single FIFO with RIFO admission (min/max tracking + periodic reset)."""

    kind = "rifo"

    def __init__(
        self,
        capacity: int = DEFAULT_QUEUE_CAPACITY,
        tracking_range: int = DEFAULT_TRACKING_RANGE,
        guaranteed_fraction=DEFAULT_GUARANTEED_FRACTION,
    ):
        super().__init__(capacity)
        self.state = RifoState(tracking_range, _as_fraction(guaranteed_fraction))
        self._guaranteed_limit = guaranteed_occupancy_limit(
            capacity, self.state.guaranteed_fraction
        )
        self._fifo: deque[Packet] = deque()

    def __len__(self) -> int:
        return len(self._fifo)

    def _admit(self, packet: Packet) -> SchedulerDecision:
        rifo_track_update(self.state, packet.rank)
        decision = _rifo_admit_ints(
            self.state.min_rank,
            self.state.max_rank,
            packet.rank,
            self.capacity,
            len(self._fifo),
            self._guaranteed_limit,
        )
        if decision.admitted:
            self._fifo.append(packet)
        return decision

    def _pop(self) -> Packet | None:
        return self._fifo.popleft() if self._fifo else None


# ---------------------------------------------------------------------------
# AIFO
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class AifoState:
    """Sliding window of recently observed ranks plus the guaranteed fraction."""

    window_size: int = DEFAULT_AIFO_WINDOW
    guaranteed_fraction: Fraction = DEFAULT_GUARANTEED_FRACTION
    window: deque = field(default_factory=deque)

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        self.guaranteed_fraction = _as_fraction(self.guaranteed_fraction)
        if not 0 <= self.guaranteed_fraction < 1:
            raise ValueError("guaranteed fraction must be in [0, 1)")
        self.window = deque(self.window, maxlen=self.window_size)


def aifo_quantile(window, rank: int) -> Fraction:
    """Empirical CDF of the window at this rank: share of entries strictly below.

    An empty window yields 0 (cold start admits).
    """
    if not window:
        return Fraction(0)
    below = sum(1 for r in window if r < rank)
    return Fraction(below, len(window))


def aifo_admit(state: AifoState, rank: int, queue: QueueState) -> SchedulerDecision:
    """AIFO admission: window quantile vs free-queue share scaled by 1/(1-k).

    Expects the window to already contain this packet's rank. An empty queue
    admits every rank; a nearly full queue admits only low quantiles.
    """
    capacity, occupancy = queue.capacity, queue.occupancy
    if occupancy >= capacity:
        return DROP_QUEUE_FULL
    k = state.guaranteed_fraction
    if occupancy <= guaranteed_occupancy_limit(capacity, k):
        return ADMIT_GUARANTEED
    quantile = aifo_quantile(state.window, rank)
    if quantile <= Fraction(capacity - occupancy, capacity) / (1 - k):
        return ADMIT_SCORE
    return DROP_REJECTED


class AifoQueue(Scheduler):
    """Single FIFO with AIFO admission (quantile of a sliding rank window)."""

    kind = "aifo"

    def __init__(
        self,
        capacity: int = DEFAULT_QUEUE_CAPACITY,
        window_size: int = DEFAULT_AIFO_WINDOW,
        guaranteed_fraction=DEFAULT_GUARANTEED_FRACTION,
    ):
        super().__init__(capacity)
        self.state = AifoState(window_size, _as_fraction(guaranteed_fraction))
        self._fifo: deque[Packet] = deque()

    def __len__(self) -> int:
        return len(self._fifo)

    def _admit(self, packet: Packet) -> SchedulerDecision:
        # Every arriving rank enters the window before the decision.
        self.state.window.append(packet.rank)
        decision = aifo_admit(self.state, packet.rank, self.queue_state())
        if decision.admitted:
            self._fifo.append(packet)
        return decision

    def _pop(self) -> Packet | None:
        return self._fifo.popleft() if self._fifo else None


# ---------------------------------------------------------------------------
# SP-PIFO
# ---------------------------------------------------------------------------


class SpPifoQueue(Scheduler):
    """n strict-priority FIFOs with adaptive per-queue rank bounds.

    Enqueue scans from the lowest-priority queue towards the highest and picks
    the first queue whose bound does not exceed the rank, raising that bound
    to the rank (push-up). A rank below every bound is an inversion at the
    head queue: all bounds drop by the overshoot and the packet enters the
    highest-priority queue (push-down). ``capacity`` is the total target
    length; each queue gets ceil(capacity / num_queues) slots.
    """

    kind = "sppifo"

    def __init__(
        self,
        capacity: int = DEFAULT_QUEUE_CAPACITY,
        num_queues: int = DEFAULT_SP_PIFO_QUEUES,
    ):
        if num_queues < 2:
            raise ValueError("num_queues must be >= 2")
        super().__init__(capacity)
        self.num_queues = num_queues
        self.queue_capacity = -(-capacity // num_queues)
        # index 0 is the highest priority queue
        self.bounds: list[int] = [0] * num_queues
        self.queues: list[deque[Packet]] = [deque() for _ in range(num_queues)]

    def __len__(self) -> int:
        return sum(len(q) for q in self.queues)

    def queue_state(self) -> QueueState:
        total = self.queue_capacity * self.num_queues
        return QueueState(total, len(self))

    def _admit(self, packet: Packet) -> SchedulerDecision:
        rank = packet.rank
        dest = None
        for i in range(self.num_queues - 1, -1, -1):
            if self.bounds[i] <= rank:
                dest = i
                break
        push_down = dest is None
        if push_down:
            dest = 0
        if len(self.queues[dest]) >= self.queue_capacity:
            return DROP_QUEUE_FULL  # bounds untouched on a full destination
        if push_down:
            delta = self.bounds[0] - rank
            self.bounds = [b - delta for b in self.bounds]
        else:
            self.bounds[dest] = rank
        self.queues[dest].append(packet)
        return ADMIT_INSERTED

    def _pop(self) -> Packet | None:
        for q in self.queues:
            if q:
                return q.popleft()
        return None


# ---------------------------------------------------------------------------
# PIFO and drop-tail
# ---------------------------------------------------------------------------


class PifoQueue(Scheduler):
    """Ideal rank-sorted queue: dequeues the lowest rank, FIFO among ties.

    Packets arriving at a full queue are dropped; residents are never pushed
    out.
    """

    kind = "pifo"

    def __init__(self, capacity: int = DEFAULT_QUEUE_CAPACITY):
        super().__init__(capacity)
        self._heap: list[tuple[int, int, Packet]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def _admit(self, packet: Packet) -> SchedulerDecision:
        if len(self._heap) >= self.capacity:
            return DROP_QUEUE_FULL
        heapq.heappush(self._heap, (packet.rank, self._seq, packet))
        self._seq += 1
        return ADMIT_INSERTED

    def _pop(self) -> Packet | None:
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[2]


class DropTailQueue(Scheduler):
    """Rank-blind FIFO: admit until full, then tail-drop."""

    kind = "droptail"

    def __init__(self, capacity: int = DEFAULT_QUEUE_CAPACITY):
        super().__init__(capacity)
        self._fifo: deque[Packet] = deque()

    def __len__(self) -> int:
        return len(self._fifo)

    def _admit(self, packet: Packet) -> SchedulerDecision:
        if len(self._fifo) >= self.capacity:
            return DROP_TAIL
        self._fifo.append(packet)
        return ADMIT_INSERTED

    def _pop(self) -> Packet | None:
        return self._fifo.popleft() if self._fifo else None


SCHEDULER_KINDS = ("rifo", "aifo", "sppifo", "pifo", "droptail")


def make_scheduler(
    kind: str,
    capacity: int = DEFAULT_QUEUE_CAPACITY,
    *,
    tracking_range: int = DEFAULT_TRACKING_RANGE,
    guaranteed_fraction=DEFAULT_GUARANTEED_FRACTION,
    window_size: int = DEFAULT_AIFO_WINDOW,
    num_queues: int = DEFAULT_SP_PIFO_QUEUES,
) -> Scheduler:
    """Build a scheduler by kind name, applying only the parameters it uses."""
    if kind == "rifo":
        return RifoQueue(capacity, tracking_range, guaranteed_fraction)
    if kind == "aifo":
        return AifoQueue(capacity, window_size, guaranteed_fraction)
    if kind == "sppifo":
        return SpPifoQueue(capacity, num_queues)
    if kind == "pifo":
        return PifoQueue(capacity)
    if kind == "droptail":
        return DropTailQueue(capacity)
    raise ValueError(f"unknown scheduler kind {kind!r}; expected one of {SCHEDULER_KINDS}")
