"""Deterministic discrete-event simulation of a leaf-spine fabric.

Queueing happens at egress ports only; every egress port owns one scheduler
instance of the configured kind. Events execute in (time_ns, seq) order with
seq assigned at scheduling time, so a run is a pure function of its inputs.
The transport is deliberately minimal: a fixed per-flow packet window,
instantaneous acknowledgements on delivery, and a fixed-delay retransmit of
any dropped packet's bytes. This isolates scheduler behavior from
congestion-control dynamics and is the principal deviation from a full
protocol stack.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .core import MTU, FlowRecord, Packet, QueueCounters
from .policies import DEFAULT_RANK_QUANTUM, FlowProgress, srpt_rank, stfq_rank
from .schedulers import Scheduler, make_scheduler

# event kinds; seq breaks every tie, so kind order never matters
FLOW_ARRIVAL = 0
PACKET_ARRIVAL_AT_PORT = 1
TRANSMISSION_COMPLETE = 2
RETRANSMIT_TIMER = 3

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """Fixed 64-bit mixer used for per-flow ECMP spine selection."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass(frozen=True, slots=True)
class Topology:
    """Two-tier leaf-spine fabric; every leaf connects to every spine."""

    leaf_count: int
    spine_count: int
    hosts_per_leaf: int
    access_bps: int
    core_bps: int
    link_delay_ns: int = 1000

    def __post_init__(self) -> None:
        if min(self.leaf_count, self.spine_count, self.hosts_per_leaf) < 1:
            raise ValueError("topology counts must be >= 1")
        if self.access_bps < 1 or self.core_bps < 1:
            raise ValueError("link rates must be positive")
        if self.link_delay_ns < 0:
            raise ValueError("link_delay_ns must be >= 0")

    @property
    def host_count(self) -> int:
        return self.leaf_count * self.hosts_per_leaf

    @property
    def hosts(self) -> range:
        return range(self.host_count)

    def leaf_of(self, host: int) -> int:
        if not 0 <= host < self.host_count:
            raise ValueError(f"host {host} out of range")
        return host // self.hosts_per_leaf

    @classmethod
    def desk_scale(cls) -> "Topology":
        """8 servers, 1 Gbps access / 4 Gbps core (1:4 ratio kept)."""
        return cls(leaf_count=2, spine_count=2, hosts_per_leaf=4,
                   access_bps=1_000_000_000, core_bps=4_000_000_000)

    @classmethod
    def full_scale(cls) -> "Topology":
        """144 servers, 10 Gbps access / 40 Gbps core."""
        return cls(leaf_count=9, spine_count=4, hosts_per_leaf=16,
                   access_bps=10_000_000_000, core_bps=40_000_000_000)

    # -- ports -------------------------------------------------------------

    def host_tx_port(self, host: int) -> str:
        return f"host{host}:tx"

    def leaf_down_port(self, host: int) -> str:
        return f"leaf{self.leaf_of(host)}->host{host}"

    def leaf_up_port(self, leaf: int, spine: int) -> str:
        return f"leaf{leaf}->spine{spine}"

    def spine_down_port(self, spine: int, leaf: int) -> str:
        return f"spine{spine}->leaf{leaf}"

    def all_ports(self) -> list[tuple[str, int]]:
        """Every egress port with its rate, in a fixed deterministic order."""
        ports = [(self.host_tx_port(h), self.access_bps) for h in self.hosts]
        ports += [(self.leaf_down_port(h), self.access_bps) for h in self.hosts]
        for leaf in range(self.leaf_count):
            for spine in range(self.spine_count):
                ports.append((self.leaf_up_port(leaf, spine), self.core_bps))
        for spine in range(self.spine_count):
            for leaf in range(self.leaf_count):
                ports.append((self.spine_down_port(spine, leaf), self.core_bps))
        return ports

    def base_rtt_ns(self) -> int:
        """Round trip of one MTU along the longest (4-hop) path and back."""
        one_way = (
            2 * serialization_ns(MTU, self.access_bps)
            + 2 * serialization_ns(MTU, self.core_bps)
            + 4 * self.link_delay_ns
        )
        return 2 * one_way


def serialization_ns(size_bytes: int, bps: int) -> int:
    return -(-size_bytes * 8 * 1_000_000_000 // bps)


def ecmp_route(flow_id: int, src: int, dst: int, topology: Topology) -> list[str]:
    """Egress ports traversed src -> dst; spine picked by hashing flow_id.

    The hash is per-flow, so a flow's packets never reorder due to routing.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    src_leaf, dst_leaf = topology.leaf_of(src), topology.leaf_of(dst)
    if src_leaf == dst_leaf:
        return [topology.host_tx_port(src), topology.leaf_down_port(dst)]
    spine = splitmix64(flow_id) % topology.spine_count
    return [
        topology.host_tx_port(src),
        topology.leaf_up_port(src_leaf, spine),
        topology.spine_down_port(spine, dst_leaf),
        topology.leaf_down_port(dst),
    ]


@dataclass(frozen=True, slots=True)
class TransportConfig:
    """Fixed-window transport with instant acks and delayed retransmit."""

    window_packets: int
    retransmit_delay_ns: int

    def __post_init__(self) -> None:
        if self.window_packets < 1:
            raise ValueError("window_packets must be >= 1")
        if self.retransmit_delay_ns < 1:
            raise ValueError("retransmit_delay_ns must be >= 1")

    @classmethod
    def from_topology(cls, topology: Topology) -> "TransportConfig":
        """Window = access-path BDP in packets; retransmit after 2 base RTTs."""
        rtt = topology.base_rtt_ns()
        bdp_packets = ceil(rtt * topology.access_bps / (8 * MTU * 1_000_000_000))
        return cls(window_packets=max(1, bdp_packets), retransmit_delay_ns=2 * rtt)


def packetize(size_bytes: int) -> list[int]:
    """Split a flow into MTU-sized segments; the last may be short."""
    full, rest = divmod(size_bytes, MTU)
    return [MTU] * full + ([rest] if rest else [])


class _Port:
    __slots__ = ("port_id", "bps", "scheduler", "busy", "virtual_time")

    def __init__(self, port_id: str, bps: int, scheduler: Scheduler):
        self.port_id = port_id
        self.bps = bps
        self.scheduler = scheduler
        self.busy = False
        self.virtual_time = Fraction(0)  # STFQ only


class _Flow:
    __slots__ = ("record", "progress", "path", "pending", "in_flight", "delivered")

    def __init__(self, record: FlowRecord, path: list[str]):
        self.record = record
        self.progress = FlowProgress(record.flow_id, record.size_bytes)
        self.path = path
        self.pending: deque[int] = deque(packetize(record.size_bytes))
        self.in_flight = 0
        self.delivered = 0


@dataclass(slots=True)
class SimulationResult:
    flows: list[FlowRecord]
    port_counters: dict[str, QueueCounters]
    final_time_ns: int
    events_processed: int
    delivery_log: list[int] | None = None

    @property
    def dropped_packets(self) -> int:
        return sum(c.dropped for c in self.port_counters.values())

    @property
    def unfinished_flows(self) -> int:
        return sum(1 for f in self.flows if not f.completed)


class _Engine:
    def __init__(
        self,
        topology: Topology,
        scheduler_kind: str,
        policy_kind: str,
        flows: list[FlowRecord],
        transport: TransportConfig,
        until_ns: int | None,
        scheduler_params: dict,
        rank_quantum: int,
        collect_delivery_log: bool,
    ):
        if policy_kind not in ("srpt", "stfq"):
            raise ValueError(f"unknown policy kind {policy_kind!r}")
        self.topology = topology
        self.policy_kind = policy_kind
        self.transport = transport
        self.until_ns = until_ns
        self.rank_quantum = rank_quantum
        self.ports: dict[str, _Port] = {
            pid: _Port(pid, bps, make_scheduler(scheduler_kind, **scheduler_params))
            for pid, bps in topology.all_ports()
        }
        self.records = sorted(flows, key=lambda r: r.flow_id)
        self.flows: dict[int, _Flow] = {}
        self.heap: list[tuple[int, int, int, tuple]] = []
        self.seq = 0
        self.now = 0
        self.next_packet_id = 0
        self.stfq_tags: dict[int, Fraction] = {}
        self.events_processed = 0
        self.delivery_log: list[int] | None = [] if collect_delivery_log else None
        for record in self.records:
            if record.completion_ns is not None:
                raise ValueError(f"flow {record.flow_id} already has a completion time")
            self._push(record.arrival_ns, FLOW_ARRIVAL, (record,))

    # -- event plumbing ----------------------------------------------------

    def _push(self, time_ns: int, kind: int, payload: tuple) -> None:
        if time_ns < self.now:
            raise RuntimeError("event scheduled in the past")
        heapq.heappush(self.heap, (time_ns, self.seq, kind, payload))
        self.seq += 1

    def run(self) -> SimulationResult:
        while self.heap:
            time_ns, _, kind, payload = heapq.heappop(self.heap)
            if self.until_ns is not None and time_ns > self.until_ns:
                break
            self.now = time_ns
            self.events_processed += 1
            if kind == FLOW_ARRIVAL:
                self._on_flow_arrival(*payload)
            elif kind == PACKET_ARRIVAL_AT_PORT:
                self._on_packet_arrival(*payload)
            elif kind == TRANSMISSION_COMPLETE:
                self._on_transmission_complete(*payload)
            else:
                self._on_retransmit_timer(*payload)
        counters = {pid: self.ports[pid].scheduler.counters for pid in sorted(self.ports)}
        return SimulationResult(
            flows=self.records,
            port_counters=counters,
            final_time_ns=self.now,
            events_processed=self.events_processed,
            delivery_log=self.delivery_log,
        )

    # -- handlers ----------------------------------------------------------

    def _on_flow_arrival(self, record: FlowRecord) -> None:
        path = ecmp_route(record.flow_id, record.src_host, record.dst_host, self.topology)
        flow = _Flow(record, path)
        self.flows[record.flow_id] = flow
        self._inject(flow)

    def _inject(self, flow: _Flow) -> None:
        """Send pending segments while the window has room (instant acks).

        A source-port drop stops this round of injection: the drop already
        armed a retransmit timer, and that timer (or the next delivery)
        retries, so the flow cannot stall and cannot hammer a full queue
        within a single instant.
        """
        while flow.pending and flow.in_flight < self.transport.window_packets:
            size = flow.pending.popleft()
            packet = self._make_packet(flow, size)
            flow.in_flight += 1
            if not self._enqueue_at(flow.path[0], packet):
                break

    def _make_packet(self, flow: _Flow, size: int) -> Packet:
        if self.policy_kind == "srpt":
            rank = srpt_rank(flow.progress, self.rank_quantum)
        else:
            # the destination access port is the reference bottleneck whose
            # virtual time the source reads (idealized control loop)
            bottleneck = self.ports[flow.path[-1]]
            rank, start_tag = stfq_rank(
                flow.progress, bottleneck.virtual_time, size, quantum=self.rank_quantum
            )
        packet = Packet(self.next_packet_id, flow.record.flow_id, rank, size)
        if self.policy_kind == "stfq":
            self.stfq_tags[packet.packet_id] = start_tag
        self.next_packet_id += 1
        return packet

    def _enqueue_at(self, port_id: str, packet: Packet) -> bool:
        """Offer a packet to a port; on drop, arm the retransmit path."""
        port = self.ports[port_id]
        decision = port.scheduler.enqueue(packet, self.now)
        if decision.admitted:
            if not port.busy:
                self._start_service(port)
            return True
        flow = self.flows[packet.flow_id]
        flow.in_flight -= 1  # idealized loss signal frees the slot now
        self.stfq_tags.pop(packet.packet_id, None)
        retry = self.now + self.transport.retransmit_delay_ns
        self._push(retry, RETRANSMIT_TIMER, (packet.flow_id, packet.size_bytes))
        return False

    def _start_service(self, port: _Port) -> None:
        packet = port.scheduler.dequeue(self.now)
        if packet is None:
            return
        port.busy = True
        if self.policy_kind == "stfq":
            tag = self.stfq_tags.get(packet.packet_id)
            if tag is not None and tag > port.virtual_time:
                port.virtual_time = tag
        done = self.now + serialization_ns(packet.size_bytes, port.bps)
        self._push(done, TRANSMISSION_COMPLETE, (port.port_id, packet))

    def _on_transmission_complete(self, port_id: str, packet: Packet) -> None:
        port = self.ports[port_id]
        port.busy = False
        flow = self.flows[packet.flow_id]
        hop = flow.path.index(port_id)  # a path never repeats a port
        arrive = self.now + self.topology.link_delay_ns
        if hop + 1 < len(flow.path):
            self._push(arrive, PACKET_ARRIVAL_AT_PORT, (flow.path[hop + 1], packet))
        else:
            # port_id None = arrival at the destination host itself
            self._push(arrive, PACKET_ARRIVAL_AT_PORT, (None, packet))
        self._start_service(port)  # work conservation

    def _on_packet_arrival(self, port_id: str | None, packet: Packet) -> None:
        if port_id is None:
            self._deliver(packet)
        elif not self._enqueue_at(port_id, packet):
            self._inject(self.flows[packet.flow_id])

    def _deliver(self, packet: Packet) -> None:
        flow = self.flows[packet.flow_id]
        flow.delivered += packet.size_bytes
        if flow.delivered > flow.record.size_bytes:
            raise RuntimeError(f"flow {packet.flow_id} delivered more bytes than it has")
        flow.in_flight -= 1
        flow.progress.sent_bytes = flow.delivered
        self.stfq_tags.pop(packet.packet_id, None)
        if self.delivery_log is not None:
            self.delivery_log.append(packet.packet_id)
        if flow.delivered == flow.record.size_bytes:
            flow.record.completion_ns = self.now
        else:
            self._inject(flow)

    def _on_retransmit_timer(self, flow_id: int, size: int) -> None:
        flow = self.flows[flow_id]
        # retried bytes go to the head so a dropped tail cannot starve
        flow.pending.appendleft(size)
        self._inject(flow)


def run_simulation(
    topology: Topology,
    scheduler_kind: str,
    policy_kind: str,
    workload_stream: list[FlowRecord],
    transport: TransportConfig | None = None,
    until_ns: int | None = None,
    *,
    scheduler_params: dict | None = None,
    rank_quantum: int = DEFAULT_RANK_QUANTUM,
    collect_delivery_log: bool = False,
) -> SimulationResult:
    """Run one deterministic experiment and return flow records + counters.

    `workload_stream` records are copied so callers can reuse the input.
    `until_ns=None` runs until the event queue drains (all flows complete);
    otherwise flows still open at the horizon stay marked unfinished.
    """
    if transport is None:
        transport = TransportConfig.from_topology(topology)
    flows = [
        FlowRecord(r.flow_id, r.src_host, r.dst_host, r.size_bytes, r.arrival_ns)
        for r in workload_stream
    ]
    ids = [f.flow_id for f in flows]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate flow_id in workload stream")
    engine = _Engine(
        topology,
        scheduler_kind,
        policy_kind,
        flows,
        transport,
        until_ns,
        dict(scheduler_params or {}),
        rank_quantum,
        collect_delivery_log,
    )
    return engine.run()
