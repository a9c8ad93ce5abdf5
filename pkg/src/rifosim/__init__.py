"""Deterministic packet-level simulation of admission-based schedulers.

Public surface: scheduler implementations (RIFO and baselines), rank
policies, workload generation, the leaf-spine event simulator, FCT metrics,
and the division-free admission arithmetic emulation.
"""

from .core import (
    MTU,
    FlowRecord,
    Packet,
    QueueCounters,
    QueueState,
    Reason,
    Scheduler,
    SchedulerDecision,
    Verdict,
)
from .dpapprox import (
    ApproxMode,
    FidelityReport,
    admit_crossmul,
    admit_shift,
    fidelity_report,
    round_to_power_of_two,
)
from .metrics import classify, fct_stats, large_flow_throughput
from .netsim import (
    SimulationResult,
    Topology,
    TransportConfig,
    ecmp_route,
    run_simulation,
)
from .policies import FlowProgress, srpt_rank, stfq_rank
from .schedulers import (
    AifoQueue,
    DropTailQueue,
    PifoQueue,
    RifoQueue,
    RifoState,
    SpPifoQueue,
    make_scheduler,
    rifo_admit,
    rifo_normalize,
    rifo_track_update,
)
from .workload import FlowSizeDistribution, generate_arrivals, load_cdf_file

__version__ = "0.1.0"

__all__ = [
    "MTU",
    "AifoQueue",
    "ApproxMode",
    "DropTailQueue",
    "FidelityReport",
    "FlowProgress",
    "FlowRecord",
    "FlowSizeDistribution",
    "Packet",
    "PifoQueue",
    "QueueCounters",
    "QueueState",
    "Reason",
    "RifoQueue",
    "RifoState",
    "Scheduler",
    "SchedulerDecision",
    "SimulationResult",
    "SpPifoQueue",
    "Topology",
    "TransportConfig",
    "Verdict",
    "admit_crossmul",
    "admit_shift",
    "classify",
    "ecmp_route",
    "fct_stats",
    "fidelity_report",
    "generate_arrivals",
    "large_flow_throughput",
    "load_cdf_file",
    "make_scheduler",
    "rifo_admit",
    "rifo_normalize",
    "rifo_track_update",
    "round_to_power_of_two",
    "run_simulation",
    "srpt_rank",
    "stfq_rank",
]
