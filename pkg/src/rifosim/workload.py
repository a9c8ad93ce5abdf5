"""Flow generation: Poisson arrivals at a target load, sizes from an
empirical CDF file, a truncated Pareto, or a uniform range.

All sampling is driven by numpy's PCG64 generator so streams are
bit-identical across platforms for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FlowRecord

PARETO_DEFAULT_MAX_BYTES = 10**9

DISTRIBUTION_KINDS = ("empirical", "pareto", "uniform")


@dataclass(slots=True)
class FlowSizeDistribution:
    """Flow size law. Exactly the fields for `kind` are consulted.

    empirical: cdf_points, a list of (size_bytes, cumulative_prob) strictly
    increasing in both coordinates ending at probability 1. Inverse-transform
    sampling interpolates linearly between points; probability mass at or
    below the first point maps to the first size.
    pareto: classic inverse transform scale / u^(1/shape), truncated at
    max_bytes.
    uniform: integer sizes in [lo, hi].
    """

    kind: str
    cdf_points: list = field(default_factory=list)
    shape: float = 1.05
    scale: float = 1000.0
    max_bytes: int = PARETO_DEFAULT_MAX_BYTES
    lo: int = 1
    hi: int = 1500

    def __post_init__(self) -> None:
        if self.kind not in DISTRIBUTION_KINDS:
            raise ValueError(
                f"unknown distribution kind {self.kind!r}; expected one of {DISTRIBUTION_KINDS}"
            )
        if self.kind == "empirical":
            validate_cdf_points(self.cdf_points)
        elif self.kind == "pareto":
            if self.shape <= 0 or self.scale <= 0:
                raise ValueError("pareto shape and scale must be > 0")
            if self.max_bytes < self.scale:
                raise ValueError("pareto max_bytes must be >= scale")
        else:
            if not 1 <= self.lo <= self.hi:
                raise ValueError("uniform bounds must satisfy 1 <= lo <= hi")

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind == "empirical":
            return _sample_empirical(self.cdf_points, rng.random())
        if self.kind == "pareto":
            # u in (0, 1]: complement of random()'s [0, 1) range
            u = 1.0 - rng.random()
            size = self.scale / u ** (1.0 / self.shape)
            return max(1, int(round(min(size, self.max_bytes))))
        return int(rng.integers(self.lo, self.hi + 1))

    # -- analytic mean -----------------------------------------------------

    def mean(self) -> float:
        """Expected size in bytes, computed from the law (not by sampling)."""
        if self.kind == "empirical":
            points = self.cdf_points
            total = points[0][0] * points[0][1]
            for (s0, p0), (s1, p1) in zip(points, points[1:]):
                # linear inverse CDF => uniform density on each segment
                total += (p1 - p0) * (s0 + s1) / 2
            return total
        if self.kind == "pareto":
            m, a, cap = float(self.scale), float(self.shape), float(self.max_bytes)
            # E[min(X, cap)] for Pareto(shape a, scale m)
            if a == 1.0:
                return m * (1.0 + math.log(cap / m))
            return m + (m / (a - 1.0)) * (1.0 - (m / cap) ** (a - 1.0))
        return (self.lo + self.hi) / 2


def _sample_empirical(points, u: float) -> int:
    if u <= points[0][1]:
        return points[0][0]
    for (s0, p0), (s1, p1) in zip(points, points[1:]):
        if u <= p1:
            frac = (u - p0) / (p1 - p0)
            return int(round(s0 + frac * (s1 - s0)))
    return points[-1][0]


def validate_cdf_points(points) -> None:
    if not points:
        raise ValueError("empirical distribution needs at least one CDF point")
    last_size, last_prob = 0, -1.0
    for size, prob in points:
        if size <= last_size:
            raise ValueError("CDF sizes must be strictly increasing positive integers")
        if prob <= last_prob:
            raise ValueError("CDF probabilities must be strictly increasing")
        if not 0.0 <= prob <= 1.0:
            raise ValueError("CDF probabilities must lie in [0, 1]")
        last_size, last_prob = size, prob
    if last_prob != 1.0:
        raise ValueError("final CDF probability must be exactly 1.0")


def load_cdf_file(path) -> FlowSizeDistribution:
    """Parse a "size_bytes<TAB>cumulative_prob" file ('#' starts a comment).

    Raises ValueError naming the file and 1-based line number on any
    malformed line; global shape problems (ordering, final probability) are
    reported against the file as a whole.
    """
    points: list[tuple[int, float]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'size_bytes<TAB>cumulative_prob', got {raw.rstrip()!r}"
                )
            try:
                size = int(fields[0])
                prob = float(fields[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric field: {exc}") from None
            if size < 1:
                raise ValueError(f"{path}:{lineno}: size_bytes must be >= 1, got {size}")
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"{path}:{lineno}: probability out of [0, 1]: {prob}")
            points.append((size, prob))
    try:
        validate_cdf_points(points)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return FlowSizeDistribution("empirical", cdf_points=points)


def pareto_scale_for_mean(mean_bytes: float, shape: float) -> float:
    """Scale giving an (untruncated) Pareto the requested mean; shape > 1."""
    if shape <= 1:
        raise ValueError("mean is infinite for shape <= 1; pick the scale directly")
    return mean_bytes * (shape - 1) / shape


def generate_arrivals(
    load: float,
    dist: FlowSizeDistribution,
    hosts,
    horizon_ns: int,
    rng: np.random.Generator,
    access_bps: int,
) -> list[FlowRecord]:
    """Poisson flow arrivals per source host at the requested offered load.

    Per-host rate: load * access_bps / (8 * E[size]). Destinations are
    uniform over the other hosts. Hosts are processed in sorted order with a
    single generator, so a fixed (seed, config) pair always yields the same
    stream. Returned records are sorted by arrival time and numbered 0..n-1.
    """
    if not 0 < load <= 1:
        raise ValueError("load must be in (0, 1]")
    if horizon_ns < 1:
        raise ValueError("horizon_ns must be >= 1")
    hosts = sorted(hosts)
    if len(hosts) < 2:
        raise ValueError("need at least two hosts")
    rate_per_ns = load * access_bps / (8.0 * dist.mean()) / 1e9
    raw: list[tuple[int, int, int, int]] = []
    for src in hosts:
        others = [h for h in hosts if h != src]
        t = 0.0
        while True:
            t += rng.exponential(1.0 / rate_per_ns)
            if t > horizon_ns:
                break
            dst = others[int(rng.integers(0, len(others)))]
            size = dist.sample(rng)
            raw.append((int(round(t)), src, dst, size))
    raw.sort(key=lambda r: (r[0], r[1]))
    return [
        FlowRecord(flow_id=i, src_host=src, dst_host=dst, size_bytes=size, arrival_ns=at)
        for i, (at, src, dst, size) in enumerate(raw)
    ]
