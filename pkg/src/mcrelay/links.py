"""Sampling schedules, lag-weight tables, and composite received means.

The detector at each observer sums M equally weighted count samples per
detection interval.  Because emissions happen at interval starts and samples
at fixed offsets, the expected contribution of an emission to a later
interval's sum depends only on the lag between the two intervals.  Those lag
sums are precomputed once per link into a LagWeightTable; every expected
count in the analytics engine is then a short dot product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NodeId, NodeSpec, ProtocolConfig, ProtocolKind, Species
from .physics import observation_probability, self_observation_probability

__all__ = [
    "SampleSchedule",
    "LagWeightTable",
    "LinkTables",
    "build_lag_weights",
    "build_link_tables",
    "cumulative_mean",
    "relay_received_mean",
    "destination_received_mean",
]


@dataclass(frozen=True)
class SampleSchedule:
    m_samples: int
    t0: float
    t_b: float

    def __post_init__(self):
        if self.t0 <= 0 or self.t_b <= 0 or self.m_samples < 1:
            raise ValueError("schedule parameters must be positive")
        if self.m_samples * self.t0 > self.t_b * (1 + 1e-12):
            raise ValueError(
                f"M*t0 = {self.m_samples * self.t0:g} exceeds T_B = {self.t_b:g}")

    def sample_time(self, j: int, m: int) -> float:
        """Absolute time of the m-th sample (1-based) in interval j (1-based)."""
        return (j - 1) * self.t_b + m * self.t0

    def sample_offsets(self) -> np.ndarray:
        """Sample times within one interval, relative to the interval start."""
        return self.t0 * np.arange(1, self.m_samples + 1, dtype=np.float64)


@dataclass(frozen=True)
class LagWeightTable:
    """w[k] = expected per-molecule contribution of an emission to the
    detector sum k whole intervals later: sum_m P_ob(k*T_B + m*t0).

    is_self marks the relay-observes-itself link, which uses the exact
    sphere-integral kernel instead of the uniform-concentration one.
    """

    tx: NodeId
    rx: NodeId
    species: Species
    weights: np.ndarray
    is_self: bool

    def __len__(self) -> int:
        return len(self.weights)


def build_lag_weights(tx_node: NodeSpec, rx_node: NodeSpec, species: Species,
                      schedule: SampleSchedule, num_lags: int,
                      max_lag: int | None = None) -> LagWeightTable:
    """Precompute the lag-weight vector for one directed link.

    num_lags covers the whole transmission (lag 0 .. num_lags-1); no ISI
    truncation happens unless max_lag is given, in which case weights beyond
    it are zeroed (speed-study knob, not the modeled physics).
    """
    if num_lags < 1:
        raise ValueError("need at least one lag")
    is_self = tx_node.id == rx_node.id
    offsets = schedule.sample_offsets()
    lags = np.arange(num_lags, dtype=np.float64)
    times = lags[:, None] * schedule.t_b + offsets[None, :]
    if is_self:
        per_sample = self_observation_probability(
            rx_node.radius, species.diffusion_coefficient, times)
    else:
        dist = tx_node.position.distance_to(rx_node.position)
        per_sample = observation_probability(
            rx_node.volume, species.diffusion_coefficient, dist, times)
    weights = per_sample.sum(axis=1)
    if max_lag is not None and max_lag + 1 < num_lags:
        weights[max_lag + 1:] = 0.0
    weights.flags.writeable = False
    return LagWeightTable(tx=tx_node.id, rx=rx_node.id, species=species,
                          weights=weights, is_self=is_self)


@dataclass(frozen=True)
class LinkTables:
    """All lag tables a protocol needs, keyed by hop."""

    s_to_r: LagWeightTable | None
    r_to_r: LagWeightTable | None
    r_to_d: LagWeightTable | None
    s_to_d: LagWeightTable | None


def build_link_tables(cfg: ProtocolConfig, num_lags: int | None = None,
                      max_lag: int | None = None) -> LinkTables:
    mod = cfg.modulation
    schedule = SampleSchedule(mod.m_samples, mod.t0, mod.t_b)
    k = num_lags if num_lags is not None else cfg.num_intervals
    kind = cfg.kind

    def pair(tx, rx, species):
        return build_lag_weights(tx, rx, species, schedule, k, max_lag)

    if kind is ProtocolKind.BASELINE:
        return LinkTables(s_to_r=None, r_to_r=None, r_to_d=None,
                          s_to_d=pair(cfg.source, cfg.destination,
                                      cfg.hop1_species))
    s_to_r = pair(cfg.source, cfg.relay, cfg.hop1_species)
    r_to_d = pair(cfg.relay, cfg.destination, cfg.hop2_species)
    if kind is ProtocolKind.FD1:
        # relay listens on A1 while emitting A2: no self term, and the
        # destination observes A2 only, so no direct source leak either
        return LinkTables(s_to_r=s_to_r, r_to_r=None, r_to_d=r_to_d, s_to_d=None)
    return LinkTables(
        s_to_r=s_to_r,
        r_to_r=pair(cfg.relay, cfg.relay, cfg.hop2_species),
        r_to_d=r_to_d,
        s_to_d=pair(cfg.source, cfg.destination, cfg.hop1_species),
    )


def cumulative_mean(tx_bits, n_a: float, table: LagWeightTable, j: int) -> float:
    """Expected detector sum at interval j from one link: the emission at
    every interval i <= j contributes bit_i * n_a * w[j - i].
    """
    bits = np.asarray(tx_bits, dtype=np.float64)
    if bits.ndim != 1:
        raise ValueError("tx_bits must be one-dimensional")
    if not 1 <= j <= len(bits):
        raise IndexError(f"interval {j} outside 1..{len(bits)}")
    if len(bits) > len(table.weights):
        raise IndexError("bit sequence longer than the lag table")
    w = table.weights
    return float(n_a * np.dot(bits[:j], w[j - 1::-1][: j]))


def _require(table: LagWeightTable | None, name: str) -> LagWeightTable:
    if table is None:
        raise ValueError(f"protocol has no {name} link")
    return table


def relay_received_mean(source_bits, relay_tx_bits, tables: LinkTables,
                        cfg: ProtocolConfig, j: int) -> float:
    """Expected relay detector sum at interval j: source contribution plus,
    for single-species protocols, the relay's own past and current emissions
    (an emission at the start of interval j already counts at lag 0).
    """
    if not cfg.has_relay:
        raise ValueError("baseline link has no relay")
    mod = cfg.modulation
    total = cumulative_mean(source_bits, mod.n_a1,
                            _require(tables.s_to_r, "S->R"), j)
    if cfg.kind is not ProtocolKind.FD1:
        total += cumulative_mean(relay_tx_bits, mod.n_a1,
                                 _require(tables.r_to_r, "R->R"), j)
    return total


def destination_received_mean(source_bits, relay_tx_bits, tables: LinkTables,
                              cfg: ProtocolConfig, j: int) -> float:
    """Expected destination detector sum at interval j."""
    mod = cfg.modulation
    if cfg.kind is ProtocolKind.BASELINE:
        return cumulative_mean(source_bits, mod.n_a1,
                               _require(tables.s_to_d, "S->D"), j)
    if cfg.kind is ProtocolKind.FD1:
        return cumulative_mean(relay_tx_bits, mod.n_a2,
                               _require(tables.r_to_d, "R->D"), j)
    return (cumulative_mean(source_bits, mod.n_a1,
                            _require(tables.s_to_d, "S->D"), j)
            + cumulative_mean(relay_tx_bits, mod.n_a1,
                              _require(tables.r_to_d, "R->D"), j))
