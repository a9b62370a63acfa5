"""Domain types and configuration validation.

Everything is an immutable value object in SI base units; nm and us exist
only at the CLI boundary.  Thresholds are real-valued even though observed
counts are integers, because the adaptive relay threshold adds a real
expected-count correction to the fixed part.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Vec3",
    "SpeciesId",
    "Species",
    "NodeId",
    "NodeSpec",
    "ModulationConfig",
    "ProtocolKind",
    "ProtocolConfig",
    "ErrorStats",
    "Violation",
    "validate_config",
    "default_two_hop_config",
]


class SpeciesId(enum.Enum):
    A1 = "A1"
    A2 = "A2"


class NodeId(enum.Enum):
    S = "S"
    R = "R"
    D = "D"


class ProtocolKind(enum.Enum):
    """Relaying protocol taxonomy.

    FD1: full-duplex, relay receives species A1 and emits A2, fixed threshold.
    FD2: full-duplex, single species A1 on both hops, fixed threshold.
    HD: half-duplex, single species, source uses odd intervals and the relay
        even ones, fixed threshold.
    FDADP: FD2 with the relay threshold raised by the expected
        self-interference count each interval.
    BASELINE: direct source-to-destination link, no relay.
    """

    FD1 = "FD1"
    FD2 = "FD2"
    HD = "HD"
    FDADP = "FD-Adp"
    BASELINE = "Baseline"


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def distance_to(self, other: "Vec3") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.x, self.y, self.z)))


@dataclass(frozen=True)
class Species:
    id: SpeciesId
    diffusion_coefficient: float  # m^2/s


@dataclass(frozen=True)
class NodeSpec:
    id: NodeId
    position: Vec3
    radius: float = 0.0  # m; 0 for the point-source transmitter

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3


@dataclass(frozen=True)
class ModulationConfig:
    t_b: float  # bit interval, s
    m_samples: int  # samples per detection interval
    t0: float  # inter-sample time, s
    n_a1: int  # molecules released per 1-bit, species A1
    n_a2: int  # species A2 (used by FD1 relay emissions only)
    p1: float  # prior probability of an information bit being 1
    l_bits: int  # information sequence length

    @property
    def p0(self) -> float:
        return 1.0 - self.p1


@dataclass(frozen=True)
class ProtocolConfig:
    kind: ProtocolKind
    source: NodeSpec
    destination: NodeSpec
    species_a1: Species
    species_a2: Species
    modulation: ModulationConfig
    relay: NodeSpec | None = None
    xi_r: float = 0.0  # relay threshold; fixed part when kind = FDADP
    xi_d: float = 0.0  # destination threshold

    @property
    def has_relay(self) -> bool:
        return self.kind is not ProtocolKind.BASELINE

    @property
    def num_intervals(self) -> int:
        """Total bit intervals K for an L-bit information sequence."""
        l_bits = self.modulation.l_bits
        if self.kind is ProtocolKind.BASELINE:
            return l_bits
        if self.kind is ProtocolKind.HD:
            return 2 * l_bits
        return l_bits + 1

    @property
    def hop1_species(self) -> Species:
        """Species carrying source emissions (detected by relay/destination)."""
        return self.species_a1

    @property
    def hop2_species(self) -> Species:
        """Species carried by relay emissions."""
        if self.kind is ProtocolKind.FD1:
            return self.species_a2
        return self.species_a1

    def with_thresholds(self, xi_r: float | None = None,
                        xi_d: float | None = None) -> "ProtocolConfig":
        out = self
        if xi_r is not None:
            out = replace(out, xi_r=xi_r)
        if xi_d is not None:
            out = replace(out, xi_d=xi_d)
        return out


@dataclass(frozen=True)
class ErrorStats:
    """Per-bit and average bit-error probabilities from either engine.

    ci_halfwidth is the 95% Monte Carlo half-width of average_error, taken
    over independent realizations (simulation) or drawn source sequences
    (analytics).  average_error is always the plain mean of per_bit_error.
    """

    per_bit_error: np.ndarray
    average_error: float
    num_realizations: int
    ci_halfwidth: float

    def standard_error(self) -> float:
        return self.ci_halfwidth / 1.959963984540054


@dataclass(frozen=True)
class Violation:
    field_name: str
    message: str
    value: object = field(default=None)

    def __str__(self) -> str:
        return f"{self.field_name}: {self.message} (got {self.value!r})"


def _check_node(out: list[Violation], node: NodeSpec, want_observer: bool) -> None:
    if not node.position.is_finite():
        out.append(Violation(f"{node.id.value}.position", "must be finite",
                             node.position))
    if node.radius < 0:
        out.append(Violation(f"{node.id.value}.radius", "must be nonnegative",
                             node.radius))
    if want_observer and node.radius <= 0:
        out.append(Violation(f"{node.id.value}.radius",
                             "observer needs a positive radius", node.radius))
    expected = 4.0 / 3.0 * math.pi * node.radius**3
    if not math.isclose(node.volume, expected, rel_tol=1e-12, abs_tol=0.0) \
            and not (node.volume == 0.0 and expected == 0.0):
        out.append(Violation(f"{node.id.value}.volume",
                             "inconsistent with radius", node.volume))


def validate_config(cfg: ProtocolConfig):
    """Return ``cfg`` unchanged if every invariant holds, otherwise the list
    of violations.  Never raises; callers branch on ``isinstance(..., list)``.
    """
    v: list[Violation] = []
    if not isinstance(cfg.kind, ProtocolKind):
        v.append(Violation("kind", "unknown protocol", cfg.kind))
        return v
    _check_node(v, cfg.source, want_observer=False)
    _check_node(v, cfg.destination, want_observer=True)
    if cfg.has_relay:
        if cfg.relay is None:
            v.append(Violation("relay", "protocol requires a relay node", None))
        else:
            _check_node(v, cfg.relay, want_observer=True)
    elif cfg.relay is not None:
        v.append(Violation("relay", "baseline link must not have a relay",
                           cfg.relay.id))

    for sp, name in ((cfg.species_a1, "species_a1"), (cfg.species_a2, "species_a2")):
        if sp.diffusion_coefficient <= 0:
            v.append(Violation(f"{name}.diffusion_coefficient",
                               "must be positive", sp.diffusion_coefficient))
    if cfg.species_a1.id is not SpeciesId.A1:
        v.append(Violation("species_a1.id", "must be A1", cfg.species_a1.id))
    if cfg.species_a2.id is not SpeciesId.A2:
        v.append(Violation("species_a2.id", "must be A2", cfg.species_a2.id))

    mod = cfg.modulation
    if mod.t0 <= 0:
        v.append(Violation("modulation.t0", "must be positive", mod.t0))
    if mod.t_b <= 0:
        v.append(Violation("modulation.t_b", "must be positive", mod.t_b))
    if mod.m_samples < 1:
        v.append(Violation("modulation.m_samples", "need at least one sample",
                           mod.m_samples))
    if mod.t0 > 0 and mod.t_b > 0 and mod.m_samples * mod.t0 > mod.t_b * (1 + 1e-12):
        v.append(Violation("modulation.m_samples",
                           "sampling must fit in the bit interval "
                           f"(M*t0 = {mod.m_samples * mod.t0:g} > T_B = {mod.t_b:g})",
                           mod.m_samples))
    if not 0.0 <= mod.p1 <= 1.0:
        v.append(Violation("modulation.p1", "probability out of range", mod.p1))
    if mod.l_bits < 1:
        v.append(Violation("modulation.l_bits", "need at least one bit",
                           mod.l_bits))
    for n, name in ((mod.n_a1, "n_a1"), (mod.n_a2, "n_a2")):
        if n < 0:
            v.append(Violation(f"modulation.{name}", "must be nonnegative", n))
    for xi, name in ((cfg.xi_r, "xi_r"), (cfg.xi_d, "xi_d")):
        if xi < 0 or not math.isfinite(xi):
            v.append(Violation(name, "threshold must be finite and nonnegative", xi))
    return v if v else cfg


# reference geometry: observers of 45 nm radius, destination 600 nm from the
# source, relay (when present) halfway between, equal diffusion coefficients
_DEFAULT_D = 4.365e-10
_DEFAULT_RADIUS = 45e-9
_DEFAULT_X_D = 600e-9


def default_two_hop_config(kind: ProtocolKind,
                           t_b: float = 200e-6,
                           m_samples: int = 5,
                           t0: float = 20e-6,
                           l_bits: int = 50,
                           p1: float = 0.5,
                           xi_r: float = 20.0,
                           xi_d: float = 20.0,
                           diffusion: float = _DEFAULT_D) -> ProtocolConfig:
    """Reference two-hop setup: S at the origin, D on the x-axis at 600 nm,
    R at the midpoint; 5000 molecules per emission for relayed kinds, 10000
    for the direct baseline (double budget, single hop).

    The default thresholds are plausible mid-curve values, not optimal ones;
    sweep or search to optimize.
    """
    if not isinstance(kind, ProtocolKind):
        kind = ProtocolKind(kind)
    baseline = kind is ProtocolKind.BASELINE
    n_a = 10000 if baseline else 5000
    mod = ModulationConfig(t_b=t_b, m_samples=m_samples, t0=t0,
                           n_a1=n_a, n_a2=n_a, p1=p1, l_bits=l_bits)
    return ProtocolConfig(
        kind=kind,
        source=NodeSpec(NodeId.S, Vec3(0.0, 0.0, 0.0), radius=0.0),
        relay=None if baseline else NodeSpec(
            NodeId.R, Vec3(_DEFAULT_X_D / 2, 0.0, 0.0), radius=_DEFAULT_RADIUS),
        destination=NodeSpec(NodeId.D, Vec3(_DEFAULT_X_D, 0.0, 0.0),
                             radius=_DEFAULT_RADIUS),
        species_a1=Species(SpeciesId.A1, diffusion),
        species_a2=Species(SpeciesId.A2, diffusion),
        modulation=mod,
        xi_r=xi_r,
        xi_d=xi_d,
    )
