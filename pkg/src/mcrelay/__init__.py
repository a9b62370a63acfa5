"""Two-hop molecular-communication relay analysis.

Bit-error probabilities of diffusion-based relay protocols (full-duplex
with one or two molecule species, half-duplex, adaptive-threshold
full-duplex, and a direct-transmission baseline) computed two independent
ways: closed-form Poisson detection analytics and a particle-based Brownian
simulator.  The two paths share only the configuration types, so each
validates the other.
"""

from .analytics import (DecisionContext, ThresholdSweepResult,
                        adaptive_threshold, enumerate_relay_average,
                        enumerate_sequence_average, expected_error_stats,
                        optimal_threshold_search, sample_relay_decision,
                        single_hop_error_prob, two_hop_error_prob)
from .links import (LagWeightTable, LinkTables, SampleSchedule,
                    build_lag_weights, build_link_tables, cumulative_mean,
                    destination_received_mean, relay_received_mean)
from .model import (ErrorStats, ModulationConfig, NodeId, NodeSpec,
                    ProtocolConfig, ProtocolKind, Species, SpeciesId, Vec3,
                    Violation, default_two_hop_config, validate_config)
from .physics import (observation_probability, point_source_concentration,
                      poisson_cdf_below, self_observation_probability)
from .protocols import (BitTimeline, IntervalAction, build_schedule,
                        interval_source_bits, relay_emission_intervals,
                        relay_forward)
from .simulation import (CountStatistics, MoleculePool, RealizationResult,
                         SimConfig, brownian_step, count_in_sphere,
                         count_statistics, emit, estimate_error,
                         estimate_error_sweep, run_realization)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
