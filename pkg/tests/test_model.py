"""Domain types, reference configuration, and validation rules."""

import math
from dataclasses import replace

import numpy as np
import pytest

import reference_values as ref
from mcrelay.model import (
    ErrorStats,
    ModulationConfig,
    NodeId,
    NodeSpec,
    ProtocolKind,
    Species,
    SpeciesId,
    Vec3,
    default_two_hop_config,
    validate_config,
)

ALL_KINDS = list(ProtocolKind)
RELAYED_KINDS = [k for k in ALL_KINDS if k is not ProtocolKind.BASELINE]


class TestVec3:
    def test_distance(self):
        assert Vec3(0, 0, 0).distance_to(Vec3(3, 4, 0)) == pytest.approx(5.0)

    def test_as_array(self):
        np.testing.assert_array_equal(Vec3(1.0, 2.0, 3.0).as_array(),
                                      [1.0, 2.0, 3.0])

    def test_is_finite(self):
        assert Vec3(0, 0, 0).is_finite()
        assert not Vec3(math.nan, 0, 0).is_finite()
        assert not Vec3(0, math.inf, 0).is_finite()


class TestNodeSpec:
    def test_volume_matches_frozen_reference(self):
        node = NodeSpec(NodeId.R, Vec3(0, 0, 0), radius=45e-9)
        assert node.volume == pytest.approx(ref.V_OBS_45NM, rel=1e-12)

    def test_point_source_has_zero_volume(self):
        assert NodeSpec(NodeId.S, Vec3(0, 0, 0), radius=0.0).volume == 0.0


class TestDefaultTwoHopConfig:
    def test_reference_geometry(self):
        cfg = default_two_hop_config(ProtocolKind.FD2)
        assert cfg.source.position == Vec3(0.0, 0.0, 0.0)
        assert cfg.relay.position == Vec3(300e-9, 0.0, 0.0)
        assert cfg.destination.position == Vec3(600e-9, 0.0, 0.0)
        assert cfg.relay.radius == pytest.approx(45e-9)
        assert cfg.destination.radius == pytest.approx(45e-9)
        assert cfg.source.radius == 0.0
        assert cfg.species_a1.diffusion_coefficient == pytest.approx(4.365e-10)

    def test_molecule_budget_doubles_without_relay(self):
        relayed = default_two_hop_config(ProtocolKind.FD1)
        direct = default_two_hop_config(ProtocolKind.BASELINE)
        assert relayed.modulation.n_a1 == 5000
        assert direct.modulation.n_a1 == 10000
        assert direct.relay is None

    def test_accepts_kind_by_name(self):
        cfg = default_two_hop_config("FD-Adp")
        assert cfg.kind is ProtocolKind.FDADP

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_defaults_validate(self, kind):
        cfg = default_two_hop_config(kind)
        assert validate_config(cfg) is cfg


class TestProtocolConfigProperties:
    def test_interval_counts_per_kind(self):
        l_bits = 7
        counts = {
            ProtocolKind.FD1: l_bits + 1,
            ProtocolKind.FD2: l_bits + 1,
            ProtocolKind.FDADP: l_bits + 1,
            ProtocolKind.HD: 2 * l_bits,
            ProtocolKind.BASELINE: l_bits,
        }
        for kind, expected in counts.items():
            cfg = default_two_hop_config(kind, l_bits=l_bits)
            assert cfg.num_intervals == expected

    def test_split_species_only_for_dual_molecule_relay(self):
        for kind in ALL_KINDS:
            cfg = default_two_hop_config(kind)
            assert cfg.hop1_species.id is SpeciesId.A1
            expected = SpeciesId.A2 if kind is ProtocolKind.FD1 else SpeciesId.A1
            assert cfg.hop2_species.id is expected

    def test_has_relay(self):
        for kind in ALL_KINDS:
            cfg = default_two_hop_config(kind)
            assert cfg.has_relay is (kind is not ProtocolKind.BASELINE)

    def test_with_thresholds(self):
        cfg = default_two_hop_config(ProtocolKind.FD1, xi_r=20.0, xi_d=20.0)
        both = cfg.with_thresholds(xi_r=7.0, xi_d=9.0)
        assert (both.xi_r, both.xi_d) == (7.0, 9.0)
        only_d = cfg.with_thresholds(xi_d=3.0)
        assert (only_d.xi_r, only_d.xi_d) == (20.0, 3.0)
        assert (cfg.xi_r, cfg.xi_d) == (20.0, 20.0)  # original untouched


def _violation_fields(result):
    assert isinstance(result, list) and result
    return {v.field_name for v in result}


class TestValidateConfig:
    def test_relayed_kind_requires_relay_node(self):
        cfg = replace(default_two_hop_config(ProtocolKind.FD2), relay=None)
        assert "relay" in _violation_fields(validate_config(cfg))

    def test_baseline_rejects_relay_node(self):
        relayed = default_two_hop_config(ProtocolKind.FD2)
        cfg = replace(default_two_hop_config(ProtocolKind.BASELINE),
                      relay=relayed.relay)
        assert "relay" in _violation_fields(validate_config(cfg))

    def test_observers_need_positive_radius(self):
        cfg = default_two_hop_config(ProtocolKind.FD2)
        bad = replace(cfg, destination=replace(cfg.destination, radius=0.0))
        assert "D.radius" in _violation_fields(validate_config(bad))

    def test_nonfinite_position(self):
        cfg = default_two_hop_config(ProtocolKind.BASELINE)
        bad = replace(cfg, source=replace(cfg.source,
                                          position=Vec3(math.nan, 0, 0)))
        assert "S.position" in _violation_fields(validate_config(bad))

    def test_sampling_must_fit_in_interval(self):
        cfg = default_two_hop_config(ProtocolKind.FD1, t_b=80e-6,
                                     m_samples=5, t0=20e-6)
        assert "modulation.m_samples" in _violation_fields(validate_config(cfg))

    def test_modulation_ranges(self):
        cfg = default_two_hop_config(ProtocolKind.FD1)
        mod = cfg.modulation
        bad = replace(cfg, modulation=replace(mod, p1=1.5))
        assert "modulation.p1" in _violation_fields(validate_config(bad))
        bad = replace(cfg, modulation=replace(mod, l_bits=0))
        assert "modulation.l_bits" in _violation_fields(validate_config(bad))
        bad = replace(cfg, modulation=replace(mod, n_a1=-5))
        assert "modulation.n_a1" in _violation_fields(validate_config(bad))
        bad = replace(cfg, modulation=replace(mod, t_b=0.0))
        assert "modulation.t_b" in _violation_fields(validate_config(bad))
        bad = replace(cfg, modulation=replace(mod, m_samples=0))
        assert "modulation.m_samples" in _violation_fields(validate_config(bad))

    def test_threshold_ranges(self):
        cfg = default_two_hop_config(ProtocolKind.FD1)
        bad = cfg.with_thresholds(xi_r=-1.0)
        assert "xi_r" in _violation_fields(validate_config(bad))
        bad = cfg.with_thresholds(xi_d=math.inf)
        assert "xi_d" in _violation_fields(validate_config(bad))

    def test_species_identity_and_diffusion(self):
        cfg = default_two_hop_config(ProtocolKind.FD1)
        swapped = replace(cfg, species_a1=Species(SpeciesId.A2, 4.365e-10))
        assert "species_a1.id" in _violation_fields(validate_config(swapped))
        dead = replace(cfg, species_a2=Species(SpeciesId.A2, 0.0))
        assert "species_a2.diffusion_coefficient" in \
            _violation_fields(validate_config(dead))

    def test_collects_multiple_violations(self):
        cfg = default_two_hop_config(ProtocolKind.FD2)
        bad = replace(cfg.with_thresholds(xi_r=-1.0),
                      modulation=replace(cfg.modulation, p1=-0.2, l_bits=0))
        fields = _violation_fields(validate_config(bad))
        assert {"xi_r", "modulation.p1", "modulation.l_bits"} <= fields

    def test_violation_str_mentions_field_and_value(self):
        cfg = default_two_hop_config(ProtocolKind.FD1).with_thresholds(xi_r=-2.0)
        violation = validate_config(cfg)[0]
        text = str(violation)
        assert "xi_r" in text and "-2.0" in text


class TestErrorStats:
    def test_standard_error_inverts_the_95_percent_halfwidth(self):
        stats = ErrorStats(per_bit_error=np.array([0.1, 0.2]),
                           average_error=0.15, num_realizations=100,
                           ci_halfwidth=0.0392)
        assert stats.standard_error() == pytest.approx(0.0392 / 1.959963984540054)


class TestModulationConfig:
    def test_prior_complement(self):
        mod = ModulationConfig(t_b=4e-4, m_samples=5, t0=2e-5, n_a1=5000,
                               n_a2=5000, p1=0.3, l_bits=10)
        assert mod.p0 == pytest.approx(0.7)
