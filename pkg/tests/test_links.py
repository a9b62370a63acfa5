"""Lag-weight tables and composite received means against frozen references.

The frozen W_* constants are per-lag detector-sum weights (summed over the
M samples of one interval) computed with 50-digit arithmetic for the
reference geometry; the composite-mean tests then check that the table
machinery assembles them into the right ISI sums.
"""

import numpy as np
import pytest

import reference_values as ref
from helpers import two_hop
from mcrelay.links import (
    SampleSchedule,
    build_lag_weights,
    build_link_tables,
    cumulative_mean,
    destination_received_mean,
    relay_received_mean,
)
from mcrelay.model import NodeId, ProtocolKind

REL = 1e-12


class TestSampleSchedule:
    def test_sample_times(self):
        sched = SampleSchedule(m_samples=5, t0=20e-6, t_b=200e-6)
        assert sched.sample_time(1, 1) == pytest.approx(20e-6)
        assert sched.sample_time(1, 5) == pytest.approx(100e-6)
        assert sched.sample_time(3, 2) == pytest.approx(2 * 200e-6 + 40e-6)

    def test_sample_offsets(self):
        sched = SampleSchedule(m_samples=3, t0=10e-6, t_b=400e-6)
        np.testing.assert_allclose(sched.sample_offsets(),
                                   [10e-6, 20e-6, 30e-6])

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            SampleSchedule(m_samples=0, t0=20e-6, t_b=200e-6)
        with pytest.raises(ValueError):
            SampleSchedule(m_samples=5, t0=0.0, t_b=200e-6)
        with pytest.raises(ValueError):
            # five samples of 50 us cannot fit into a 200 us interval
            SampleSchedule(m_samples=5, t0=50e-6, t_b=200e-6)

    def test_samples_exactly_filling_interval_are_allowed(self):
        SampleSchedule(m_samples=10, t0=20e-6, t_b=200e-6)


class TestBuildLagWeights:
    @pytest.mark.parametrize("t_b,tag", [(200e-6, "TB200"), (400e-6, "TB400")])
    def test_pair_link_reference_values(self, t_b, tag):
        cfg = two_hop(ProtocolKind.FD2, t_b=t_b)
        sched = SampleSchedule(5, 20e-6, t_b)
        table = build_lag_weights(cfg.source, cfg.relay, cfg.species_a1,
                                  sched, num_lags=4)
        assert not table.is_self
        assert (table.tx, table.rx) == (NodeId.S, NodeId.R)
        for lag in range(4):
            expected = getattr(ref, f"W_SR_{tag}_LAG{lag}")
            assert table.weights[lag] == pytest.approx(expected, rel=REL)

        far = build_lag_weights(cfg.source, cfg.destination, cfg.species_a1,
                                sched, num_lags=4)
        for lag in range(4):
            expected = getattr(ref, f"W_SD_{tag}_LAG{lag}")
            assert far.weights[lag] == pytest.approx(expected, rel=REL)

    @pytest.mark.parametrize("t_b,tag", [(200e-6, "TB200"), (400e-6, "TB400")])
    def test_self_link_reference_values(self, t_b, tag):
        cfg = two_hop(ProtocolKind.FD2, t_b=t_b)
        sched = SampleSchedule(5, 20e-6, t_b)
        table = build_lag_weights(cfg.relay, cfg.relay, cfg.species_a1,
                                  sched, num_lags=4)
        assert table.is_self
        for lag in range(4):
            expected = getattr(ref, f"W_RR_{tag}_LAG{lag}")
            assert table.weights[lag] == pytest.approx(expected, rel=REL)

    def test_denser_sampling_reference_value(self):
        cfg = two_hop(ProtocolKind.FD1, t_b=200e-6)
        sched = SampleSchedule(10, 10e-6, 200e-6)
        table = build_lag_weights(cfg.source, cfg.relay, cfg.species_a1,
                                  sched, num_lags=2)
        assert table.weights[0] == pytest.approx(ref.W_SR_TB200_M10_T10_LAG0,
                                                 rel=REL)

    def test_max_lag_zeroes_the_tail_only(self):
        cfg = two_hop(ProtocolKind.FD2)
        sched = SampleSchedule(5, 20e-6, 400e-6)
        full = build_lag_weights(cfg.source, cfg.relay, cfg.species_a1,
                                 sched, num_lags=6)
        cut = build_lag_weights(cfg.source, cfg.relay, cfg.species_a1,
                                sched, num_lags=6, max_lag=2)
        np.testing.assert_array_equal(cut.weights[:3], full.weights[:3])
        assert np.all(cut.weights[3:] == 0.0)

    def test_weights_are_frozen(self):
        cfg = two_hop(ProtocolKind.FD2)
        sched = SampleSchedule(5, 20e-6, 400e-6)
        table = build_lag_weights(cfg.source, cfg.relay, cfg.species_a1,
                                  sched, num_lags=3)
        with pytest.raises(ValueError):
            table.weights[0] = 0.0

    def test_rejects_empty_table(self):
        cfg = two_hop(ProtocolKind.FD2)
        sched = SampleSchedule(5, 20e-6, 400e-6)
        with pytest.raises(ValueError):
            build_lag_weights(cfg.source, cfg.relay, cfg.species_a1, sched,
                              num_lags=0)


class TestBuildLinkTables:
    def test_split_species_protocol_has_no_self_or_leak_terms(self):
        tables = build_link_tables(two_hop(ProtocolKind.FD1))
        assert tables.s_to_r is not None and tables.r_to_d is not None
        assert tables.r_to_r is None and tables.s_to_d is None
        # the relay-destination hop rides the second species
        assert tables.r_to_d.species.id.value == "A2"

    @pytest.mark.parametrize("kind", [ProtocolKind.FD2, ProtocolKind.FDADP,
                                      ProtocolKind.HD])
    def test_single_species_protocols_carry_all_four_links(self, kind):
        tables = build_link_tables(two_hop(kind))
        assert None not in (tables.s_to_r, tables.r_to_r, tables.r_to_d,
                            tables.s_to_d)
        assert tables.r_to_r.is_self

    def test_baseline_has_only_the_direct_link(self):
        tables = build_link_tables(two_hop(ProtocolKind.BASELINE))
        assert tables.s_to_d is not None
        assert (tables.s_to_r, tables.r_to_r, tables.r_to_d) == (None,) * 3

    def test_default_length_covers_every_interval(self):
        cfg = two_hop(ProtocolKind.HD, l_bits=4)
        tables = build_link_tables(cfg)
        assert len(tables.s_to_r) == cfg.num_intervals == 8

    def test_symmetric_hops_share_weights(self):
        # S->R and R->D are both 300 nm on the same species for FD2
        tables = build_link_tables(two_hop(ProtocolKind.FD2))
        np.testing.assert_allclose(tables.s_to_r.weights,
                                   tables.r_to_d.weights, rtol=REL)


class TestCumulativeMean:
    def test_hand_assembled_isi_sum(self):
        cfg = two_hop(ProtocolKind.FD2, t_b=400e-6)
        tables = build_link_tables(cfg)
        w = tables.s_to_r.weights
        bits = [1, 0, 1]
        expected = 5000 * (bits[0] * w[2] + bits[1] * w[1] + bits[2] * w[0])
        assert cumulative_mean(bits, 5000, tables.s_to_r, 3) == \
            pytest.approx(expected, rel=REL)

    def test_first_interval_reference_value(self):
        cfg = two_hop(ProtocolKind.FD2, t_b=200e-6)
        tables = build_link_tables(cfg)
        assert cumulative_mean([1], 5000, tables.s_to_r, 1) == \
            pytest.approx(ref.MU_RELAY_J1, rel=REL)

    def test_bounds_checking(self):
        cfg = two_hop(ProtocolKind.FD2, l_bits=3)
        tables = build_link_tables(cfg)
        with pytest.raises(IndexError):
            cumulative_mean([1, 0], 5000, tables.s_to_r, 3)
        with pytest.raises(IndexError):
            cumulative_mean([1, 0], 5000, tables.s_to_r, 0)
        too_long = np.ones(len(tables.s_to_r) + 1)
        with pytest.raises(IndexError):
            cumulative_mean(too_long, 5000, tables.s_to_r, 1)
        with pytest.raises(ValueError):
            cumulative_mean(np.ones((2, 2)), 5000, tables.s_to_r, 1)


class TestCompositeMeans:
    def test_relay_mean_adds_self_interference_for_shared_species(self):
        cfg = two_hop(ProtocolKind.FD2, t_b=400e-6)
        tables = build_link_tables(cfg)
        w_s, w_r = [1, 0, 1], [0, 1, 1]
        got = relay_received_mean(w_s, w_r, tables, cfg, 3)
        expected = (cumulative_mean(w_s, 5000, tables.s_to_r, 3)
                    + cumulative_mean(w_r, 5000, tables.r_to_r, 3))
        assert got == pytest.approx(expected, rel=REL)

    def test_relay_mean_ignores_own_molecules_when_species_split(self):
        cfg = two_hop(ProtocolKind.FD1, t_b=400e-6)
        tables = build_link_tables(cfg)
        silent = relay_received_mean([1, 0, 1], [0, 0, 0], tables, cfg, 3)
        loud = relay_received_mean([1, 0, 1], [1, 1, 1], tables, cfg, 3)
        assert loud == pytest.approx(silent, rel=REL)

    def test_destination_mean_combines_relay_and_source_leak(self):
        cfg = two_hop(ProtocolKind.FD2, t_b=400e-6)
        tables = build_link_tables(cfg)
        w_s, w_r = [1, 1, 0], [0, 1, 0]
        got = destination_received_mean(w_s, w_r, tables, cfg, 3)
        expected = (cumulative_mean(w_s, 5000, tables.s_to_d, 3)
                    + cumulative_mean(w_r, 5000, tables.r_to_d, 3))
        assert got == pytest.approx(expected, rel=REL)

    def test_destination_mean_split_species_sees_relay_only(self):
        cfg = two_hop(ProtocolKind.FD1, t_b=400e-6)
        tables = build_link_tables(cfg)
        w_r = [0, 1, 1]
        for w_s in ([0, 0, 0], [1, 1, 1]):
            got = destination_received_mean(w_s, w_r, tables, cfg, 3)
            expected = cumulative_mean(w_r, cfg.modulation.n_a2,
                                       tables.r_to_d, 3)
            assert got == pytest.approx(expected, rel=REL)

    def test_baseline_destination_mean(self):
        cfg = two_hop(ProtocolKind.BASELINE, t_b=400e-6)
        tables = build_link_tables(cfg)
        got = destination_received_mean([1, 0, 1], None, tables, cfg, 3)
        expected = cumulative_mean([1, 0, 1], 10000, tables.s_to_d, 3)
        assert got == pytest.approx(expected, rel=REL)

    def test_baseline_has_no_relay_mean(self):
        cfg = two_hop(ProtocolKind.BASELINE)
        tables = build_link_tables(cfg)
        with pytest.raises(ValueError):
            relay_received_mean([1], [0], tables, cfg, 1)
