"""Closed-form expected error probabilities.

Counts at each observer are Poisson with a mean that is a lag-weighted sum
of all earlier emissions, so every conditional decision-error probability is
a Poisson tail evaluated at the composite mean.  The per-bit error of the
relayed link marginalizes the current source bit and the relay's forwarding
of it into four terms (relay wrong/right x destination below/above
threshold); everything earlier is conditioned on realized history: the drawn
source bits, and one sampled realization of the relay's decision sequence
obtained by biased coin tosses.  Averaging over drawn source sequences gives
the expected error.

The coin toss realizing each relay decision is biased by the conditional
error probability given the actual current source bit (miss probability for
a 1, false-alarm probability for a 0), not by the bit-marginal error.  The
distinction matters only when the relay's decisions feed back into its own
counts: with fixed-threshold single-species relaying, strong lag-0
self-interference makes detection nearly deterministic given the previous
decision, and the bit-conditional law preserves that lock-in (matching the
particle simulator and the published behavior of the fixed-threshold
full-duplex curve) while a bit-marginal flip would erase it.

Two implementations of the same recursion live here on purpose: a scalar,
readable one (DecisionContext + the per-bit operations) and a vectorized one
used by expected_error_stats that processes all sequences of a Monte Carlo
batch at once.  They are cross-checked in the tests.

Conditioning conventions (fixed here, used identically by the simulator):
  * the relay's emission at the start of interval j contributes to interval
    j's own samples at lag 0, and the adaptive threshold compensates exactly
    the expected value of that self contribution given the relay's realized
    transmissions;
  * the direct source-to-destination leak term conditions only on source
    bits strictly before the bit under test; the current and later source
    emissions are not part of the destination's conditioning set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .links import (LinkTables, build_link_tables, destination_received_mean,
                    relay_received_mean)
from .model import ErrorStats, ProtocolConfig, ProtocolKind
from .physics import poisson_cdf_below, poisson_cdf_below_array
from .protocols import IntervalAction, build_schedule, interval_source_bits

__all__ = [
    "DecisionContext",
    "relay_tail_probs",
    "single_hop_error_prob",
    "adaptive_threshold",
    "sample_relay_decision",
    "two_hop_error_prob",
    "expected_error_stats",
    "optimal_threshold_search",
    "ThresholdSweepResult",
    "enumerate_relay_average",
    "enumerate_sequence_average",
]

_Z95 = 1.959963984540054

ENUMERATION_MAX_BITS = 12


# ---------------------------------------------------------------------------
# scalar reference implementation


@dataclass
class DecisionContext:
    """Realized history for one sequence: configuration, lag tables, the
    drawn source information bits, and the relay detections sampled so far
    (keyed by detection interval)."""

    cfg: ProtocolConfig
    tables: LinkTables
    actions: tuple[IntervalAction, ...]
    info_bits: np.ndarray
    hat_w_r: dict[int, int] = field(default_factory=dict)

    @classmethod
    def create(cls, cfg: ProtocolConfig, info_bits,
               tables: LinkTables | None = None) -> "DecisionContext":
        info = np.asarray(info_bits, dtype=np.int64)
        if info.shape != (cfg.modulation.l_bits,):
            raise ValueError(
                f"expected {cfg.modulation.l_bits} information bits, got {info.shape}")
        if tables is None:
            tables = build_link_tables(cfg)
        return cls(cfg=cfg, tables=tables,
                   actions=build_schedule(cfg.kind, cfg.modulation.l_bits),
                   info_bits=info)

    def source_interval_bits(self) -> np.ndarray:
        return interval_source_bits(self.actions, self.info_bits)

    def relay_tx_bits(self, upto_interval: int) -> np.ndarray:
        """Realized relay emissions W_R[1..upto_interval]; needs every
        feeding detection to have been sampled already."""
        w_r = np.zeros(upto_interval, dtype=np.int64)
        for a in self.actions[:upto_interval]:
            src = a.relay_emits_detected_from
            if src is None:
                continue
            if src not in self.hat_w_r:
                raise ValueError(
                    f"relay emission at interval {a.j} needs the undetected "
                    f"interval {src}; sample decisions in order")
            w_r[a.j - 1] = self.hat_w_r[src]
        return w_r


def _action_at(ctx: DecisionContext, j: int) -> IntervalAction:
    if not 1 <= j <= len(ctx.actions):
        raise IndexError(f"interval {j} outside schedule of {len(ctx.actions)}")
    return ctx.actions[j - 1]


def _source_history_bits(ctx: DecisionContext, j: int,
                         current_info: int | None) -> np.ndarray:
    """Per-interval source emissions with the current information bit and
    everything after it zeroed (they are hypothesized or unconditioned)."""
    w_s = ctx.source_interval_bits()[:j].copy()
    if current_info is not None:
        for a in ctx.actions:
            if (a.source_emits_info is not None
                    and a.source_emits_info >= current_info and a.j <= j):
                w_s[a.j - 1] = 0
    return w_s


def adaptive_threshold(ctx: DecisionContext, j: int) -> float:
    """Relay threshold at detection interval j for the adaptive protocol:
    fixed part plus the expected count of the relay's own molecules given
    its realized transmissions up to and including interval j."""
    if ctx.tables.r_to_r is None:
        raise ValueError(f"{ctx.cfg.kind.value} has no self link to adapt to")
    w_r = ctx.relay_tx_bits(j)
    w = ctx.tables.r_to_r.weights
    xi_exp = ctx.cfg.modulation.n_a1 * float(
        np.dot(w_r, w[j - 1::-1][: j]))
    return ctx.cfg.xi_r + xi_exp


def _relay_threshold(ctx: DecisionContext, j: int) -> float:
    if ctx.cfg.kind is ProtocolKind.FDADP:
        return adaptive_threshold(ctx, j)
    return ctx.cfg.xi_r


def relay_tail_probs(ctx: DecisionContext, j: int) -> tuple[float, float]:
    """Pr(relay count < threshold | current source bit = 0) and the same
    for bit = 1, at detection interval j, conditioned on the realized source
    and relay histories (including the relay's own emission at the start of
    this interval)."""
    cfg, mod = ctx.cfg, ctx.cfg.modulation
    a = _action_at(ctx, j)
    if not a.relay_detects:
        raise ValueError(f"relay does not detect in interval {j}")
    w_s = _source_history_bits(ctx, j, a.source_emits_info)
    w_r = ctx.relay_tx_bits(j) if cfg.has_relay else np.zeros(j, np.int64)
    hist = relay_received_mean(w_s, w_r, ctx.tables, cfg, j)
    lag0 = mod.n_a1 * ctx.tables.s_to_r.weights[0]
    xi = _relay_threshold(ctx, j)
    return (poisson_cdf_below(hist, xi), poisson_cdf_below(hist + lag0, xi))


def single_hop_error_prob(ctx: DecisionContext, j: int, link: str) -> float:
    """Detection error probability at interval j on one hop, marginalizing
    the current transmitter bit over the priors and conditioning on realized
    history: P1 * Pr(count < xi | 1) + P0 * Pr(count >= xi | 0).
    """
    cfg, mod = ctx.cfg, ctx.cfg.modulation
    a = _action_at(ctx, j)
    if link == "relay":
        f1_0, f1_1 = relay_tail_probs(ctx, j)
        return mod.p1 * f1_1 + mod.p0 * (1.0 - f1_0)
    if link == "destination":
        if not a.destination_detects:
            raise ValueError(f"destination does not detect in interval {j}")
        if cfg.kind is ProtocolKind.BASELINE:
            current = a.source_emits_info
            w_s = _source_history_bits(ctx, j, current)
            hist = destination_received_mean(w_s, None, ctx.tables, cfg, j)
            lag0 = mod.n_a1 * ctx.tables.s_to_d.weights[0]
        else:
            # current transmitter is the relay (its emission at the start of
            # this interval); realized relay history stops just before it
            w_s = _source_history_bits(ctx, j, a.info_bit_index)
            w_r = ctx.relay_tx_bits(j - 1) if j > 1 else np.zeros(0, np.int64)
            hist = destination_received_mean(
                w_s, np.append(w_r, 0), ctx.tables, cfg, j)
            n_relay = mod.n_a2 if cfg.kind is ProtocolKind.FD1 else mod.n_a1
            lag0 = n_relay * ctx.tables.r_to_d.weights[0]
        xi = cfg.xi_d
    else:
        raise ValueError(f"link must be 'relay' or 'destination', got {link!r}")
    p1 = mod.p1
    return (p1 * poisson_cdf_below(hist + lag0, xi)
            + (1.0 - p1) * (1.0 - poisson_cdf_below(hist, xi)))


def sample_relay_decision(ctx: DecisionContext, j: int, rng) -> int:
    """One realization of the relay's decision at detection interval j: a
    biased coin toss flips the actually transmitted source bit with the
    conditional error probability given that bit and the realized histories
    (a miss, Pr(count < xi | 1), flips a 1; a false alarm,
    Pr(count >= xi | 0), flips a 0).  Conditioning the flip on the current
    bit preserves the threshold detector's dynamics — in particular the
    self-interference lock-in of the fixed-threshold single-species relay,
    which a bit-marginal flip probability would average away.  Records the
    result in the context and returns it."""
    f1_0, f1_1 = relay_tail_probs(ctx, j)
    w_s_j = int(ctx.source_interval_bits()[j - 1])
    p_flip = f1_1 if w_s_j == 1 else 1.0 - f1_0
    lam = 1 if rng.random() < p_flip else 0
    decision = abs(lam - w_s_j)
    ctx.hat_w_r[j] = decision
    return decision


def _detection_intervals(cfg: ProtocolConfig, info_bit: int) -> tuple[int, int]:
    if cfg.kind is ProtocolKind.HD:
        return 2 * info_bit - 1, 2 * info_bit
    return info_bit, info_bit + 1


def two_hop_error_prob(ctx: DecisionContext, info_bit: int) -> float:
    """Four-term relayed error probability of one information bit, given the
    realized source history and one realization of the relay's earlier
    decisions.  The current source bit and the relay's forwarding of it are
    marginalized: (relay misses a 1, destination stays below threshold) +
    (relay false-alarms on a 0, destination crosses) + (relay right on a 1,
    destination misses) + (relay right on a 0, destination false-alarms).
    """
    cfg, mod = ctx.cfg, ctx.cfg.modulation
    if cfg.kind is ProtocolKind.BASELINE:
        raise ValueError("baseline link has a single hop; use single_hop_error_prob")
    if not 1 <= info_bit <= mod.l_bits:
        raise IndexError(f"information bit {info_bit} outside 1..{mod.l_bits}")
    j_r, j_d = _detection_intervals(cfg, info_bit)

    w_s_r = _source_history_bits(ctx, j_r, info_bit)
    w_r_r = ctx.relay_tx_bits(j_r)
    hist_r = relay_received_mean(w_s_r, w_r_r, ctx.tables, cfg, j_r)
    lag0_r = mod.n_a1 * ctx.tables.s_to_r.weights[0]
    xi_r = _relay_threshold(ctx, j_r)
    f1_0 = poisson_cdf_below(hist_r, xi_r)
    f1_1 = poisson_cdf_below(hist_r + lag0_r, xi_r)

    w_s_d = _source_history_bits(ctx, j_d, info_bit)
    w_r_d = np.append(ctx.relay_tx_bits(j_d - 1), 0)
    hist_d = destination_received_mean(w_s_d, w_r_d, ctx.tables, cfg, j_d)
    n_relay = mod.n_a2 if cfg.kind is ProtocolKind.FD1 else mod.n_a1
    lag0_d = n_relay * ctx.tables.r_to_d.weights[0]
    f2_0 = poisson_cdf_below(hist_d, cfg.xi_d)
    f2_1 = poisson_cdf_below(hist_d + lag0_d, cfg.xi_d)

    p1, p0 = mod.p1, mod.p0
    return (p1 * f1_1 * f2_0
            + p0 * (1.0 - f1_0) * (1.0 - f2_1)
            + p1 * (1.0 - f1_1) * f2_1
            + p0 * f1_0 * (1.0 - f2_0))


# ---------------------------------------------------------------------------
# vectorized batch engine


@dataclass(frozen=True)
class _Indices:
    """1-based interval indices per information bit for one protocol."""

    src_emit: np.ndarray
    relay_detect: np.ndarray | None
    relay_emit: np.ndarray | None
    dest: np.ndarray


def _protocol_indices(cfg: ProtocolConfig) -> _Indices:
    l_bits = cfg.modulation.l_bits
    i = np.arange(1, l_bits + 1, dtype=np.int64)
    if cfg.kind is ProtocolKind.BASELINE:
        return _Indices(src_emit=i, relay_detect=None, relay_emit=None, dest=i)
    if cfg.kind is ProtocolKind.HD:
        return _Indices(src_emit=2 * i - 1, relay_detect=2 * i - 1,
                        relay_emit=2 * i, dest=2 * i)
    return _Indices(src_emit=i, relay_detect=i, relay_emit=i + 1, dest=i + 1)


def _history_lag_matrix(weights: np.ndarray, rx_intervals: np.ndarray,
                        tx_intervals: np.ndarray) -> np.ndarray:
    """A[i, i'] = w[rx_i - tx_i'] for strictly earlier bits i' < i, else 0."""
    lags = rx_intervals[:, None] - tx_intervals[None, :]
    a = np.where(np.tril(np.ones(lags.shape, dtype=bool), k=-1),
                 weights[np.clip(lags, 0, len(weights) - 1)], 0.0)
    return a


def _batch_errors(cfg: ProtocolConfig, tables: LinkTables, ws: np.ndarray,
                  uniforms: np.ndarray | None,
                  forced_hat: np.ndarray | None = None):
    """Eq.-style per-bit expected errors for a batch of source sequences.

    ws: (n, L) drawn source information bits.  Exactly one of uniforms
    (coin-toss randomness, (n, L)) and forced_hat (fixed relay detection
    sequences, (n, L)) must be given.  Returns (errors (n, L), hat (n, L),
    log_path_prob (n,)), the last being the log-probability of the realized
    relay decision path given ws (used by the enumeration oracle).
    """
    mod = cfg.modulation
    n, l_bits = ws.shape
    p1, p0 = mod.p1, mod.p0
    idx = _protocol_indices(cfg)
    ws_f = ws.astype(np.float64)
    errors = np.empty((n, l_bits), dtype=np.float64)

    if cfg.kind is ProtocolKind.BASELINE:
        w_sd = tables.s_to_d.weights
        hist = mod.n_a1 * ws_f @ _history_lag_matrix(w_sd, idx.dest, idx.src_emit).T
        lag0 = mod.n_a1 * w_sd[0]
        below_1 = poisson_cdf_below_array(hist + lag0, cfg.xi_d)
        below_0 = poisson_cdf_below_array(hist, cfg.xi_d)
        errors[:] = p1 * below_1 + p0 * (1.0 - below_0)
        return errors, None, np.zeros(n)

    if (uniforms is None) == (forced_hat is None):
        raise ValueError("need exactly one of uniforms and forced_hat")

    n_a1 = mod.n_a1
    n_rel = mod.n_a2 if cfg.kind is ProtocolKind.FD1 else mod.n_a1
    w_sr = tables.s_to_r.weights
    w_rd = tables.r_to_d.weights
    w_rr = tables.r_to_r.weights if tables.r_to_r is not None else None
    w_sd = tables.s_to_d.weights if tables.s_to_d is not None else None

    sr_hist = n_a1 * ws_f @ _history_lag_matrix(w_sr, idx.relay_detect,
                                                idx.src_emit).T
    if w_sd is not None:
        sd_hist = n_a1 * ws_f @ _history_lag_matrix(w_sd, idx.dest,
                                                    idx.src_emit).T
    else:
        sd_hist = np.zeros((n, l_bits))
    sr_lag0 = n_a1 * w_sr[0]
    rd_lag0 = n_rel * w_rd[0]
    adaptive = cfg.kind is ProtocolKind.FDADP

    hat = np.empty((n, l_bits), dtype=np.int8)
    log_q = np.zeros(n, dtype=np.float64)
    hat_f = np.empty((n, l_bits), dtype=np.float64)
    for i in range(l_bits):
        past = hat_f[:, :i]
        if w_rr is not None and i > 0:
            rr_lags = w_rr[idx.relay_detect[i] - idx.relay_emit[:i]]
            rr_hist = n_a1 * past @ rr_lags
        else:
            rr_hist = np.zeros(n)
        if i > 0:
            rd_lags = w_rd[idx.dest[i] - idx.relay_emit[:i]]
            rd_hist = n_rel * past @ rd_lags
        else:
            rd_hist = np.zeros(n)

        xi_r = cfg.xi_r + rr_hist if adaptive else cfg.xi_r
        mean_r = sr_hist[:, i] + rr_hist
        f1_0 = poisson_cdf_below_array(mean_r, xi_r)
        f1_1 = poisson_cdf_below_array(mean_r + sr_lag0, xi_r)
        mean_d = sd_hist[:, i] + rd_hist
        f2_0 = poisson_cdf_below_array(mean_d, cfg.xi_d)
        f2_1 = poisson_cdf_below_array(mean_d + rd_lag0, cfg.xi_d)

        errors[:, i] = (p1 * f1_1 * f2_0 + p0 * (1.0 - f1_0) * (1.0 - f2_1)
                        + p1 * (1.0 - f1_1) * f2_1 + p0 * f1_0 * (1.0 - f2_0))

        # realization law: flip the current bit with its conditional error
        # probability (miss on a 1, false alarm on a 0) so threshold dynamics
        # such as self-interference lock-in survive the sampling
        p_flip = np.where(ws[:, i] != 0, f1_1, 1.0 - f1_0)
        if forced_hat is None:
            lam = uniforms[:, i] < p_flip
            hat[:, i] = np.bitwise_xor(lam, ws[:, i] != 0)
        else:
            hat[:, i] = forced_hat[:, i]
            flipped = forced_hat[:, i] != ws[:, i]
            with np.errstate(divide="ignore"):
                log_q += np.log(np.where(flipped, p_flip, 1.0 - p_flip))
        hat_f[:, i] = hat[:, i]
    return errors, hat, log_q


def _draw_sequences(cfg: ProtocolConfig, n_sequences: int, master_seed: int):
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, 0]))
    ws = (rng.random((n_sequences, cfg.modulation.l_bits))
          < cfg.modulation.p1).astype(np.int8)
    return ws


def _toss_uniforms(cfg: ProtocolConfig, n_sequences: int, master_seed: int,
                   realization: int) -> np.ndarray:
    rng = np.random.default_rng(
        np.random.SeedSequence([master_seed, 1, realization]))
    return rng.random((n_sequences, cfg.modulation.l_bits))


def _stats_from_matrix(per_seq_bit: np.ndarray) -> ErrorStats:
    n = per_seq_bit.shape[0]
    per_bit = per_seq_bit.mean(axis=0)
    per_seq = per_seq_bit.mean(axis=1)
    if n > 1:
        se = float(per_seq.std(ddof=1) / math.sqrt(n))
    else:
        se = 0.0
    return ErrorStats(per_bit_error=per_bit,
                      average_error=float(per_bit.mean()),
                      num_realizations=n,
                      ci_halfwidth=_Z95 * se)


def expected_error_stats(cfg: ProtocolConfig, n_sequences: int,
                         master_seed: int, relay_realizations: int = 1,
                         tables: LinkTables | None = None) -> ErrorStats:
    """Monte Carlo average of the closed-form per-bit error over drawn
    source sequences, one relay coin-toss realization per sequence (the
    modeled approximation).  relay_realizations > 1 averages several
    independent relay realizations per sequence instead, which quantifies
    the single-realization approximation.

    Deterministic for a given master_seed; the same seed reuses the same
    sequences and tosses across calls (common random numbers across
    threshold grids).
    """
    if n_sequences < 1:
        raise ValueError("need at least one sequence")
    if relay_realizations < 1:
        raise ValueError("need at least one relay realization")
    if tables is None:
        tables = build_link_tables(cfg)
    ws = _draw_sequences(cfg, n_sequences, master_seed)
    if cfg.kind is ProtocolKind.BASELINE:
        errors, _, _ = _batch_errors(cfg, tables, ws, None)
        return _stats_from_matrix(errors)
    acc = np.zeros((n_sequences, cfg.modulation.l_bits))
    for r in range(relay_realizations):
        u = _toss_uniforms(cfg, n_sequences, master_seed, r)
        errors, _, _ = _batch_errors(cfg, tables, ws, u)
        acc += errors
    return _stats_from_matrix(acc / relay_realizations)


@dataclass(frozen=True)
class ThresholdSweepResult:
    thresholds: np.ndarray
    stats: tuple[ErrorStats, ...]
    best_index: int

    @property
    def best_threshold(self) -> float:
        return float(self.thresholds[self.best_index])

    @property
    def best_error(self) -> float:
        return float(self.stats[self.best_index].average_error)

    @property
    def errors(self) -> np.ndarray:
        return np.array([s.average_error for s in self.stats])


def optimal_threshold_search(cfg: ProtocolConfig, thresholds,
                             n_sequences: int = 10_000, master_seed: int = 0,
                             relay_realizations: int = 1,
                             tables: LinkTables | None = None
                             ) -> ThresholdSweepResult:
    """Grid search over a common threshold applied to both detectors
    (xi_R = xi_D = xi; for the adaptive protocol xi is the fixed part).

    All grid points share the same drawn sequences and tosses (common random
    numbers), so the curve is smooth and the argmin stable.  Ties go to the
    smaller threshold.
    """
    grid = np.asarray(thresholds, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("threshold grid is empty")
    if tables is None:
        tables = build_link_tables(cfg)
    stats = tuple(
        expected_error_stats(cfg.with_thresholds(xi_r=xi, xi_d=xi),
                             n_sequences, master_seed,
                             relay_realizations, tables)
        for xi in grid)
    errors = np.array([s.average_error for s in stats])
    best = np.flatnonzero(errors == errors.min())
    best_index = int(best[np.argmin(grid[best])])
    return ThresholdSweepResult(thresholds=grid, stats=stats,
                                best_index=best_index)


# ---------------------------------------------------------------------------
# exhaustive enumeration oracles (exact averages for small L)


def _all_bit_rows(l_bits: int) -> np.ndarray:
    if l_bits > ENUMERATION_MAX_BITS:
        raise ValueError(
            f"enumeration is exponential; refusing L > {ENUMERATION_MAX_BITS}")
    rows = np.arange(2**l_bits, dtype=np.int64)
    return ((rows[:, None] >> np.arange(l_bits)) & 1).astype(np.int8)


def enumerate_relay_average(cfg: ProtocolConfig, info_bits,
                            tables: LinkTables | None = None) -> np.ndarray:
    """Exact per-bit error for one fixed source sequence, averaged over all
    2^L relay decision paths weighted by their coin-toss probabilities.
    This is the expectation the single-toss engine estimates."""
    if cfg.kind is ProtocolKind.BASELINE:
        raise ValueError("baseline has no relay realizations to enumerate")
    if tables is None:
        tables = build_link_tables(cfg)
    info = np.asarray(info_bits, dtype=np.int8)
    l_bits = cfg.modulation.l_bits
    if info.shape != (l_bits,):
        raise ValueError(f"expected {l_bits} bits")
    paths = _all_bit_rows(l_bits)
    ws = np.broadcast_to(info, paths.shape)
    errors, _, log_q = _batch_errors(cfg, tables, ws, None, forced_hat=paths)
    weights = np.exp(log_q)
    return weights @ errors


def enumerate_sequence_average(cfg: ProtocolConfig,
                               tables: LinkTables | None = None) -> np.ndarray:
    """Exact per-bit expected error: enumerate all 2^L source sequences
    (prior-weighted) and, for relayed kinds, all relay paths per sequence."""
    if tables is None:
        tables = build_link_tables(cfg)
    l_bits = cfg.modulation.l_bits
    seqs = _all_bit_rows(l_bits)
    p1 = cfg.modulation.p1
    ones = seqs.sum(axis=1).astype(np.float64)
    # 0.0 ** 0 == 1.0, so degenerate priors weight exactly one sequence
    seq_w = p1**ones * (1.0 - p1) ** (l_bits - ones)
    if cfg.kind is ProtocolKind.BASELINE:
        errors, _, _ = _batch_errors(cfg, tables, seqs, None)
        return seq_w @ errors
    out = np.zeros(l_bits)
    for s, w in zip(seqs, seq_w):
        if w == 0.0:
            continue
        out += w * enumerate_relay_average(cfg, s, tables)
    return out
