"""Particle-based Brownian simulator.

Every emission is a cohort of independent molecules released at a node
center at an interval start.  Molecules never interact and observers are
passive, so each cohort can be propagated on its own and a cohort only needs
its position at the sample times at which some observer counts its species.
Between two consecutive needed times a molecule takes one Gaussian step with
per-axis variance 2*D*delta; Brownian increments compose exactly, so this is
distributionally identical to stepping the paper clock sample by sample (an
explicit micro-step dt is available to demonstrate that invariance).

Relay decisions feed back into which relay cohorts exist.  Instead of
interleaving decisions with propagation, the simulator walks relay cohorts
for every scheduled relay emission slot and records their counts separately;
decision logic is then a cheap replay over the recorded counts.  That is
exact (molecule motion never depends on decisions) and lets a threshold
sweep reuse one set of walks for every threshold, which also gives common
random numbers across the sweep.

Determinism: realization r draws everything from
numpy.random.default_rng(SeedSequence([master_seed, r])) in schedule order,
so results are bit-identical regardless of batching or worker count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np

from .links import LinkTables, build_link_tables
from .model import ErrorStats, ProtocolConfig, ProtocolKind, SpeciesId, Vec3
from .protocols import build_schedule, interval_source_bits

__all__ = [
    "MoleculePool",
    "SimConfig",
    "RealizationResult",
    "CountStatistics",
    "brownian_step",
    "emit",
    "count_in_sphere",
    "run_realization",
    "estimate_error",
    "estimate_error_sweep",
    "count_statistics",
]

_Z95 = 1.959963984540054


# ---------------------------------------------------------------------------
# plain molecule-pool operations (validation oracles and small experiments)


@dataclass
class MoleculePool:
    """Per-species molecule positions and emission times."""

    positions: dict[SpeciesId, np.ndarray]
    emission_times: dict[SpeciesId, np.ndarray]

    @classmethod
    def empty(cls) -> "MoleculePool":
        return cls(positions={}, emission_times={})

    def size(self, species: SpeciesId | None = None) -> int:
        if species is not None:
            return len(self.positions.get(species, ()))
        return sum(len(p) for p in self.positions.values())


def brownian_step(positions: np.ndarray, diffusion: float, dt: float,
                  rng: np.random.Generator) -> np.ndarray:
    """One diffusion step: every coordinate moves by an independent zero-mean
    Gaussian with standard deviation sqrt(2*D*dt).  Returns a new array."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    sigma = math.sqrt(2.0 * diffusion * dt)
    return positions + rng.normal(0.0, sigma, size=positions.shape)


def emit(pool: MoleculePool, species: SpeciesId, n_a: int, position,
         t: float) -> MoleculePool:
    """Append n_a molecules of a species at a point (impulsive release)."""
    if n_a < 0:
        raise ValueError(f"molecule count must be nonnegative, got {n_a}")
    if n_a == 0:
        return pool
    pos = position.as_array() if isinstance(position, Vec3) else np.asarray(
        position, dtype=np.float64)
    new_pos = np.tile(pos, (n_a, 1))
    new_t = np.full(n_a, t, dtype=np.float64)
    if species in pool.positions:
        pool.positions[species] = np.concatenate(
            [pool.positions[species], new_pos])
        pool.emission_times[species] = np.concatenate(
            [pool.emission_times[species], new_t])
    else:
        pool.positions[species] = new_pos
        pool.emission_times[species] = new_t
    return pool


def count_in_sphere(pool: MoleculePool, species: SpeciesId, center,
                    radius: float) -> int:
    """Molecules of the species within (inclusive) radius of center."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    pos = pool.positions.get(species)
    if pos is None or len(pos) == 0:
        return 0
    c = center.as_array() if isinstance(center, Vec3) else np.asarray(
        center, dtype=np.float64)
    d2 = ((pos - c) ** 2).sum(axis=1)
    return int(np.count_nonzero(d2 <= radius * radius))


# ---------------------------------------------------------------------------
# fast cohort walker


@numba.njit(cache=True, nogil=True)
def _walk_cohort(gen, n_mol, x0, y0, z0, sigmas, obs_x, obs_y, obs_z, obs_r2,
                 obs_mask, out):  # pragma: no cover - exercised via wrappers
    n_steps = sigmas.shape[0]
    n_obs = obs_r2.shape[0]
    for _ in range(n_mol):
        x = x0
        y = y0
        z = z0
        for s in range(n_steps):
            sg = sigmas[s]
            x += sg * gen.standard_normal()
            y += sg * gen.standard_normal()
            z += sg * gen.standard_normal()
            for o in range(n_obs):
                if obs_mask[s, o]:
                    dx = x - obs_x[o]
                    dy = y - obs_y[o]
                    dz = z - obs_z[o]
                    if dx * dx + dy * dy + dz * dz <= obs_r2[o]:
                        out[s, o] += 1


@dataclass(frozen=True)
class _StepTemplate:
    """Walk schedule for cohorts of one species emitted at one interval:
    per-step Gaussian sigmas and, for each step, which observers count it
    and into which (interval, sample) cell the count folds."""

    sigmas: np.ndarray  # (n_steps,)
    obs_mask: np.ndarray  # (n_steps, n_obs) uint8
    interval_slot: np.ndarray  # (n_steps,) 0-based interval, -1 when unobserved
    sample_slot: np.ndarray  # (n_steps,) 0-based sample index, -1 when unobserved


@dataclass(frozen=True)
class _SimPlan:
    cfg: ProtocolConfig
    actions: tuple
    n_obs: int  # relay (index 0, when present) and destination
    obs_x: np.ndarray
    obs_y: np.ndarray
    obs_z: np.ndarray
    obs_r2: np.ndarray
    obs_sched_mask: np.ndarray  # (n_obs, K) uint8, scheduled detection intervals
    templates: dict  # (species value, 1-based emit interval) -> _StepTemplate
    src_cohort: dict  # 1-based interval -> (species, n_mol, start xyz)
    relay_emit_intervals: np.ndarray  # (n_slots,) 1-based, ascending
    relay_cohort: tuple | None  # (species, n_mol, start xyz)


def _build_template(cfg: ProtocolConfig, watchers: list[int],
                    detect_intervals: list[np.ndarray], emit_interval: int,
                    diffusion: float, n_obs: int,
                    dt: float | None) -> _StepTemplate:
    mod = cfg.modulation
    t_emit = (emit_interval - 1) * mod.t_b
    cells: dict[tuple[int, int], int] = {}
    for o, intervals in zip(watchers, detect_intervals):
        for j in intervals:
            if j < emit_interval:
                continue  # sampled strictly before this cohort exists
            for m in range(1, mod.m_samples + 1):
                cells.setdefault((int(j), m), 0)
                cells[(int(j), m)] |= 1 << o
    ordered = sorted(cells)
    times, mask_rows, islots, mslots = [], [], [], []
    prev = t_emit
    for (j, m) in ordered:
        t = (j - 1) * mod.t_b + m * mod.t0
        gap = t - prev
        if dt is not None and gap > dt * (1 + 1e-9):
            n_sub = math.ceil(gap / dt - 1e-9)
            for _ in range(n_sub - 1):
                prev += gap / n_sub
                times.append(prev)
                mask_rows.append(0)
                islots.append(-1)
                mslots.append(-1)
        times.append(t)
        mask_rows.append(cells[(j, m)])
        islots.append(j - 1)
        mslots.append(m - 1)
        prev = t
    times_arr = np.array(times, dtype=np.float64)
    gaps = np.diff(times_arr, prepend=t_emit)
    mask = np.zeros((len(times_arr), n_obs), dtype=np.uint8)
    for row, bits in enumerate(mask_rows):
        for o in range(n_obs):
            mask[row, o] = (bits >> o) & 1
    return _StepTemplate(
        sigmas=np.sqrt(2.0 * diffusion * gaps),
        obs_mask=mask,
        interval_slot=np.array(islots, dtype=np.int64),
        sample_slot=np.array(mslots, dtype=np.int64),
    )


def _build_plan(cfg: ProtocolConfig, dt: float | None) -> _SimPlan:
    mod = cfg.modulation
    actions = build_schedule(cfg.kind, mod.l_bits)
    k_total = len(actions)
    observers = []  # (node, species)
    if cfg.has_relay:
        observers.append((cfg.relay, cfg.hop1_species))
    observers.append((cfg.destination, cfg.hop2_species))
    n_obs = len(observers)
    obs_pos = np.array([o.position.as_array() for o, _ in observers])
    obs_sched = np.zeros((n_obs, k_total), dtype=np.uint8)
    detect = []
    for o, (node, _) in enumerate(observers):
        if node.id.value == "R":
            ints = np.array([a.j for a in actions if a.relay_detects])
        else:
            ints = np.array([a.j for a in actions if a.destination_detects])
        detect.append(ints)
        obs_sched[o, ints - 1] = 1

    def watchers_of(species) -> tuple[list[int], list[np.ndarray]]:
        idxs = [o for o, (_, sp) in enumerate(observers) if sp.id is species.id]
        return idxs, [detect[o] for o in idxs]

    templates: dict = {}

    def template_for(species, emit_interval: int) -> None:
        key = (species.id.value, emit_interval)
        if key in templates:
            return
        w, d = watchers_of(species)
        templates[key] = _build_template(cfg, w, d, emit_interval,
                                         species.diffusion_coefficient,
                                         n_obs, dt)

    src_cohort = {}
    src_xyz = cfg.source.position.as_array()
    for a in actions:
        if a.source_emits_info is not None:
            src_cohort[a.j] = (cfg.hop1_species, mod.n_a1, src_xyz)
            template_for(cfg.hop1_species, a.j)

    relay_cohort = None
    emit_intervals = np.zeros(0, dtype=np.int64)
    if cfg.has_relay:
        emit_intervals = np.array(
            [a.j for a in actions if a.relay_emits_detected_from is not None],
            dtype=np.int64)
        n_rel = mod.n_a2 if cfg.kind is ProtocolKind.FD1 else mod.n_a1
        relay_cohort = (cfg.hop2_species, n_rel, cfg.relay.position.as_array())
        for j in emit_intervals:
            template_for(cfg.hop2_species, int(j))

    return _SimPlan(cfg=cfg, actions=actions, n_obs=n_obs,
                    obs_x=np.ascontiguousarray(obs_pos[:, 0]),
                    obs_y=np.ascontiguousarray(obs_pos[:, 1]),
                    obs_z=np.ascontiguousarray(obs_pos[:, 2]),
                    obs_r2=np.array([o.radius**2 for o, _ in observers]),
                    obs_sched_mask=obs_sched,
                    templates=templates,
                    src_cohort=src_cohort,
                    relay_emit_intervals=emit_intervals,
                    relay_cohort=relay_cohort)


def _walk_into(plan: _SimPlan, species, n_mol: int, start: np.ndarray,
               emit_interval: int, gen, out_intervals: np.ndarray,
               out_samples: np.ndarray | None) -> None:
    tpl: _StepTemplate = plan.templates[(species.id.value, emit_interval)]
    n_steps = len(tpl.sigmas)
    if n_mol == 0 or n_steps == 0:
        return
    step_counts = np.zeros((n_steps, plan.n_obs), dtype=np.int64)
    _walk_cohort(gen, n_mol, start[0], start[1], start[2], tpl.sigmas,
                 plan.obs_x, plan.obs_y, plan.obs_z, plan.obs_r2,
                 tpl.obs_mask, step_counts)
    observed = tpl.interval_slot >= 0
    for o in range(plan.n_obs):
        np.add.at(out_intervals[o], tpl.interval_slot[observed],
                  step_counts[observed, o])
        if out_samples is not None:
            np.add.at(out_samples[o],
                      (tpl.interval_slot[observed], tpl.sample_slot[observed]),
                      step_counts[observed, o])


def _simulate_physics(plan: _SimPlan, ws_interval: np.ndarray, gen,
                      keep_samples: bool = False):
    """Walk all cohorts of one realization.  Returns (base, coh, base_s,
    coh_s): source-cohort counts summed per (observer, interval), relay
    cohort counts per (slot, observer, interval), and the same resolved per
    sample when keep_samples is set."""
    cfg = plan.cfg
    k_total = len(plan.actions)
    m = cfg.modulation.m_samples
    n_slots = len(plan.relay_emit_intervals)
    base = np.zeros((plan.n_obs, k_total), dtype=np.int64)
    coh = np.zeros((n_slots, plan.n_obs, k_total), dtype=np.int64)
    base_s = np.zeros((plan.n_obs, k_total, m), dtype=np.int64) \
        if keep_samples else None
    coh_s = np.zeros((n_slots, plan.n_obs, k_total, m), dtype=np.int64) \
        if keep_samples else None
    for j in sorted(plan.src_cohort):
        if ws_interval[j - 1]:
            species, n_mol, xyz = plan.src_cohort[j]
            _walk_into(plan, species, n_mol, xyz, j, gen, base, base_s)
    if plan.relay_cohort is not None:
        species, n_mol, xyz = plan.relay_cohort
        for s, j in enumerate(plan.relay_emit_intervals):
            _walk_into(plan, species, n_mol, xyz, int(j), gen, coh[s],
                       None if coh_s is None else coh_s[s])
    return base, coh, base_s, coh_s


# ---------------------------------------------------------------------------
# decision replay


@dataclass(frozen=True)
class _BitIntervals:
    """1-based detection/emission intervals per information bit."""

    relay_detect: np.ndarray | None
    relay_emit: np.ndarray | None
    dest: np.ndarray


def _bit_intervals(cfg: ProtocolConfig) -> _BitIntervals:
    i = np.arange(1, cfg.modulation.l_bits + 1, dtype=np.int64)
    if cfg.kind is ProtocolKind.BASELINE:
        return _BitIntervals(relay_detect=None, relay_emit=None, dest=i)
    if cfg.kind is ProtocolKind.HD:
        return _BitIntervals(relay_detect=2 * i - 1, relay_emit=2 * i,
                             dest=2 * i)
    return _BitIntervals(relay_detect=i, relay_emit=i + 1, dest=i + 1)


def _replay_batch(cfg: ProtocolConfig, bits: _BitIntervals,
                  w_rr: np.ndarray | None, base: np.ndarray, coh: np.ndarray,
                  ws_info: np.ndarray, xi_r: float, xi_d: float):
    """Run detector decisions over recorded counts for a realization batch.
    Returns (error indicators (B, L), relay decisions (B, L) or None,
    destination decisions (B, L))."""
    b, _, _ = base.shape
    l_bits = ws_info.shape[1]
    has_relay = cfg.has_relay
    adaptive = cfg.kind is ProtocolKind.FDADP
    n_a1 = cfg.modulation.n_a1
    d_idx = 1 if has_relay else 0
    wr = np.zeros((b, coh.shape[1]), dtype=np.float64) if has_relay else None
    hat = np.zeros((b, l_bits), dtype=np.int8) if has_relay else None
    dest = np.zeros((b, l_bits), dtype=np.int8)
    for i in range(l_bits):
        if has_relay:
            j_r = int(bits.relay_detect[i])
            cnt = base[:, 0, j_r - 1].astype(np.float64)
            if i > 0:
                cnt += np.einsum("bs,bs->b", wr[:, :i],
                                 coh[:, :i, 0, j_r - 1].astype(np.float64))
            xi = xi_r
            if adaptive and i > 0:
                self_lags = w_rr[j_r - bits.relay_emit[:i]]
                xi = xi_r + n_a1 * (wr[:, :i] @ self_lags)
            hat[:, i] = cnt >= xi
            wr[:, i] = hat[:, i]
        j_d = int(bits.dest[i])
        cnt_d = base[:, d_idx, j_d - 1].astype(np.float64)
        if has_relay:
            cnt_d += np.einsum("bs,bs->b", wr[:, : i + 1],
                               coh[:, : i + 1, d_idx, j_d - 1].astype(np.float64))
        dest[:, i] = cnt_d >= xi_d
    err = (dest != ws_info).astype(np.int8)
    return err, hat, dest


# ---------------------------------------------------------------------------
# public simulation API


@dataclass(frozen=True)
class SimConfig:
    protocol: ProtocolConfig
    n_realizations: int
    master_seed: int = 0
    dt: float | None = None  # optional micro-step; None walks sample-to-sample
    trace: bool = False
    batch_size: int = 128
    workers: int | None = None  # None reads MCRELAY_WORKERS, default 1

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")
        if self.dt is not None:
            t0 = self.protocol.modulation.t0
            if self.dt <= 0:
                raise ValueError(f"dt must be positive, got {self.dt}")
            ratio = t0 / self.dt
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(
                    f"t0 = {t0:g} must be an integer multiple of dt = {self.dt:g}")

    def effective_workers(self) -> int:
        if self.workers is not None:
            return max(1, self.workers)
        return max(1, int(os.environ.get("MCRELAY_WORKERS", "1")))


@dataclass(frozen=True)
class RealizationResult:
    source_bits: np.ndarray
    error_indicators: np.ndarray
    relay_detected: np.ndarray | None
    destination_detected: np.ndarray
    trace: np.ndarray | None = None  # (n_obs, K, M) counts, -1 when unsampled


def _realization_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, index]))


def run_realization(sim: SimConfig, realization_index: int,
                    source_bits=None) -> RealizationResult:
    """Execute one full realization: draw the source sequence (unless one is
    forced), walk every cohort, and run the detectors at the configured
    thresholds."""
    cfg = sim.protocol
    l_bits = cfg.modulation.l_bits
    plan = _build_plan(cfg, sim.dt)
    gen = _realization_rng(sim.master_seed, realization_index)
    if source_bits is None:
        ws = (gen.random(l_bits) < cfg.modulation.p1).astype(np.int8)
    else:
        ws = np.asarray(source_bits, dtype=np.int8)
        if ws.shape != (l_bits,):
            raise ValueError(f"expected {l_bits} source bits")
    ws_interval = interval_source_bits(plan.actions, ws)
    base, coh, base_s, coh_s = _simulate_physics(plan, ws_interval, gen,
                                                 keep_samples=sim.trace)
    w_rr = None
    if cfg.kind is ProtocolKind.FDADP:
        w_rr = build_link_tables(cfg).r_to_r.weights
    err, hat, dest = _replay_batch(cfg, _bit_intervals(cfg), w_rr,
                                   base[None], coh[None], ws[None],
                                   cfg.xi_r, cfg.xi_d)
    trace = None
    if sim.trace:
        trace = base_s.astype(np.int64).copy()
        if coh_s is not None and len(coh_s):
            wr_bits = np.zeros(len(coh_s))
            if hat is not None:
                wr_bits = hat[0].astype(np.float64)
            trace = trace + np.tensordot(wr_bits, coh_s, axes=(0, 0)).astype(
                np.int64)
        unsampled = plan.obs_sched_mask[:, :, None] == 0
        trace[np.broadcast_to(unsampled, trace.shape)] = -1
    return RealizationResult(
        source_bits=ws,
        error_indicators=err[0],
        relay_detected=None if hat is None else hat[0],
        destination_detected=dest[0],
        trace=trace,
    )


def _sim_threshold_grid(sim: SimConfig, pairs: list[tuple[float, float]]):
    """Shared engine: per-realization physics once, one decision replay per
    (xi_r, xi_d) pair.  Returns (err_sums (P, L) int64, per_real (P, n))."""
    cfg = sim.protocol
    l_bits = cfg.modulation.l_bits
    plan = _build_plan(cfg, sim.dt)
    bits = _bit_intervals(cfg)
    w_rr = None
    if cfg.kind is ProtocolKind.FDADP:
        w_rr = build_link_tables(cfg).r_to_r.weights
    n = sim.n_realizations
    n_pairs = len(pairs)
    err_sums = np.zeros((n_pairs, l_bits), dtype=np.int64)
    per_real = np.zeros((n_pairs, n), dtype=np.float64)

    starts = list(range(0, n, sim.batch_size))

    def run_batch(start: int):
        stop = min(start + sim.batch_size, n)
        rows = stop - start
        ws_b = np.zeros((rows, l_bits), dtype=np.int8)
        base_b = None
        coh_b = None
        for k in range(rows):
            gen = _realization_rng(sim.master_seed, start + k)
            ws = (gen.random(l_bits) < cfg.modulation.p1).astype(np.int8)
            ws_interval = interval_source_bits(plan.actions, ws)
            base, coh, _, _ = _simulate_physics(plan, ws_interval, gen)
            if base_b is None:
                base_b = np.zeros((rows,) + base.shape, dtype=np.int64)
                coh_b = np.zeros((rows,) + coh.shape, dtype=np.int64)
            ws_b[k] = ws
            base_b[k] = base
            coh_b[k] = coh
        out_sum = np.zeros((n_pairs, l_bits), dtype=np.int64)
        out_real = np.zeros((n_pairs, rows), dtype=np.float64)
        for p, (xi_r, xi_d) in enumerate(pairs):
            err, _, _ = _replay_batch(cfg, bits, w_rr, base_b, coh_b, ws_b,
                                      xi_r, xi_d)
            out_sum[p] = err.sum(axis=0, dtype=np.int64)
            out_real[p] = err.mean(axis=1)
        return start, stop, out_sum, out_real

    workers = sim.effective_workers()
    if workers == 1:
        results = map(run_batch, starts)
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_batch, starts))
    for start, stop, out_sum, out_real in results:
        err_sums += out_sum
        per_real[:, start:stop] = out_real
    return err_sums, per_real


def _stats_from_sums(err_sums: np.ndarray, per_real: np.ndarray) -> ErrorStats:
    n = per_real.shape[0]
    per_bit = err_sums / n
    se = float(per_real.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ErrorStats(per_bit_error=per_bit,
                      average_error=float(per_bit.mean()),
                      num_realizations=n,
                      ci_halfwidth=_Z95 * se)


def estimate_error(sim: SimConfig) -> ErrorStats:
    """Monte Carlo bit-error estimate at the configured thresholds, fresh
    random source bits per realization."""
    cfg = sim.protocol
    err_sums, per_real = _sim_threshold_grid(sim, [(cfg.xi_r, cfg.xi_d)])
    return _stats_from_sums(err_sums[0], per_real[0])


def estimate_error_sweep(sim: SimConfig, thresholds) -> list[ErrorStats]:
    """Error estimates across a common-threshold grid (xi_R = xi_D = xi;
    the fixed part for the adaptive kind).  All grid points share the same
    realizations: one physics pass, one replay per threshold."""
    grid = [float(x) for x in np.atleast_1d(np.asarray(thresholds, float))]
    if not grid:
        raise ValueError("threshold grid is empty")
    err_sums, per_real = _sim_threshold_grid(sim, [(x, x) for x in grid])
    return [_stats_from_sums(err_sums[p], per_real[p])
            for p in range(len(grid))]


@dataclass(frozen=True)
class CountStatistics:
    """Per-(observer, interval) detector-sum moments over realizations.
    Observer order: relay first when the protocol has one, then destination.
    Unscheduled intervals hold zeros; scheduled_mask marks the real ones."""

    mean: np.ndarray
    variance: np.ndarray
    n_realizations: int
    scheduled_mask: np.ndarray


def count_statistics(sim: SimConfig, source_bits,
                     relay_tx_bits=None) -> CountStatistics:
    """Observer count moments for a forced source sequence and (for relayed
    protocols) a forced relay transmission pattern, bypassing decisions.
    relay_tx_bits[i] is the bit the relay emits in its (i+1)-th emission
    slot."""
    cfg = sim.protocol
    plan = _build_plan(cfg, sim.dt)
    k_total = len(plan.actions)
    ws = np.asarray(source_bits, dtype=np.int8)
    if ws.shape != (cfg.modulation.l_bits,):
        raise ValueError(f"expected {cfg.modulation.l_bits} source bits")
    ws_interval = interval_source_bits(plan.actions, ws)
    n_slots = len(plan.relay_emit_intervals)
    if cfg.has_relay:
        if relay_tx_bits is None:
            raise ValueError("relayed protocols need a forced relay_tx_bits")
        wr = np.asarray(relay_tx_bits, dtype=np.float64)
        if wr.shape != (n_slots,):
            raise ValueError(f"expected {n_slots} relay emission bits")
    else:
        wr = np.zeros(0)
    total = np.zeros((plan.n_obs, k_total), dtype=np.int64)
    total_sq = np.zeros((plan.n_obs, k_total), dtype=np.int64)
    for r in range(sim.n_realizations):
        gen = _realization_rng(sim.master_seed, r)
        base, coh, _, _ = _simulate_physics(plan, ws_interval, gen)
        counts = base
        if n_slots:
            counts = base + np.tensordot(wr, coh, axes=(0, 0)).astype(np.int64)
        total += counts
        total_sq += counts * counts
    n = sim.n_realizations
    mean = total / n
    var = (total_sq - n * mean**2) / (n - 1) if n > 1 else np.zeros_like(mean)
    return CountStatistics(mean=mean, variance=var, n_realizations=n,
                           scheduled_mask=plan.obs_sched_mask.astype(bool))
