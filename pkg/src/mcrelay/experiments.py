"""Experiment harness behind the command line.

An ExperimentSpec fully describes a run (kind, protocols, grids, engines,
realization counts, master seed); outputs echo the spec so every table can
be reproduced from its own file.  Outputs carry no timestamps or host state:
re-running the same spec with the same seed writes byte-identical files at
any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .analytics import expected_error_stats, optimal_threshold_search
from .model import ErrorStats, ProtocolConfig, ProtocolKind, Vec3, \
    default_two_hop_config, validate_config
from .physics import observation_probability, poisson_cdf_below, \
    self_observation_probability
from .simulation import MoleculePool, SimConfig, brownian_step, \
    count_in_sphere, emit, estimate_error, estimate_error_sweep, \
    run_realization

__all__ = [
    "SpecError",
    "ExperimentSpec",
    "SweepRow",
    "PhysicsCheck",
    "PhysicsReport",
    "ExperimentResult",
    "PRESETS",
    "EXPERIMENT_KINDS",
    "load_spec_file",
    "build_protocol",
    "cmd_sweep_threshold",
    "cmd_sweep_interval",
    "cmd_compare_protocols",
    "cmd_single_run",
    "cmd_validate_physics",
    "run_experiment",
    "render_csv",
    "render_json",
    "write_outputs",
]

EXPERIMENT_KINDS = ("threshold-sweep", "interval-sweep", "compare-protocols",
                    "validate-physics", "single-run")
_ENGINES = ("analytics", "simulation", "both")
_PROTOCOL_NAMES = tuple(k.value for k in ProtocolKind)


class SpecError(ValueError):
    """Invalid experiment specification (maps to the config-error exit)."""


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    protocols: tuple[str, ...] = ("FD1", "Baseline")
    engine: str = "both"
    thresholds: tuple[float, ...] = tuple(float(x) for x in range(1, 61))
    t_b_values: tuple[float, ...] = (400e-6,)
    m_samples: int = 5
    t0: float = 20e-6
    l_bits: int = 10
    p1: float = 0.5
    xi_r: float = 20.0
    xi_d: float = 20.0
    search_thresholds: bool = True
    n_sequences: int = 10_000
    n_realizations: int = 10_000
    relay_realizations: int = 1
    n_walkers: int = 1_000_000
    master_seed: int = 0
    workers: int | None = None
    per_bit: bool = False
    trace: bool = False
    corrupt_diffusion: float = 1.0
    output: str | None = None

    def __post_init__(self):
        problems = []
        if self.kind not in EXPERIMENT_KINDS:
            problems.append(f"unknown experiment kind {self.kind!r}")
        if self.engine not in _ENGINES:
            problems.append(f"engine must be one of {_ENGINES}")
        if not self.protocols:
            problems.append("protocol list is empty")
        for p in self.protocols:
            if p not in _PROTOCOL_NAMES:
                problems.append(
                    f"unknown protocol {p!r} (choose from {_PROTOCOL_NAMES})")
        if not self.thresholds:
            problems.append("threshold grid is empty")
        elif any(x < 0 for x in self.thresholds):
            problems.append("thresholds must be nonnegative")
        if not self.t_b_values:
            problems.append("bit-interval grid is empty")
        elif any(t <= 0 for t in self.t_b_values):
            problems.append("bit intervals must be positive")
        if self.m_samples < 1:
            problems.append("m_samples must be >= 1")
        if self.t0 <= 0:
            problems.append("t0 must be positive")
        if self.l_bits < 1:
            problems.append("l_bits must be >= 1")
        if not 0.0 <= self.p1 <= 1.0:
            problems.append("p1 must lie in [0, 1]")
        if min(self.n_sequences, self.n_realizations,
               self.relay_realizations, self.n_walkers) < 1:
            problems.append("realization counts must be >= 1")
        if self.corrupt_diffusion <= 0:
            problems.append("corrupt_diffusion must be positive")
        if problems:
            raise SpecError("; ".join(problems))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SpecError(f"unknown spec keys: {', '.join(unknown)}")
        coerced = dict(data)
        for key in ("protocols", "thresholds", "t_b_values"):
            if key in coerced and coerced[key] is not None:
                coerced[key] = tuple(coerced[key])
        try:
            return cls(**coerced)
        except TypeError as exc:
            raise SpecError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


# Bundled grids for the reference experiments, named by what they show:
#   relay-gain        two-hop FD1 against the direct baseline (two intervals)
#   duplex-modes      single-species duplex variants against the baseline
#   interval-scaling  half- vs full-duplex gap as the bit interval grows
PRESETS: dict[str, dict] = {
    "relay-gain": dict(kind="threshold-sweep",
                       protocols=("FD1", "Baseline"),
                       t_b_values=(200e-6, 400e-6),
                       m_samples=5, t0=20e-6),
    "duplex-modes": dict(kind="threshold-sweep",
                         protocols=("FD2", "HD", "FD-Adp", "Baseline"),
                         t_b_values=(400e-6,),
                         m_samples=5, t0=20e-6),
    "interval-scaling": dict(kind="interval-sweep",
                             protocols=("HD", "FD1"),
                             t_b_values=(200e-6, 400e-6, 600e-6,
                                         800e-6, 1000e-6),
                             m_samples=10, t0=10e-6),
}


def load_spec_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecError(f"spec file {path} must hold a JSON object")
    return data


def build_protocol(spec: ExperimentSpec, protocol: str, t_b: float,
                   xi_r: float | None = None,
                   xi_d: float | None = None) -> ProtocolConfig:
    cfg = default_two_hop_config(
        ProtocolKind(protocol), t_b=t_b, m_samples=spec.m_samples,
        t0=spec.t0, l_bits=spec.l_bits, p1=spec.p1,
        xi_r=spec.xi_r if xi_r is None else xi_r,
        xi_d=spec.xi_d if xi_d is None else xi_d)
    checked = validate_config(cfg)
    if isinstance(checked, list):
        msgs = "; ".join(f"{v.field_name}: {v.message}" for v in checked)
        raise SpecError(f"invalid protocol config ({protocol}): {msgs}")
    return checked


@dataclass(frozen=True)
class SweepRow:
    protocol: str
    t_b: float
    threshold: float
    analytics_error: float | None = None
    analytics_ci: float | None = None
    sim_error: float | None = None
    sim_ci: float | None = None
    per_bit_analytics: tuple[float, ...] | None = None
    per_bit_sim: tuple[float, ...] | None = None


def _null_progress(_msg: str) -> None:
    pass


def _sim_config(spec: ExperimentSpec, cfg: ProtocolConfig) -> SimConfig:
    return SimConfig(protocol=cfg, n_realizations=spec.n_realizations,
                     master_seed=spec.master_seed, workers=spec.workers)


def _row(spec: ExperimentSpec, protocol: str, t_b: float, threshold: float,
         ana: ErrorStats | None, sim: ErrorStats | None) -> SweepRow:
    def bits(stats):
        if stats is None or not spec.per_bit:
            return None
        return tuple(float(x) for x in stats.per_bit_error)

    return SweepRow(
        protocol=protocol, t_b=t_b, threshold=threshold,
        analytics_error=None if ana is None else ana.average_error,
        analytics_ci=None if ana is None else ana.ci_halfwidth,
        sim_error=None if sim is None else sim.average_error,
        sim_ci=None if sim is None else sim.ci_halfwidth,
        per_bit_analytics=bits(ana), per_bit_sim=bits(sim))


def cmd_sweep_threshold(spec: ExperimentSpec,
                        progress=_null_progress) -> list[SweepRow]:
    """Error versus a common detection threshold (xi_R = xi_D = xi; the
    adaptive kind treats xi as the fixed part), per protocol and interval."""
    rows = []
    for t_b in spec.t_b_values:
        for protocol in spec.protocols:
            cfg = build_protocol(spec, protocol, t_b)
            ana_stats: list[ErrorStats | None] = [None] * len(spec.thresholds)
            sim_stats: list[ErrorStats | None] = [None] * len(spec.thresholds)
            if spec.engine in ("analytics", "both"):
                progress(f"{protocol} t_b={t_b:g}: analytics sweep over "
                         f"{len(spec.thresholds)} thresholds")
                sweep = optimal_threshold_search(
                    cfg, spec.thresholds, n_sequences=spec.n_sequences,
                    master_seed=spec.master_seed,
                    relay_realizations=spec.relay_realizations)
                ana_stats = list(sweep.stats)
            if spec.engine in ("simulation", "both"):
                progress(f"{protocol} t_b={t_b:g}: particle sweep, "
                         f"{spec.n_realizations} realizations")
                sim_stats = list(estimate_error_sweep(
                    _sim_config(spec, cfg), spec.thresholds))
            rows.extend(
                _row(spec, protocol, t_b, xi, ana_stats[i], sim_stats[i])
                for i, xi in enumerate(spec.thresholds))
    return rows


def _best_threshold(spec: ExperimentSpec, cfg: ProtocolConfig):
    sweep = optimal_threshold_search(
        cfg, spec.thresholds, n_sequences=spec.n_sequences,
        master_seed=spec.master_seed,
        relay_realizations=spec.relay_realizations)
    return sweep.best_threshold, sweep.stats[sweep.best_index]


def cmd_sweep_interval(spec: ExperimentSpec,
                       progress=_null_progress) -> list[SweepRow]:
    """Error versus bit interval, each point at its own optimal threshold
    (found by closed-form grid search, reported for audit)."""
    rows = []
    for protocol in spec.protocols:
        for t_b in spec.t_b_values:
            cfg = build_protocol(spec, protocol, t_b)
            progress(f"{protocol} t_b={t_b:g}: threshold search over "
                     f"{len(spec.thresholds)} candidates")
            best_xi, best_stats = _best_threshold(spec, cfg)
            ana = best_stats if spec.engine in ("analytics", "both") else None
            sim = None
            if spec.engine in ("simulation", "both"):
                progress(f"{protocol} t_b={t_b:g}: particle run at "
                         f"threshold {best_xi:g}")
                sim = estimate_error(_sim_config(
                    spec, cfg.with_thresholds(xi_r=best_xi, xi_d=best_xi)))
            rows.append(_row(spec, protocol, t_b, best_xi, ana, sim))
    return rows


def cmd_compare_protocols(spec: ExperimentSpec,
                          progress=_null_progress) -> list[SweepRow]:
    """One row per protocol (and interval) at its optimal threshold, or at
    the spec's fixed thresholds when search is disabled."""
    rows = []
    for t_b in spec.t_b_values:
        for protocol in spec.protocols:
            cfg = build_protocol(spec, protocol, t_b)
            if spec.search_thresholds:
                progress(f"{protocol} t_b={t_b:g}: threshold search")
                best_xi, searched = _best_threshold(spec, cfg)
                cfg = cfg.with_thresholds(xi_r=best_xi, xi_d=best_xi)
            else:
                best_xi, searched = spec.xi_d, None
            ana = None
            if spec.engine in ("analytics", "both"):
                ana = searched if searched is not None else \
                    expected_error_stats(cfg, spec.n_sequences,
                                         spec.master_seed,
                                         spec.relay_realizations)
            sim = None
            if spec.engine in ("simulation", "both"):
                progress(f"{protocol} t_b={t_b:g}: particle run")
                sim = estimate_error(_sim_config(spec, cfg))
            rows.append(_row(spec, protocol, t_b, best_xi, ana, sim))
    return rows


def cmd_single_run(spec: ExperimentSpec, progress=_null_progress):
    """Both engines at one configuration, plus one fully resolved particle
    realization (with per-sample counts when tracing)."""
    protocol = spec.protocols[0]
    t_b = spec.t_b_values[0]
    cfg = build_protocol(spec, protocol, t_b)
    ana = None
    if spec.engine in ("analytics", "both"):
        progress(f"{protocol}: analytics over {spec.n_sequences} sequences")
        ana = expected_error_stats(cfg, spec.n_sequences, spec.master_seed,
                                   spec.relay_realizations)
    sim = None
    if spec.engine in ("simulation", "both"):
        progress(f"{protocol}: particle run, {spec.n_realizations} "
                 "realizations")
        sim = estimate_error(_sim_config(spec, cfg))
    detail = run_realization(
        SimConfig(protocol=cfg, n_realizations=1,
                  master_seed=spec.master_seed, trace=spec.trace,
                  workers=spec.workers), 0)
    extras = {
        "realization": {
            "source_bits": detail.source_bits.tolist(),
            "relay_detected": None if detail.relay_detected is None
            else detail.relay_detected.tolist(),
            "destination_detected": detail.destination_detected.tolist(),
            "error_indicators": detail.error_indicators.tolist(),
        }
    }
    if detail.trace is not None:
        extras["realization"]["counts_trace"] = detail.trace.tolist()
    rows = [_row(spec, protocol, t_b, spec.xi_d, ana, sim)]
    return rows, extras


# ---------------------------------------------------------------------------
# physics validation


@dataclass(frozen=True)
class PhysicsCheck:
    name: str
    observed: float
    expected: float
    deviation: float
    tolerance: float
    unit: str  # "sigma" | "absolute" | "relative"
    passed: bool


@dataclass(frozen=True)
class PhysicsReport:
    checks: tuple[PhysicsCheck, ...]
    passed: bool


def _walk_pool(species, n_walkers: int, start: Vec3, diffusion: float,
               total_time: float, n_steps: int, rng) -> MoleculePool:
    pool = emit(MoleculePool.empty(), species.id, n_walkers, start, 0.0)
    dt = total_time / n_steps
    for _ in range(n_steps):
        pool.positions[species.id] = brownian_step(
            pool.positions[species.id], diffusion, dt, rng)
    return pool


def cmd_validate_physics(spec: ExperimentSpec,
                         progress=_null_progress) -> PhysicsReport:
    """Monte Carlo walkers against the closed forms they must reproduce:
    observation probability at a distant sphere, self-observation inside the
    emitting sphere, the sub-threshold Poisson probability, and raw Brownian
    displacement moments.  corrupt_diffusion scales only the walkers'
    diffusion coefficient, leaving the closed forms alone — a fault-injection
    hook proving the checks can fail."""
    cfg = build_protocol(spec, "FD1", spec.t_b_values[0])
    d_true = cfg.species_a1.diffusion_coefficient
    d_sim = d_true * spec.corrupt_diffusion
    t_obs = spec.t0
    n = spec.n_walkers
    radius = cfg.destination.radius
    dist = cfg.source.position.distance_to(cfg.relay.position)
    checks = []

    def mc_check(name, observed_p, expected_p, n_trials):
        sigma = math.sqrt(max(expected_p * (1 - expected_p), 1e-300) / n_trials)
        dev = abs(observed_p - expected_p) / sigma
        checks.append(PhysicsCheck(name=name, observed=observed_p,
                                   expected=expected_p, deviation=dev,
                                   tolerance=3.0, unit="sigma",
                                   passed=dev <= 3.0))

    progress(f"walker ensemble vs observation probability ({n} walkers)")
    rng = np.random.default_rng(np.random.SeedSequence([spec.master_seed, 10]))
    pool = _walk_pool(cfg.species_a1, n, cfg.source.position, d_sim,
                      t_obs, 5, rng)
    hits = count_in_sphere(pool, cfg.species_a1.id, cfg.relay.position, radius)
    p_far = observation_probability(cfg.relay.volume, d_true, dist, t_obs)
    mc_check("observation-probability-mc", hits / n, p_far, n)

    progress("walker ensemble vs self-observation probability")
    rng = np.random.default_rng(np.random.SeedSequence([spec.master_seed, 11]))
    pool = _walk_pool(cfg.species_a1, n, cfg.relay.position, d_sim,
                      t_obs, 5, rng)
    hits = count_in_sphere(pool, cfg.species_a1.id, cfg.relay.position, radius)
    p_self = self_observation_probability(radius, d_true, t_obs)
    mc_check("self-observation-mc", hits / n, p_self, n)

    progress("self-observation closed form vs radial integration")
    from scipy.integrate import quad
    kernel_scale = (4.0 * math.pi * d_true * t_obs) ** -1.5

    def shell(r):
        return 4.0 * math.pi * r * r * kernel_scale * math.exp(
            -r * r / (4.0 * d_true * t_obs))

    integral, _ = quad(shell, 0.0, radius)
    abs_err = abs(integral - p_self)
    checks.append(PhysicsCheck(name="self-observation-integral",
                               observed=integral, expected=p_self,
                               deviation=abs_err, tolerance=1e-6,
                               unit="absolute", passed=abs_err <= 1e-6))

    progress("empirical Poisson tail vs regularized gamma")
    rng = np.random.default_rng(np.random.SeedSequence([spec.master_seed, 12]))
    mu, xi = 20.0, 20.0
    below = int((rng.poisson(mu, n) < math.ceil(xi)).sum())
    mc_check("poisson-below-threshold", below / n,
             poisson_cdf_below(mu, xi), n)

    progress("Brownian displacement moments")
    rng = np.random.default_rng(np.random.SeedSequence([spec.master_seed, 13]))
    n_steps = 5
    pool = _walk_pool(cfg.species_a1, n, cfg.source.position, d_sim,
                      t_obs, n_steps, rng)
    disp = pool.positions[cfg.species_a1.id]
    var_expected = 2.0 * d_true * t_obs
    var_observed = float((disp ** 2).mean())
    rel = abs(var_observed - var_expected) / var_expected
    checks.append(PhysicsCheck(name="brownian-variance",
                               observed=var_observed, expected=var_expected,
                               deviation=rel, tolerance=0.01,
                               unit="relative", passed=rel <= 0.01))
    mean_se = math.sqrt(var_expected / (3 * n))
    mean_dev = abs(float(disp.mean())) / mean_se
    checks.append(PhysicsCheck(name="brownian-mean",
                               observed=float(disp.mean()), expected=0.0,
                               deviation=mean_dev, tolerance=3.0,
                               unit="sigma", passed=mean_dev <= 3.0))

    return PhysicsReport(checks=tuple(checks),
                         passed=all(c.passed for c in checks))


# ---------------------------------------------------------------------------
# dispatch and output


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    rows: tuple[SweepRow, ...] = ()
    report: PhysicsReport | None = None
    extras: dict = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return self.report is None or self.report.passed


def run_experiment(spec: ExperimentSpec,
                   progress=_null_progress) -> ExperimentResult:
    if spec.kind == "threshold-sweep":
        return ExperimentResult(spec, tuple(cmd_sweep_threshold(spec, progress)))
    if spec.kind == "interval-sweep":
        return ExperimentResult(spec, tuple(cmd_sweep_interval(spec, progress)))
    if spec.kind == "compare-protocols":
        return ExperimentResult(spec, tuple(cmd_compare_protocols(spec, progress)))
    if spec.kind == "single-run":
        rows, extras = cmd_single_run(spec, progress)
        return ExperimentResult(spec, tuple(rows), extras=extras)
    if spec.kind == "validate-physics":
        return ExperimentResult(spec, report=cmd_validate_physics(spec, progress))
    raise SpecError(f"unknown experiment kind {spec.kind!r}")


_SWEEP_COLUMNS = ("protocol", "t_b", "threshold", "analytics_error",
                  "analytics_ci", "sim_error", "sim_ci")
_CHECK_COLUMNS = ("name", "observed", "expected", "deviation", "tolerance",
                  "unit", "passed")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(result: ExperimentResult) -> str:
    """Stable-column CSV ('.' decimals, no locale, empty cell = not run)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if result.report is not None:
        writer.writerow(_CHECK_COLUMNS)
        for c in result.report.checks:
            writer.writerow([_fmt(getattr(c, col)) for col in _CHECK_COLUMNS])
    else:
        writer.writerow(_SWEEP_COLUMNS)
        for r in result.rows:
            writer.writerow([_fmt(getattr(r, col)) for col in _SWEEP_COLUMNS])
    return out.getvalue()


def _row_dict(spec: ExperimentSpec, r: SweepRow) -> dict:
    d = {col: getattr(r, col) for col in _SWEEP_COLUMNS}
    if spec.per_bit:
        d["per_bit_analytics"] = None if r.per_bit_analytics is None \
            else list(r.per_bit_analytics)
        d["per_bit_sim"] = None if r.per_bit_sim is None \
            else list(r.per_bit_sim)
    return d


def render_json(result: ExperimentResult) -> str:
    spec = result.spec
    payload: dict = {"kind": spec.kind, "master_seed": spec.master_seed,
                     "spec": spec.to_dict()}
    if result.report is not None:
        payload["checks"] = [
            {col: getattr(c, col) for col in _CHECK_COLUMNS}
            for c in result.report.checks]
        payload["passed"] = result.report.passed
    else:
        payload["rows"] = [_row_dict(spec, r) for r in result.rows]
    payload.update(result.extras)
    _validate_payload(spec.kind, payload)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _schema_name(kind: str) -> str:
    return "physics-report.schema.json" if kind == "validate-physics" \
        else "sweep-result.schema.json"


def _validate_payload(kind: str, payload: dict) -> None:
    try:
        import jsonschema
    except ImportError:  # validation is a guard, not a hard dependency
        return
    from importlib.resources import files
    schema_text = files("mcrelay").joinpath(
        "schemas", _schema_name(kind)).read_text(encoding="utf-8")
    jsonschema.validate(payload, json.loads(schema_text))


def write_outputs(result: ExperimentResult, out_prefix) -> list[Path]:
    prefix = Path(out_prefix)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_suffix(".csv")
    json_path = prefix.with_suffix(".json")
    csv_path.write_text(render_csv(result), encoding="utf-8")
    json_path.write_text(render_json(result), encoding="utf-8")
    return [csv_path, json_path]
