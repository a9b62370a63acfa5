"""Command-line front end.

One subcommand per experiment kind.  Data goes to stdout (and to files with
--output); progress notes go to stderr so captured output stays clean.  Exit
codes: 0 success, 2 bad configuration or spec file, 3 runtime or validation
failure.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import EXPERIMENT_KINDS, PRESETS, ExperimentSpec, \
    SpecError, load_spec_file, render_csv, run_experiment, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3

_PROTOCOL_ALIASES = {
    "fd1": "FD1", "fd2": "FD2", "hd": "HD",
    "fd-adp": "FD-Adp", "fdadp": "FD-Adp", "baseline": "Baseline",
}


def parse_grid(text: str) -> tuple[float, ...]:
    """Grid syntax: 'lo:hi' (step 1), 'lo:hi:step' (inclusive within a half
    step), or a comma list of values."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError("expected lo:hi or lo:hi:step")
            lo, hi = float(parts[0]), float(parts[1])
            step = float(parts[2]) if len(parts) == 3 else 1.0
            if step <= 0 or hi < lo:
                raise ValueError("need hi >= lo and step > 0")
            n = int((hi - lo) / step + 0.5)
            return tuple(lo + k * step for k in range(n + 1))
        values = tuple(float(x) for x in text.split(",") if x.strip())
        if not values:
            raise ValueError("grid is empty")
        return values
    except ValueError as exc:
        raise SpecError(f"bad grid {text!r}: {exc}") from exc


def parse_protocols(text: str) -> tuple[str, ...]:
    names = []
    for raw in text.split(","):
        raw = raw.strip()
        if not raw:
            continue
        names.append(_PROTOCOL_ALIASES.get(raw.lower(), raw))
    return tuple(names)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--spec", metavar="FILE",
                     help="JSON experiment spec; flags given here override it")
    sub.add_argument("--preset", choices=sorted(PRESETS),
                     help="start from a bundled experiment definition")
    sub.add_argument("--protocols", type=parse_protocols, metavar="LIST",
                     help="comma list: FD1,FD2,HD,FD-Adp,Baseline")
    sub.add_argument("--engine", choices=("analytics", "simulation", "both"))
    sub.add_argument("--thresholds", type=parse_grid, metavar="GRID",
                     help="detection thresholds, e.g. 1:60 or 5,10,20")
    sub.add_argument("--t-b", dest="t_b_values", type=parse_grid,
                     metavar="GRID", help="bit intervals in seconds, "
                     "e.g. 200e-6,400e-6")
    sub.add_argument("--m-samples", type=int, metavar="M")
    sub.add_argument("--t0", type=float, metavar="SECONDS",
                     help="sample spacing within a bit interval")
    sub.add_argument("--l-bits", type=int, metavar="L",
                     help="information bits per sequence")
    sub.add_argument("--p1", type=float, help="prior probability of bit 1")
    sub.add_argument("--xi-r", type=float, help="relay threshold")
    sub.add_argument("--xi-d", type=float, help="destination threshold")
    sub.add_argument("--n-sequences", type=int,
                     help="sequences for the closed-form engine")
    sub.add_argument("--n-realizations", type=int,
                     help="realizations for the particle engine")
    sub.add_argument("--relay-realizations", type=int,
                     help="relay coin-toss realizations per sequence")
    sub.add_argument("--n-walkers", type=int,
                     help="walkers per physics-validation ensemble")
    sub.add_argument("--master-seed", type=int)
    sub.add_argument("--workers", type=int,
                     help="particle-engine threads (default: MCRELAY_WORKERS "
                     "or 1)")
    sub.add_argument("--per-bit", action="store_const", const=True,
                     help="include per-bit error arrays in JSON rows")
    sub.add_argument("--output", metavar="PREFIX",
                     help="write PREFIX.csv and PREFIX.json")
    sub.add_argument("--quiet", action="store_true",
                     help="suppress progress notes on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcrelay",
        description="Two-hop molecular-communication relay experiments: "
                    "closed-form error analytics and a particle-based "
                    "Brownian simulator.")
    subs = parser.add_subparsers(dest="kind", required=True,
                                 metavar="{" + ",".join(EXPERIMENT_KINDS) + "}")
    for kind, summary in (
        ("threshold-sweep", "error vs detection threshold"),
        ("interval-sweep",
         "error vs bit interval at per-point optimal thresholds"),
        ("compare-protocols", "protocols side by side at optimal thresholds"),
        ("validate-physics", "Monte Carlo vs closed-form physics checks"),
        ("single-run", "both engines at one configuration"),
    ):
        sub = subs.add_parser(kind, help=summary, description=summary)
        _add_common(sub)
        if kind == "compare-protocols":
            sub.add_argument("--no-search", dest="search_thresholds",
                             action="store_const", const=False,
                             help="use the fixed --xi-r/--xi-d instead of "
                             "searching")
        if kind == "single-run":
            sub.add_argument("--trace", action="store_const", const=True,
                             help="include per-sample counts of the dumped "
                             "realization")
        if kind == "validate-physics":
            sub.add_argument("--corrupt-diffusion", type=float,
                             metavar="FACTOR",
                             help="fault-injection hook: scale the walkers' "
                             "diffusion coefficient (closed forms keep the "
                             "true value)")
    return parser


_NON_SPEC_ARGS = {"kind", "spec", "preset", "quiet"}


def assemble_spec(args: argparse.Namespace) -> ExperimentSpec:
    data: dict = {}
    if args.preset:
        preset = PRESETS[args.preset]
        if preset["kind"] != args.kind:
            raise SpecError(f"preset {args.preset!r} is a {preset['kind']} "
                            f"experiment, not {args.kind}")
        data.update(preset)
    if args.spec:
        file_data = load_spec_file(args.spec)
        file_kind = file_data.get("kind", args.kind)
        if file_kind != args.kind:
            raise SpecError(f"spec file declares kind {file_kind!r} but the "
                            f"{args.kind} subcommand was invoked")
        data.update(file_data)
    for key, value in vars(args).items():
        if key not in _NON_SPEC_ARGS and value is not None:
            data[key] = value
    data["kind"] = args.kind
    data.pop("output", None)
    spec = ExperimentSpec.from_dict(data)
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    def progress(msg: str) -> None:
        if not args.quiet:
            print(f"# {msg}", file=sys.stderr, flush=True)

    try:
        spec = assemble_spec(args)
    except SpecError as exc:
        print(f"mcrelay: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(spec, progress)
        sys.stdout.write(render_csv(result))
        if result.report is not None:
            print("RESULT: " + ("PASS" if result.report.passed else "FAIL"))
        if args.output:
            for path in write_outputs(result, args.output):
                progress(f"wrote {path}")
    except SpecError as exc:
        print(f"mcrelay: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surface as the runtime-failure exit code
        print(f"mcrelay: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if not result.succeeded:
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
