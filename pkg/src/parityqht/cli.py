from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from parityqht.config import ConfigError, Settings, load_settings
from parityqht.linalg import NumericalError, ResourceLimitError, ValidationError
from parityqht.parity import UnsupportedCaseError
from parityqht.records import render, write_records
from parityqht.states import Hypothesis, MaxMixed, PureQubit
from parityqht.sweep import (
    PointComputed,
    SweepComplete,
    SweepStarted,
    chernoff_record,
    critical_record,
    grid_plan,
    random_pairs,
    run_sweep,
    twirl_record,
)
from parityqht.testing import validate_eps
from parityqht.types import RecordDict

logger = logging.getLogger(__name__)

COMMANDS = ("twirl", "beta", "dhe", "critical-n", "theorem1", "theorem3", "sweep", "chernoff")

_ANGLE = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?$")


class UsageError(ValueError):
    """Raised when flags are individually valid but do not fit together. Caller decides how to display."""


# --- flag parsing ---


def parse_angle(text: str) -> float:
    """Radians from ``pi``, ``pi/2``, ``3pi/4``, ``-pi`` or a decimal."""
    s = text.strip().lower().replace(" ", "")
    m = _ANGLE.match(s)
    if m:
        coeff, denom = m.groups()
        if coeff in ("", "+"):
            factor = 1.0
        elif coeff == "-":
            factor = -1.0
        else:
            factor = float(coeff)
        return factor * math.pi / (float(denom) if denom else 1.0)
    try:
        value = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle '{text}' (use pi, pi/2 or radians)") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite, got '{text}'")
    return value


def parse_n_range(text: str) -> list[int]:
    a, sep, b = text.partition(":")
    try:
        lo, hi = int(a), int(b if sep else a)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid n range '{text}' (expected a:b)") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid n range '{text}' (need 1 <= a <= b)")
    return list(range(lo, hi + 1))


def parse_eps_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid eps list '{text}'") from None


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid probability '{text}'") from None
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


# --- run configuration ---


@dataclass(frozen=True)
class RunConfig:
    command: str
    null: Hypothesis | None = None
    alt: Hypothesis | None = None
    ns: tuple[int, ...] = ()
    epss: tuple[float, ...] = ()
    tol: float | None = None
    oracle: bool = False
    fmt: str = "csv"
    out: Path | None = None
    seed: int = 0
    jobs: int = 1
    random_pairs: int = 0
    config_path: Path | None = None
    p: float | None = None
    maxmixed_null: bool = False


def _null_from_args(args) -> Hypothesis | None:
    given = [args.p is not None, args.null_basis is not None, args.maxmixed_null]
    if sum(given) > 1:
        raise UsageError("give only one of --p/--null-p, --null-basis, --maxmixed-null")
    if args.p is not None:
        return PureQubit(args.p)
    if args.null_basis is not None:
        return PureQubit.basis(args.null_basis)
    if args.maxmixed_null:
        return MaxMixed()
    return None


def _alt_from_args(args) -> Hypothesis | None:
    given = [args.q is not None, args.alt_basis is not None, args.maxmixed_alt]
    if sum(given) > 1:
        raise UsageError("give only one of --q/--alt-p, --alt-basis, --maxmixed-alt")
    if args.phi is not None and args.q is None:
        raise UsageError("--phi sets the phase of the alternative and needs --q/--alt-p")
    if args.q is not None:
        return PureQubit(args.q, args.phi or 0.0)
    if args.alt_basis is not None:
        return PureQubit.basis(args.alt_basis)
    if args.maxmixed_alt:
        return MaxMixed()
    return None


def config_from_args(args) -> RunConfig:
    ns: list[int] = []
    if args.n is not None and args.n_range is not None:
        raise UsageError("give --n or --n-range, not both")
    if args.n is not None:
        ns = [args.n]
    elif args.n_range is not None:
        ns = args.n_range
    if args.eps is not None and args.eps_list is not None:
        raise UsageError("give --eps or --eps-list, not both")
    epss = [args.eps] if args.eps is not None else (args.eps_list or [])
    # theorem3 fixes the maximally mixed side itself; --p names the pure state
    if args.command == "theorem3":
        null, alt = None, None
    else:
        null, alt = _null_from_args(args), _alt_from_args(args)
    return RunConfig(
        command=args.command,
        null=null,
        alt=alt,
        ns=tuple(ns),
        epss=tuple(validate_eps(e) for e in epss),
        tol=args.tol,
        oracle=args.oracle,
        fmt=args.format,
        out=Path(args.out) if args.out else None,
        seed=args.seed,
        jobs=args.jobs,
        random_pairs=args.random_pairs or 0,
        config_path=Path(args.config) if args.config else None,
        p=args.p,
        maxmixed_null=args.maxmixed_null,
    )


def _require(value, message: str):
    if value is None or value == ():
        raise UsageError(message)
    return value


# --- commands ---


def _grid_records(config: RunConfig, settings: Settings, command: str, pairs) -> list[RecordDict]:
    plan = grid_plan(
        command,
        pairs,
        list(_require(config.ns, f"{config.command} needs --n or --n-range")),
        list(_require(config.epss, f"{config.command} needs --eps or --eps-list")),
        oracle=config.oracle,
        jobs=config.jobs,
        tol=settings.classify_tol,
        max_qubits=settings.max_dense_qubits,
        max_points=settings.max_grid_points,
        max_critical_iterations=settings.max_critical_iterations,
        max_search_iterations=settings.max_search_iterations,
        duality_tol=settings.duality_tol,
    )
    records = []
    for event in run_sweep(plan):
        if isinstance(event, SweepStarted):
            logger.info("evaluating %d points with %d worker(s)", event.points, event.jobs)
        elif isinstance(event, PointComputed):
            records.append(event.record)
        elif isinstance(event, SweepComplete):
            logger.info("sweep complete: %d records", event.total_points)
    return records


def _pair(config: RunConfig) -> tuple[Hypothesis, Hypothesis]:
    h0 = _require(config.null, f"{config.command} needs a null state (--p, --null-basis or --maxmixed-null)")
    h1 = _require(config.alt, f"{config.command} needs an alternative state (--q, --alt-basis or --maxmixed-alt)")
    return h0, h1


def cmd_twirl(config: RunConfig, settings: Settings) -> list[RecordDict]:
    psi = config.null
    if not isinstance(psi, PureQubit):
        raise UsageError("twirl needs a pure state (--p or --null-basis)")
    ns = _require(config.ns, "twirl needs --n or --n-range")
    if config.oracle and max(ns) > settings.max_dense_qubits:
        raise ResourceLimitError(f"dense oracle requested for n={max(ns)}, above the cap of {settings.max_dense_qubits} qubits")
    return [twirl_record(psi, n, config.oracle, settings.max_dense_qubits) for n in ns]


def cmd_critical_n(config: RunConfig, settings: Settings) -> list[RecordDict]:
    h0, h1 = _pair(config)
    epss = _require(config.epss, "critical-n needs --eps or --eps-list")
    return [
        critical_record(h0, h1, eps, settings.classify_tol, settings.max_critical_iterations)
        for eps in sorted(epss)
    ]


def cmd_theorem3(config: RunConfig, settings: Settings) -> list[RecordDict]:
    if config.p is None:
        raise UsageError("theorem3 needs --p for the pure state")
    psi = PureQubit(config.p)
    pair = (MaxMixed(), psi) if config.maxmixed_null else (psi, MaxMixed())
    return _grid_records(config, settings, "theorem3", [pair])


def cmd_sweep(config: RunConfig, settings: Settings) -> list[RecordDict]:
    if config.random_pairs:
        if config.null is not None or config.alt is not None:
            raise UsageError("--random-pairs replaces the state flags")
        pairs = random_pairs(config.random_pairs, config.seed)
    else:
        pairs = [_pair(config)]
    return _grid_records(config, settings, "sweep", pairs)


def cmd_chernoff(config: RunConfig, settings: Settings) -> list[RecordDict]:
    h0, h1 = _pair(config)
    return [chernoff_record(h0, h1, settings.classify_tol)]


def run(config: RunConfig, settings: Settings) -> list[RecordDict]:
    """Execute one command and return its records."""
    if config.command == "twirl":
        return cmd_twirl(config, settings)
    elif config.command in ("beta", "dhe"):
        return _grid_records(config, settings, config.command, [_pair(config)])
    elif config.command == "theorem1":
        h0, h1 = _pair(config)
        if not (isinstance(h0, PureQubit) and isinstance(h1, PureQubit)):
            raise UsageError("theorem1 needs two pure states")
        return _grid_records(config, settings, "theorem1", [(h0, h1)])
    elif config.command == "critical-n":
        return cmd_critical_n(config, settings)
    elif config.command == "theorem3":
        return cmd_theorem3(config, settings)
    elif config.command == "sweep":
        return cmd_sweep(config, settings)
    elif config.command == "chernoff":
        return cmd_chernoff(config, settings)
    raise UsageError(f"unknown command '{config.command}'")


# --- parser ---


def _add_state_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", "--null-p", dest="p", type=_probability, help="Null state weight on |0>")
    parser.add_argument("--q", "--alt-p", dest="q", type=_probability, help="Alternative state weight on |0>")
    parser.add_argument("--phi", type=parse_angle, help="Relative phase of the alternative (pi, pi/2 or radians)")
    parser.add_argument("--null-basis", type=int, choices=(0, 1), help="Null state is |0> or |1>")
    parser.add_argument("--alt-basis", type=int, choices=(0, 1), help="Alternative state is |0> or |1>")
    parser.add_argument("--maxmixed-null", action="store_true", help="Null state is I/2")
    parser.add_argument("--maxmixed-alt", action="store_true", help="Alternative state is I/2")


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=_positive_int, help="Number of copies")
    parser.add_argument("--n-range", type=parse_n_range, help="Copies as a:b (inclusive)")
    parser.add_argument("--eps", type=float, help="Type-I error level in (0, 1)")
    parser.add_argument("--eps-list", type=parse_eps_list, help="Comma-separated eps values")
    parser.add_argument("--tol", type=float, help="Classification tolerance (default 1e-12)")
    parser.add_argument("--oracle", action="store_true", help="Also compute the dense brute-force value")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="Output format (default: csv)")
    parser.add_argument("--out", help="Write output to this path instead of stdout")
    parser.add_argument("--seed", type=int, default=0, help="Seed for randomized pairs (default: 0)")
    parser.add_argument("--jobs", type=_positive_int, default=1, help="Worker threads for grids (default: 1)")
    parser.add_argument("--random-pairs", type=_positive_int, help="sweep: draw this many random pure pairs")
    parser.add_argument("--config", help="JSON settings file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parityqht",
        description="Quantum hypothesis testing under parity-invariant measurements",
    )
    subparsers = parser.add_subparsers(dest="command")
    helps = {
        "twirl": "Twirl weights of an n-copy pure state",
        "beta": "Minimal type-II error under parity-invariant tests",
        "dhe": "Hypothesis-testing relative entropy under parity-invariant tests",
        "critical-n": "Critical number of copies for zero type-II error",
        "theorem1": "Restricted beta with case classification for two pure states",
        "theorem3": "Pure state against the maximally mixed state, closed form vs numerics",
        "sweep": "Grid over n and eps",
        "chernoff": "Single-copy Chernoff exponent and relative entropy",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=helps[name])
        _add_state_args(sub)
        _add_run_args(sub)
    return parser


def main(argv: list[str] | None = None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        config = config_from_args(args)
        settings = load_settings(Path.cwd(), config.config_path)
        if config.tol is not None:
            if not config.tol > 0:
                raise UsageError(f"--tol must be positive, got {config.tol}")
            settings = replace(settings, classify_tol=config.tol)
        records = run(config, settings)
    except (UsageError, ValidationError, UnsupportedCaseError, ConfigError, ResourceLimitError) as e:
        print(f"Error: {e}", file=sys.stderr)
        raise SystemExit(2)
    except NumericalError as e:
        print(f"Error: {e}", file=sys.stderr)
        diagnostic = {"command": args.command, "error": str(e), "diagnostics": e.diagnostics}
        sys.stdout.write(json.dumps(diagnostic, indent=2, default=str) + "\n")
        raise SystemExit(1)

    if config.out is None:
        sys.stdout.write(render(records, settings.tolerances(), config.fmt))
    else:
        write_records(config.out, records, settings.tolerances(), config.fmt)
        print(f"Wrote {len(records)} records to {config.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
