"""Command-line entry point: ``uguess {parse,sample,attack,exponent,verify}``.

Every run prints a one-line JSON manifest (seed, versions, config echo) on
stdout. Data follows the manifest on stdout, or goes to ``--output``, written
to a temp file and renamed into place. Errors exit nonzero with a JSON object
on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import exponent_sweep
from .guesswork import attack_trials
from .lz_parse import joint_parse, lz78_parse
from .sources import Alphabet, JointHiddenMarkovSource, load_source
from .strategies import get_strategy
from .verify import SUITES, run_suites

SEED_ENV = "UGUESS_SEED"
SAMPLE_STRATEGIES = ("kt", "kt-si", "lz-tree", "lz-bits", "lz-cond")
ATTACK_STRATEGIES = SAMPLE_STRATEGIES
EXPONENT_STRATEGIES = ("list-probability", "list-entropy", "list-lz", "kt", "lz-tree", "lz-bits",
                       "lz-complexity", "lz-complexity-tail")


class CLIError(Exception):
    """Invalid configuration; reported as JSON on stderr."""


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    seed_origin: str
    source_file: str | None = None
    strategies: list[str] = field(default_factory=list)
    n_list: list[int] = field(default_factory=list)
    rho_list: list[float] = field(default_factory=list)
    trials: int | None = None
    output: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise CLIError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.source_file is not None and not Path(self.source_file).is_file():
            raise CLIError(f"source file not found: {self.source_file}")
        if self.format not in ("csv", "json"):
            raise CLIError(f"unknown format {self.format!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _str_list(text: str) -> list[str]:
    return [v for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uguess", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default: ${SEED_ENV}, else 0)")
    common.add_argument("--output", help="write data here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="LZ78 parse of a sequence")
    p.add_argument("sequence", help="sequence written with the alphabet's characters")
    p.add_argument("--alphabet", default="01", help="alphabet characters in index order")
    p.add_argument("--si", help="side-information sequence for the joint parse")
    p.add_argument("--si-alphabet", default="01")

    p = sub.add_parser("sample", parents=[common], help="draw guesses from a strategy")
    p.add_argument("--strategy", required=True, choices=SAMPLE_STRATEGIES)
    p.add_argument("--n", type=int, help="guess length (taken from the SI when given)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--alphabet", default="01")
    p.add_argument("--si-file", help="file holding the side-information sequence")
    p.add_argument("--si-alphabet", default="01")
    p.add_argument("--explain", help="write per-guess exact log2-probabilities to this JSON file")

    p = sub.add_parser("attack", parents=[common], help="simulate K-agent randomized attacks")
    p.add_argument("--source-file", help="source JSON (secret drawn from it when --secret is absent)")
    p.add_argument("--secret", help="fixed secret sequence")
    p.add_argument("--alphabet", default="01", help="alphabet for --secret without a source file")
    p.add_argument("--n", type=int, help="secret length when drawn from the source")
    p.add_argument("--strategy", required=True, choices=ATTACK_STRATEGIES)
    p.add_argument("--agents", type=int, default=1)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-queries", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", default="csv", choices=("csv", "json"))

    p = sub.add_parser("exponent", parents=[common], help="measured vs theoretical exponents")
    p.add_argument("--source-file", required=True)
    p.add_argument("--rho", type=_float_list, default=[1.0], help="comma-separated rho values")
    p.add_argument("--n", type=_int_list, default=[4, 8, 12], help="comma-separated lengths")
    p.add_argument("--strategies", type=_str_list, default=["list-probability", "list-entropy", "list-lz"])
    p.add_argument("--format", default="csv", choices=("csv", "json"))

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--suites", type=_str_list, default=list(SUITES))
    return parser


def _resolve_seed(arg: int | None) -> tuple[int, str]:
    if arg is not None:
        return arg, "flag"
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env), f"env:{SEED_ENV}"
        except ValueError:
            raise CLIError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0, "default"


def manifest(config: ExperimentConfig) -> dict:
    return {
        "manifest": {
            "tool": "uguess",
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "seed": config.seed,
            "seed_origin": config.seed_origin,
            "config": asdict(config),
        }
    }


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: "" if r[k] is None else r[k] for k in columns})
    return buf.getvalue()


def _render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    return _csv(rows, columns)


# ---------------------------------------------------------------------------
# Subcommands; each returns the data text


def cmd_parse(args, config: ExperimentConfig) -> str:
    alphabet = Alphabet.of(list(args.alphabet))
    x = alphabet.encode(args.sequence)
    if args.si is None:
        result = lz78_parse(x)
        out = {"c": result.c, "code_length": result.code_length,
               "last_complete": result.last_complete,
               "phrases": ["".join(alphabet.symbols[s] for s in p) for p in result.phrase_strings()]}
        if result.tail is not None:
            out["tail"] = "".join(alphabet.symbols[s] for s in result.phrase(result.tail))
        return json.dumps(out) + "\n"
    y = Alphabet.of(list(args.si_alphabet)).encode(args.si)
    result = joint_parse(x, y)
    return json.dumps({"c_xy": result.c_xy, "c_y": result.c_y, "u": result.u,
                       "conditional_code_length": result.conditional_code_length}) + "\n"


def _read_si(args):
    if args.si_file is None:
        return None
    text = Path(args.si_file).read_text().strip()
    return Alphabet.of(list(args.si_alphabet)).encode(text)


def cmd_sample(args, config: ExperimentConfig) -> str:
    strat = get_strategy(args.strategy)
    alphabet = Alphabet.of(list(args.alphabet))
    y = _read_si(args)
    if strat.needs_si and y is None:
        raise CLIError(f"strategy {args.strategy!r} needs --si-file")
    n = len(y) if y is not None else args.n
    if n is None or n < 1:
        raise CLIError("--n must be a positive integer")
    if args.count < 1:
        raise CLIError("--count must be positive")
    rng = np.random.default_rng(config.seed)
    guess = strat.guesser(alphabet, rng, n=n, y=y)
    guesses = [guess() for _ in range(args.count)]
    if args.explain:
        records = []
        for g in guesses:
            logp = strat.log_prob(g, y) if strat.needs_si else strat.log_prob(g)
            records.append({"guess": str(g), "log2_prob": logp})
        write_atomic(args.explain, json.dumps({"strategy": args.strategy, "n": n, "guesses": records},
                                              indent=2) + "\n")
    return "".join(str(g) + "\n" for g in guesses)


def cmd_attack(args, config: ExperimentConfig) -> str:
    if args.agents < 1 or args.trials < 1:
        raise CLIError("--agents and --trials must be positive")
    strat = get_strategy(args.strategy)
    y = None
    if args.secret is not None:
        alphabet = Alphabet.of(list(args.alphabet))
        if args.source_file:
            alphabet = load_source(args.source_file)
            alphabet = alphabet.x_alphabet if isinstance(alphabet, JointHiddenMarkovSource) else alphabet.alphabet
        secret = alphabet.encode(args.secret)
        if strat.needs_si:
            raise CLIError("side-information strategies draw (secret, SI) from a joint --source-file")
    else:
        if not args.source_file or not args.n:
            raise CLIError("give --secret, or --source-file with --n")
        source = load_source(args.source_file)
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(2 ** 32,)))
        if isinstance(source, JointHiddenMarkovSource):
            secret, y = source.generate(args.n, rng)
        else:
            if strat.needs_si:
                raise CLIError(f"strategy {args.strategy!r} needs a joint source")
            secret = source.generate(args.n, rng)
        if not strat.needs_si:
            y = None
    summary = attack_trials(secret, args.strategy, args.agents, args.trials, config.seed,
                            max_queries=args.max_queries, y=y, workers=args.workers)
    rows = [{"trial": t, "total_queries": tr.total_queries, "rounds": tr.rounds,
             "success": int(tr.success)} for t, tr in enumerate(summary.traces)]
    config.extra["secret"] = str(secret)
    return _render(rows, ["trial", "total_queries", "rounds", "success"], args.format)


def cmd_exponent(args, config: ExperimentConfig) -> str:
    unknown = [s for s in args.strategies if s not in EXPONENT_STRATEGIES]
    if unknown:
        raise CLIError(f"unknown strategies {unknown}; choose from {list(EXPONENT_STRATEGIES)}")
    source = load_source(args.source_file)
    if isinstance(source, JointHiddenMarkovSource):
        raise CLIError("exponent expects a single-sequence source")
    rows = exponent_sweep(source, args.rho, args.n, args.strategies)
    return _render(rows, ["strategy", "n", "rho", "measured", "theory", "gap"], args.format)


def cmd_verify(args, config: ExperimentConfig) -> str:
    results = run_suites(args.suites)
    config.extra["all_passed"] = all(r.passed for r in results)
    return json.dumps({"passed": config.extra["all_passed"],
                       "suites": [r.to_dict() for r in results]}, indent=2) + "\n"


COMMANDS = {"parse": cmd_parse, "sample": cmd_sample, "attack": cmd_attack,
            "exponent": cmd_exponent, "verify": cmd_verify}


def _config_from(args, seed: int, origin: str) -> ExperimentConfig:
    strategies = getattr(args, "strategies", None) or ([args.strategy] if hasattr(args, "strategy") else [])
    n_arg = getattr(args, "n", None)
    extra = {k: v for k, v in vars(args).items()
             if k not in {"command", "seed", "source_file", "strategies", "strategy", "n", "rho",
                          "trials", "output", "format"} and v is not None}
    return ExperimentConfig(
        command=args.command, seed=seed, seed_origin=origin,
        source_file=getattr(args, "source_file", None),
        strategies=list(strategies),
        n_list=list(n_arg) if isinstance(n_arg, list) else ([n_arg] if n_arg is not None else []),
        rho_list=list(getattr(args, "rho", None) or []),
        trials=getattr(args, "trials", None),
        output=args.output, format=getattr(args, "format", "csv"), extra=extra)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed, origin = _resolve_seed(args.seed)
        config = _config_from(args, seed, origin)
        config.validate()
        data = COMMANDS[args.command](args, config)
        header = json.dumps(manifest(config), sort_keys=True)
        if args.output:
            write_atomic(args.output, data)
            sys.stdout.write(header + "\n")
        else:
            sys.stdout.write(header + "\n" + data)
        sys.stdout.flush()
        if args.command == "verify" and not config.extra["all_passed"]:
            return 1
        return 0
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except (CLIError, ValueError, OSError, KeyError) as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
