"""Command-line interface: ``snash {solve,experiment,criteria}``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numeric failure.

A multi-objective problem can be handled by duplicating Nature's scenarios
once per objective (each copy scoring the policy on one objective) and
solving the resulting single-objective game; write that matrix to CSV and
use ``--game csv:<path>``.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import harness
from .criteria import EXACT_MAX_ARMS, exact_nash_small, savage, wald
from .errors import ConfigError, NumericError
from .game import load_csv_matrix
from .sparsify import DecisionReport

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _add_game_options(p: argparse.ArgumentParser, many: bool) -> None:
    p.add_argument("--game", default="power", help="power | power-modified | csv:<path>")
    p.add_argument("--algo", choices=("exp3p", "texp3p"), default="texp3p")
    p.add_argument("--params", choices=("practical", "theoretical"), default="theoretical")
    p.add_argument("--T", dest="T", default="mult:8",
                   help="horizon: integer or mult:m for m*ceil(K/10)" + ("; comma list" if many else ""))
    p.add_argument("--alpha", default="0.7",
                   help="truncation exponent(s) in (0, 1]" + ("; comma list, 'none' = untruncated" if many else ""))
    p.add_argument("--cost", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0, help="weight of the indicator bonus in R'")
    p.add_argument("--normalize", action="store_true", help="min-max normalize rewards")
    p.add_argument("--rprime-neq-as-eq", action="store_true", help="read '~=' in R' as '=='")
    p.add_argument("--noise", choices=("stochastic", "expected"), default="stochastic")
    p.add_argument("--scaling", choices=sorted(harness.SCALINGS), default=None,
                   help="rewards fed to the bandits (default row-raw)")
    p.add_argument("--eval-trials", type=int, default=10_000)
    p.add_argument("--eval-opponent", choices=("uniform", "nash"), default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("--dest", default="-", help="output path ('-' = stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snash", description="Sparse Nash decisions under uncertainty.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="one SNash run; emits the decision report")
    _add_game_options(solve, many=False)
    solve.add_argument("--learnings", type=int, default=1, help="accepted for symmetry; solve runs one learning")
    solve.add_argument("--top", type=int, default=harness.REPORT_TOP, help="rows/columns of the submatrix shown")

    exp = sub.add_parser("experiment", help="repeated learnings over an (alpha, T) grid")
    _add_game_options(exp, many=True)
    exp.add_argument("--learnings", type=int, default=10)
    exp.add_argument("--progress", action="store_true", help="log each learning to stderr")

    crit = sub.add_parser("criteria", help="Wald, Savage and (small games) exact Nash on a CSV matrix")
    crit.add_argument("matrix", help="CSV file, rows = policies, columns = scenarios")
    crit.add_argument("--out", choices=("json", "csv"), default="json")
    crit.add_argument("--dest", default="-")
    return parser


def _experiment_config(args, horizons, alphas) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        game=args.game, algorithm=args.algo, parametrization=args.params, horizons=horizons,
        alphas=alphas, learnings=args.learnings, eval_trials=args.eval_trials, cost=args.cost,
        c=args.c, normalize=args.normalize, neq_as_eq=args.rprime_neq_as_eq, noise=args.noise,
        eval_opponent=args.eval_opponent, seed=args.seed, scaling=args.scaling,
    )


def _solve(args) -> int:
    alphas = [harness.parse_alpha(a) for a in _split(args.alpha)]
    if len(alphas) != 1 or len(_split(args.T)) != 1:
        raise ConfigError("solve takes a single --T and a single --alpha")
    cfg = _experiment_config(args, (args.T,), alphas)
    game = cfg.build_game()
    T = cfg.resolved_horizons(game.num_policies)[0]
    report, metrics = harness.run_learning(cfg, cfg.alphas[0], T, cfg.seed, game=game)
    if args.out == "json":
        doc = {"schema_version": harness.SCHEMA_VERSION, "config": cfg.echo(),
               "metrics": metrics, "report": harness.summarize_report(report, args.top)}
        harness.write_text(harness.dumps_json(doc) + "\n", args.dest)
    else:
        harness.write_text(_report_csv(report, args.top), args.dest)
    return EXIT_OK


def _report_csv(report: DecisionReport, top: int) -> str:
    """Ranked policies as rows, ranked scenarios as columns, expected rewards inside."""
    sub = report.top_submatrix(top, top)
    scen = report.scenarios[:top]
    lines = ["policy,probability," + ",".join(f"s{j}" for j, _ in scen)]
    lines.append(",scenario_probability," + ",".join(harness.format_number(q) for _, q in scen))
    for (i, p), row in zip(report.policies[:top], sub):
        lines.append(f"{i},{harness.format_number(p)}," + ",".join(harness.format_number(x) for x in row))
    return "\n".join(lines) + "\n"


def _experiment(args) -> int:
    alphas = [harness.parse_alpha(a) for a in _split(args.alpha)]
    cfg = _experiment_config(args, _split(args.T), alphas)
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.progress else None
    report = harness.run_experiment(cfg, progress=progress)
    harness.emit_report(report, args.out, args.dest)
    return EXIT_NUMERIC if report.failed else EXIT_OK


def _criteria(args) -> int:
    m = load_csv_matrix(args.matrix)
    w, s = wald(m), savage(m)
    result = {
        "shape": list(m.shape),
        "wald": {"value": w.value, "policies": list(w.policies)},
        "savage": {"value": s.value, "policies": list(s.policies)},
    }
    K, S = m.shape
    if K <= EXACT_MAX_ARMS and S <= EXACT_MAX_ARMS:
        eq = exact_nash_small(m)
        result["nash"] = {"value": eq.value, "row": eq.row.tolist(), "col": eq.col.tolist()}
    else:
        result["nash"] = None
        result["note"] = f"exact Nash is limited to {EXACT_MAX_ARMS}x{EXACT_MAX_ARMS} games"
    if args.out == "json":
        harness.write_text(harness.dumps_json(result) + "\n", args.dest)
    else:
        f = harness.format_number
        lines = ["criterion,value,policies"]
        lines.append(f"wald,{f(w.value)},{' '.join(map(str, w.policies))}")
        lines.append(f"savage,{f(s.value)},{' '.join(map(str, s.policies))}")
        if result["nash"] is not None:
            lines.append(f"nash,{f(result['nash']['value'])},"
                         + " ".join(f(x) for x in result["nash"]["row"]))
        harness.write_text("\n".join(lines) + "\n", args.dest)
    return EXIT_OK


COMMANDS = {"solve": _solve, "experiment": _experiment, "criteria": _criteria}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
