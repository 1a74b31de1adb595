"""Repeated-learning experiments and their JSON/CSV reports.

An experiment is a grid of horizons ``T`` times truncation exponents
``alpha``.  For every horizon, ``learnings`` independent self-play runs are
made; each run is truncated at every alpha of the grid (truncation is a
post-processing of the empirical play counts, so one run serves all alphas)
and then evaluated:

* sparsity level: support size of the recommended row strategy;
* reward: mean stochastic reward over ``eval_trials`` i.i.d. plays against
  the uniform scenario distribution (or Nature's learned strategy);
* robust score: exact ``min_s E_p R(., s)`` over all scenarios.

``alpha=None`` in the grid stands for the untruncated recommendation
(plain Exp3.P empirical frequencies).
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .bandit import SCALINGS, BanditConfig, NashApproximation, self_play_nash
from .criteria import proxy_exploitability, robust_score
from .errors import ConfigError, NumericError
from .game import MatrixGame, RewardOracle, load_csv_matrix, normalize_matrix
from .power import PowerGame, PowerModelConfig
from .sparsify import NON_SPARSE, NON_TRUNCATED, DecisionReport, report_from, truncate_approximation

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "alpha", "T", "sparsity_mean", "sparsity_sd", "reward_mean", "reward_sd",
    "robust_mean", "robust_sd", "proxy_exploitability", "n_non_truncated",
    "n_non_sparse", "seconds",
)
TIMING_FIELDS = ("seconds", "learning_seconds")
REPORT_TOP = 10

OPPONENT_LABELS = {
    "uniform": "mean reward against the uniform scenario distribution",
    "nash": "mean reward against Nature's learned (truncated) strategy",
}
LABEL_NOTES = (
    "The evaluation text of the benchmark protocol reads 'against the uniform policy' while the "
    "reward table header reads 'against pure strategies'; the opponent used here is given by "
    "eval_opponent.",
    "The +- convention of the published tables is unstated; *_sd fields are sample standard "
    "deviations (ddof=1) over learnings, 0 for a single learning.",
    "robust score = min over all pure scenarios of the expected (noise-free) reward, computed "
    "exactly; proxy_exploitability = cell robust_mean minus the smallest robust_mean among the "
    "cells sharing the same T.",
)


# --- configuration ------------------------------------------------------------


def parse_horizon(spec: Union[int, str], num_policies: int) -> int:
    """``T`` from an absolute count or ``"mult:m"`` meaning ``m * ceil(K / 10)``."""
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("mult:"):
            try:
                m = float(text[5:])
            except ValueError:
                raise ConfigError(f"bad horizon multiplier {spec!r}") from None
            T = m * math.ceil(num_policies / 10)
            if T != int(T):
                raise ConfigError(f"horizon {spec!r} is not an integer for K={num_policies}")
            T = int(T)
        else:
            try:
                T = int(text)
            except ValueError:
                raise ConfigError(f"bad horizon {spec!r}") from None
    else:
        T = int(spec)
        if T != spec:
            raise ConfigError(f"horizon {spec!r} is not an integer")
    if T < 1:
        raise ConfigError(f"horizon must be >= 1, got {spec!r}")
    return T


def parse_alpha(text: str) -> Optional[float]:
    """One alpha grid entry; ``none`` (or ``nt``) selects the untruncated strategy."""
    text = text.strip().lower()
    if text in ("none", "nt", "untruncated"):
        return None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad alpha {text!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment report (timings aside)."""

    game: str = "power"
    algorithm: str = "texp3p"
    parametrization: str = "theoretical"
    horizons: tuple = ("mult:8",)
    alphas: tuple = (0.7,)
    learnings: int = 10
    eval_trials: int = 10_000
    cost: float = 1.0
    c: float = 1.0
    normalize: bool = False
    neq_as_eq: bool = False
    noise: str = "stochastic"
    eval_opponent: str = "uniform"
    seed: int = 0
    scaling: Optional[str] = None
    bonus_period: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(self.horizons))
        object.__setattr__(self, "alphas", tuple(self.alphas))
        if self.algorithm not in ("exp3p", "texp3p"):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "exp3p":
            object.__setattr__(self, "alphas", (None,))
        if not self.alphas:
            raise ConfigError("the alpha grid is empty")
        for a in self.alphas:
            if a is not None and not 0 < a <= 1:
                raise ConfigError(f"alpha must lie in (0, 1], got {a!r}")
        if len(set(self.alphas)) != len(self.alphas):
            raise ConfigError("duplicate alpha in grid")
        if not self.horizons:
            raise ConfigError("the horizon grid is empty")
        if self.learnings < 1:
            raise ConfigError("learnings must be >= 1")
        if self.eval_trials < 1:
            raise ConfigError("eval_trials must be >= 1")
        if self.parametrization not in ("practical", "theoretical"):
            raise ConfigError(f"unknown parametrization {self.parametrization!r}")
        if self.eval_opponent not in OPPONENT_LABELS:
            raise ConfigError(f"unknown evaluation opponent {self.eval_opponent!r}")
        if self.scaling is not None and self.scaling not in SCALINGS:
            raise ConfigError(f"unknown reward scaling {self.scaling!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not (self.game in ("power", "power-modified") or self.game.startswith("csv:")):
            raise ConfigError(f"unknown game selector {self.game!r}")
        PowerModelConfig(cost=self.cost, c=self.c, noise=self.noise, neq_as_eq=self.neq_as_eq)

    @property
    def reward_scaling(self) -> str:
        # The policy bandit learns from rewards on the reported scale and
        # Nature from their normalized reflection; on a normalized game this
        # coincides with "normalized".
        return self.scaling if self.scaling is not None else "row-raw"

    def build_game(self) -> RewardOracle:
        if self.game.startswith("csv:"):
            m = load_csv_matrix(self.game[4:])
            return MatrixGame(normalize_matrix(m) if self.normalize else m)
        pcfg = PowerModelConfig(cost=self.cost, c=self.c, noise=self.noise, neq_as_eq=self.neq_as_eq)
        variant = "modified" if self.game == "power-modified" else "base"
        return PowerGame(pcfg, variant, normalize=self.normalize)

    def resolved_horizons(self, num_policies: int) -> list[int]:
        return [parse_horizon(h, num_policies) for h in self.horizons]

    def bandit_config(self, T: int, seed: int) -> BanditConfig:
        return BanditConfig(horizon=T, parametrization=self.parametrization, seed=seed,
                            bonus_period=self.bonus_period)

    def echo(self) -> dict:
        d = asdict(self)
        d["horizons"] = [h if isinstance(h, str) else int(h) for h in self.horizons]
        d["alphas"] = list(self.alphas)
        return d


def derive_seed(master: int, cohort: int, learning: int, purpose: str = "learn") -> int:
    """64-bit seed from BLAKE2b over ``(master, cohort, learning, purpose)``."""
    msg = f"snash/{purpose}/{master}/{cohort}/{learning}".encode()
    return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "little")


# --- evaluation ---------------------------------------------------------------


class Evaluation(NamedTuple):
    mean: float
    stderr: float
    trials: int

    @property
    def single_sample(self) -> bool:
        return self.trials == 1


def evaluate_strategy(game: RewardOracle, p, opponent=None, trials: int = 10_000,
                      rng: Optional[np.random.Generator] = None) -> Evaluation:
    """Monte Carlo reward of ``p`` against ``opponent`` (``None`` = uniform scenarios).

    Draws ``trials`` i.i.d. pairs ``(k, s)`` and averages the sampled
    (stochastic) rewards.  The standard error is 0 for a single trial.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    p = game._check(p, game.num_policies)
    rng = np.random.default_rng() if rng is None else rng
    ks = _draw(p, trials, rng)
    if opponent is None:
        ss = rng.integers(game.num_scenarios, size=trials)
    else:
        ss = _draw(game._check(opponent, game.num_scenarios), trials, rng)
    r = game.rewards(ks, ss, rng)
    mean = float(r.mean())
    stderr = float(r.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return Evaluation(mean, stderr, trials)


def _draw(p: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(p)
    idx = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    return np.minimum(idx, len(p) - 1)


# --- single learnings ---------------------------------------------------------


def learn(cfg: ExperimentConfig, game: RewardOracle, T: int, seed: int) -> NashApproximation:
    """One untruncated self-play run."""
    bcfg = cfg.bandit_config(T, seed)
    return self_play_nash(game, bcfg, scaling=cfg.reward_scaling, rng=bcfg.rng())


def assess(cfg: ExperimentConfig, game: RewardOracle, approx: NashApproximation,
           alpha: Optional[float], eval_seed: int) -> tuple[DecisionReport, dict]:
    """Truncate at ``alpha`` (unless ``None``) and compute the per-learning metrics."""
    if alpha is not None:
        approx = truncate_approximation(approx, alpha)
    report = report_from(game, approx, alpha)
    opponent = None if cfg.eval_opponent == "uniform" else approx.col_strategy
    ev = evaluate_strategy(game, approx.row_strategy, opponent, cfg.eval_trials,
                           np.random.default_rng(eval_seed))
    metrics = {
        "sparsity": report.sparsity,
        "scenario_sparsity": len(report.scenarios),
        "reward_mean": ev.mean,
        "reward_stderr": ev.stderr,
        "single_sample": ev.single_sample,
        "robust": robust_score(game, approx.row_strategy),
        "row_status": approx.row_status,
        "col_status": approx.col_status,
        "value": approx.value,
        "best_policy": report.best_policy,
    }
    return report, metrics


def run_learning(cfg: ExperimentConfig, alpha: Optional[float], T: int, seed: int,
                 game: Optional[RewardOracle] = None) -> tuple[DecisionReport, dict]:
    """One full (t)Exp3.P learning at horizon ``T`` followed by its evaluation."""
    game = cfg.build_game() if game is None else game
    approx = learn(cfg, game, T, seed)
    report, metrics = assess(cfg, game, approx, alpha, derive_seed(seed, 0, 0, "eval"))
    metrics["seed"] = seed
    return report, metrics


# --- experiments --------------------------------------------------------------


@dataclass
class CellResult:
    """Aggregates over the learnings of one ``(alpha, T)`` cell."""

    alpha: Optional[float]
    T: int
    learnings: list = field(default_factory=list)
    sparsity_mean: float = math.nan
    sparsity_sd: float = math.nan
    reward_mean: float = math.nan
    reward_sd: float = math.nan
    robust_mean: float = math.nan
    robust_sd: float = math.nan
    proxy_exploitability: float = math.nan
    n_non_truncated: int = 0
    n_non_sparse: int = 0
    seconds: float = 0.0
    learning_seconds: float = 0.0
    median_report: Optional[dict] = None
    failed: bool = False
    error: Optional[str] = None

    @property
    def key(self) -> str:
        return cell_key(self.alpha, self.T)


def cell_key(alpha: Optional[float], T: int) -> str:
    return f"alpha={'none' if alpha is None else repr(float(alpha))};T={T}"


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    mean = math.fsum(values) / len(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


def aggregate(cell: CellResult) -> CellResult:
    """Fill the summary fields of ``cell`` from its per-learning metrics."""
    rows = cell.learnings
    cell.sparsity_mean, cell.sparsity_sd = _mean_sd([float(m["sparsity"]) for m in rows])
    cell.reward_mean, cell.reward_sd = _mean_sd([m["reward_mean"] for m in rows])
    cell.robust_mean, cell.robust_sd = _mean_sd([m["robust"] for m in rows])
    cell.n_non_truncated = sum(m["row_status"] == NON_TRUNCATED for m in rows)
    cell.n_non_sparse = sum(m["row_status"] == NON_SPARSE for m in rows)
    return cell


def summarize_report(report: DecisionReport, top: int = REPORT_TOP) -> dict:
    """JSON-friendly digest of a :class:`DecisionReport`."""
    return {
        "alpha": report.alpha,
        "horizon": report.horizon,
        "row_status": report.row_status,
        "col_status": report.col_status,
        "value": report.value,
        "num_policies": len(report.policies),
        "num_scenarios": len(report.scenarios),
        "policies": [[i, p] for i, p in report.policies[:top]],
        "scenarios": [[j, q] for j, q in report.scenarios[:top]],
        "submatrix": report.top_submatrix(top, top).tolist(),
    }


@dataclass
class ExperimentReport:
    config: dict
    cells: list
    metadata: dict
    schema_version: int = SCHEMA_VERSION

    def cell(self, alpha: Optional[float], T: int) -> CellResult:
        for c in self.cells:
            if c.alpha == alpha and c.T == T:
                return c
        raise KeyError(cell_key(alpha, T))

    @property
    def failed(self) -> bool:
        return any(c.failed for c in self.cells)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "metadata": self.metadata,
            "cells": {c.key: asdict(c) for c in self.cells},
        }


def run_experiment(cfg: ExperimentConfig, progress=None) -> ExperimentReport:
    """Run every ``(alpha, T)`` cell of ``cfg``.

    Learning ``i`` at the ``j``-th horizon uses seed ``derive_seed(master, j,
    i)``; all alphas at that horizon truncate the same run.  A numeric
    failure marks the cells of that horizon failed and the experiment moves
    on.  ``progress``, if given, is called with a message per learning.
    """
    game = cfg.build_game()
    horizons = cfg.resolved_horizons(game.num_policies)
    cells: list[CellResult] = []
    for j, T in enumerate(horizons):
        cohort = [CellResult(alpha=a, T=T) for a in cfg.alphas]
        reports: dict = {a: [] for a in cfg.alphas}
        try:
            for i in range(cfg.learnings):
                seed = derive_seed(cfg.seed, j, i)
                t0 = time.perf_counter()
                approx = learn(cfg, game, T, seed)
                spent = time.perf_counter() - t0
                for n, cell in enumerate(cohort):
                    t1 = time.perf_counter()
                    report, metrics = assess(cfg, game, approx, cell.alpha,
                                             derive_seed(cfg.seed, j, i, f"eval/{n}"))
                    metrics["seed"] = seed
                    cell.learnings.append(metrics)
                    reports[cell.alpha].append(report)
                    cell.learning_seconds += spent
                    cell.seconds += spent + time.perf_counter() - t1
                if progress is not None:
                    progress(f"T={T} learning {i + 1}/{cfg.learnings} ({spent:.1f}s)")
        except NumericError as exc:
            for cell in cohort:
                cell.failed = True
                cell.error = f"{type(exc).__name__}: {exc}"
        if not cohort[0].failed:
            for cell in cohort:
                aggregate(cell)
                cell.median_report = summarize_report(_median_report(cell, reports[cell.alpha]))
            gaps = proxy_exploitability([c.robust_mean for c in cohort])
            for cell, gap in zip(cohort, gaps):
                cell.proxy_exploitability = gap
        cells.extend(cohort)
    metadata = {
        "game_shape": list(game.shape),
        "horizons": horizons,
        "reward_scaling": cfg.reward_scaling,
        "evaluation": OPPONENT_LABELS[cfg.eval_opponent],
        "robust_score": "exact over all pure scenarios, noise-free",
        "notes": list(LABEL_NOTES),
        "timing_fields": list(TIMING_FIELDS),
    }
    return ExperimentReport(config=cfg.echo(), cells=cells, metadata=metadata)


def _median_report(cell: CellResult, reports: list) -> DecisionReport:
    """Report of the learning with the (lower) median evaluation reward."""
    order = sorted(range(len(reports)), key=lambda i: (cell.learnings[i]["reward_mean"], i))
    return reports[order[(len(order) - 1) // 2]]


# --- serialization ------------------------------------------------------------


def format_number(x) -> str:
    """17 significant digits, which round-trips every float64 exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = f"{x:.17g}"
    if not any(ch in text for ch in ".eEn"):
        text += ".0"
    return text


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return "null" if obj is None else format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_csv(r: ExperimentReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for c in r.cells:
        row = [("none" if c.alpha is None else format_number(c.alpha))]
        row += [format_number(getattr(c, name)) for name in CSV_COLUMNS[1:]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit_report(r: ExperimentReport, fmt: str = "json", destination=None) -> str:
    """Write ``r`` as JSON or CSV to a path, a text stream, or stdout (``None``/``"-"``).

    Returns the emitted text.  An unwritable path raises :class:`OSError`.
    """
    if fmt == "json":
        text = dumps_json(r.to_dict()) + "\n"
    elif fmt == "csv":
        text = report_csv(r)
    else:
        raise ConfigError(f"unknown report format {fmt!r}")
    write_text(text, destination)
    return text


def write_text(text: str, destination=None) -> None:
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def load_report_json(source) -> dict:
    """Parse an emitted JSON report back into plain Python objects."""
    if hasattr(source, "read"):
        return json.load(source)
    with open(source, encoding="utf-8") as fh:
        return json.load(fh)
