"""Instance generators, seeded Monte Carlo experiments and result files."""
from __future__ import annotations

import csv
import enum
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from .core import (
    FixedMatricesModel,
    FourPointModel,
    FourPointSide,
    InputError,
    Instance,
    PreconditionError,
    TwoPointOrderedModel,
    UniformModel,
    ceil_log2_times,
)
from .hybrid import run_hybrid
from .sequential import run_sequential
from .stability import all_applicants_like_match, check_interim_stability, decoupled_da

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "experiment", "n", "m", "trial", "seed", "algorithm", "total_interviews",
    "interviews_per_applicant", "max_agent_interviews", "rounds", "phase1_rounds",
    "phase2_rounds", "fallback", "stable", "all_like_match", "decoupled_stable",
]


class Experiment(enum.Enum):
    FIG3_BILATERAL = "fig3-bilateral"
    ORDERED_TWO_POINT = "ordered-two-point"
    POSITIONS_EQUIVALENT = "positions-equivalent"
    HYBRID_ROUNDS = "hybrid-rounds"
    FULLY_PARALLEL_ROUNDS = "fully-parallel-rounds"
    DECOUPLING = "decoupling"
    D1_REPLAY = "d1-replay"
    LOWER_BOUND = "lower-bound"


class Algorithm(enum.Enum):
    SEQUENTIAL = "sequential"
    HYBRID = "hybrid"
    FULLY_PARALLEL = "fully-parallel"


# experiment -> (value model kind, model params, m rule, algorithm, n values, trials)
DEFAULTS: dict[Experiment, tuple[str, dict, Any, Algorithm, list[int], int]] = {
    Experiment.FIG3_BILATERAL: ("bilateral-uniform", {}, "equal", Algorithm.SEQUENTIAL, [10, 25, 50, 100, 200], 100),
    Experiment.ORDERED_TWO_POINT: ("two-point-ordered", {}, "equal", Algorithm.SEQUENTIAL, [8, 16, 32, 64], 100),
    Experiment.POSITIONS_EQUIVALENT: (
        "bilateral-uniform",
        {"applicant_center_range": [0.25, 0.75], "applicant_half_width": 0.25},
        "equal", Algorithm.SEQUENTIAL, [10, 50], 200,
    ),
    Experiment.HYBRID_ROUNDS: ("bilateral-uniform", {}, "n-plus-10logn", Algorithm.HYBRID, [16, 32, 64, 128], 100),
    Experiment.FULLY_PARALLEL_ROUNDS: ("bilateral-uniform", {}, "equal", Algorithm.FULLY_PARALLEL, [16, 32, 64, 128, 256], 100),
    Experiment.DECOUPLING: ("bilateral-uniform", {}, "equal", Algorithm.SEQUENTIAL, [100], 200),
    Experiment.LOWER_BOUND: ("bilateral-uniform", {}, "equal", Algorithm.SEQUENTIAL, [5], 1000),
}

MRule = Union[str, Sequence[int]]


def resolve_m(rule: MRule, n: int, index: int = 0) -> int:
    """Number of positions for ``n`` applicants under an m rule."""
    if rule == "equal":
        return n
    if rule == "n-plus-10logn":
        return n + ceil_log2_times(n)
    if isinstance(rule, str):
        raise InputError(f"unknown m rule {rule!r}")
    return int(list(rule)[index])


@dataclass
class ExperimentConfig:
    experiment: Experiment
    n_values: list[int] = field(default_factory=list)
    m_rule: Optional[MRule] = None
    trials: Optional[int] = None
    base_seed: int = 0
    algorithm: Optional[Algorithm] = None
    model_kind: Optional[str] = None
    model_params: dict = field(default_factory=dict)
    tie_break: str = "lowest-match-value"
    almost_equivalent: Union[bool, float] = False
    output_path: Optional[Path] = None
    workers: Optional[int] = None

    def __post_init__(self):
        self.experiment = Experiment(self.experiment)
        if self.experiment is Experiment.D1_REPLAY:
            return
        kind, params, m_rule, algorithm, n_values, trials = DEFAULTS[self.experiment]
        if self.model_kind is None:
            self.model_kind = kind
            self.model_params = {**params, **self.model_params}
        self.algorithm = Algorithm(self.algorithm) if self.algorithm is not None else algorithm
        if not self.n_values:
            self.n_values = list(n_values)
        if self.m_rule is None:
            self.m_rule = m_rule
        if self.trials is None:
            self.trials = trials
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if not isinstance(self.m_rule, str) and len(list(self.m_rule)) != len(self.n_values):
            raise InputError("explicit m list must match n_values in length")
        for idx, n in enumerate(self.n_values):
            m = resolve_m(self.m_rule, n, idx)
            if n < 2 or m < 2:
                raise InputError("markets need n >= 2 and m >= 2")
            if self.algorithm is not Algorithm.SEQUENTIAL and m < n:
                raise InputError(f"{self.algorithm.value} needs m >= n (n={n}, m={m})")

    @classmethod
    def for_experiment(cls, experiment: Union[str, Experiment], **overrides: Any) -> "ExperimentConfig":
        """Experiment defaults with ``overrides`` applied; ``None`` values are ignored."""
        return cls(Experiment(experiment), **{k: v for k, v in overrides.items() if v is not None})


# ----------------------------------------------------------------- instances


def generate_instance(kind: str, n: int, m: int, params: Optional[dict] = None, seed: int = 0) -> Instance:
    """Build an instance; randomised parameters draw from a stream derived from ``seed``.

    Extra generator-only params:
        ``applicant_center_range`` / ``position_center_range`` (uniform kind):
            per-pair centres drawn uniformly from the range.
        ``prior_spread`` (4-point kind): per-pair priors jittered uniformly by
            at most this amount around the given prior.  With the default
            side parameters only spreads below about 0.0025 stay feasible.
        ``fixture`` (fixed-matrices kind): ``"d1"`` or a path to an instance JSON.
    """
    params = dict(params or {})
    rng = np.random.default_rng([int(seed), 0x1F1])
    if kind == UniformModel.kind:
        for side, shape in (("applicant", (n, m)), ("position", (m, n))):
            rng_range = params.pop(f"{side}_center_range", None)
            if rng_range is not None:
                lo, hi = rng_range
                params[f"{side}_center"] = rng.uniform(lo, hi, size=shape)
        return Instance(n, m, UniformModel(n, m, **params))
    if kind == TwoPointOrderedModel.kind:
        return Instance(n, m, TwoPointOrderedModel(n, m))
    if kind == FourPointModel.kind:
        spread = float(params.pop("prior_spread", 0.0))
        a_side = FourPointSide(**params.pop("applicants", {}))
        p_side = FourPointSide(**params.pop("positions", {}))
        a_prior = float(params.pop("applicant_prior", 0.5))
        p_prior = float(params.pop("position_prior", 0.5))
        if params:
            raise InputError(f"unexpected 4-point params {sorted(params)}")
        a_pri = a_prior + spread * rng.uniform(-1, 1, size=(n, m))
        p_pri = p_prior + spread * rng.uniform(-1, 1, size=(m, n))
        return Instance(n, m, FourPointModel(n, m, a_side, p_side, a_pri, p_pri))
    if kind == FixedMatricesModel.kind:
        fixture = params.pop("fixture", None)
        if fixture is not None:
            inst = load_fixture(fixture)[0]
            if (inst.n, inst.m) != (n, m):
                raise InputError("fixture dimensions do not match n, m")
            return inst
        return Instance(n, m, FixedMatricesModel(n, m, params.pop("v"), params.pop("u"), **params))
    raise InputError(f"unknown model kind {kind!r}")


def load_fixture(source: Union[str, Path]) -> tuple[Instance, dict]:
    """Load an instance JSON or a replay fixture; returns (instance, expected-section)."""
    if str(source) in ("d1", "d1.json") and not Path(source).exists():
        text = resources.files("interview_match").joinpath("fixtures/d1.json").read_text()
    else:
        text = Path(source).read_text()
    doc = json.loads(text)
    if "instance" in doc:
        return Instance.from_json(doc["instance"]), doc.get("expected", {})
    return Instance.from_json(doc), {}


# -------------------------------------------------------------------- trials


def _run(config: ExperimentConfig, instance: Instance, seed: int):
    if config.algorithm is Algorithm.SEQUENTIAL:
        return run_sequential(instance, seed, tie_break=config.tie_break,
                              almost_equivalent=config.almost_equivalent)
    return run_hybrid(instance, seed, variant=config.algorithm.value, tie_break=config.tie_break,
                      almost_equivalent=config.almost_equivalent)


def run_trial(config: ExperimentConfig, n: int, m: int, trial: int) -> dict:
    """One seeded trial; returns a CSV row."""
    seed = config.base_seed + trial
    instance = generate_instance(config.model_kind, n, m, config.model_params, seed)
    result = _run(config, instance, seed)
    report = check_interim_stability(instance, result.ledger, result.matching)
    try:
        likes = all_applicants_like_match(instance, result.ledger, result.matching)
    except PreconditionError:
        likes = False
    decoupled_stable = decoupled_da(instance, result.ledger, "realized-only")[1].is_interim_stable
    metrics = result.metrics
    return {
        "experiment": config.experiment.value,
        "n": n,
        "m": m,
        "trial": trial,
        "seed": seed,
        "algorithm": config.algorithm.value,
        "total_interviews": metrics.total_interviews,
        "interviews_per_applicant": metrics.total_interviews / n,
        "max_agent_interviews": metrics.max_agent_interviews,
        "rounds": metrics.total_rounds,
        "phase1_rounds": metrics.phase1_rounds,
        "phase2_rounds": metrics.phase2_rounds,
        "fallback": int(metrics.fallback_triggered),
        "stable": int(report.is_interim_stable),
        "all_like_match": int(likes),
        "decoupled_stable": int(decoupled_stable),
    }


def _run_trial_args(args: tuple) -> dict:
    return run_trial(*args)


def _workers(config: ExperimentConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    return max(1, int(os.environ.get("IM_THREADS", "1")))


# ------------------------------------------------------------- aggregation


def _describe(values: np.ndarray) -> dict:
    return {
        "mean": float(values.mean()),
        "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
        "min": float(values.min()),
        "max": float(values.max()),
    }


@dataclass
class AggregateStats:
    experiment: str
    algorithm: str
    trials: int
    per_n: list[dict]
    rows: list[dict] = field(repr=False, default_factory=list)

    @property
    def stability_pass_rate(self) -> float:
        return float(np.mean([r["stable"] for r in self.rows])) if self.rows else 1.0

    def for_n(self, n: int) -> dict:
        for entry in self.per_n:
            if entry["n"] == n:
                return entry
        raise KeyError(n)

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("rows")
        out["stability_pass_rate"] = self.stability_pass_rate
        return out


def aggregate(config: ExperimentConfig, rows: list[dict]) -> AggregateStats:
    per_n = []
    for idx, n in enumerate(config.n_values):
        m = resolve_m(config.m_rule, n, idx)
        sub = [r for r in rows if r["n"] == n and r["m"] == m]
        col = lambda name: np.array([r[name] for r in sub], dtype=float)  # noqa: E731
        premise = col("all_like_match").astype(bool)
        dec = col("decoupled_stable").astype(bool)
        per_n.append({
            "n": n,
            "m": m,
            "trials": len(sub),
            "interviews_per_applicant": _describe(col("interviews_per_applicant")),
            "total_interviews": _describe(col("total_interviews")),
            "rounds": _describe(col("rounds")),
            "max_agent_interviews": _describe(col("max_agent_interviews")),
            "stability_pass_rate": float(col("stable").mean()),
            "fallback_rate": float(col("fallback").mean()),
            "decoupling_premise_rate": float(premise.mean()),
            "decoupled_stable_given_premise": float(dec[premise].mean()) if premise.any() else None,
        })
    return AggregateStats(config.experiment.value, config.algorithm.value, config.trials, per_n, rows)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def run_experiment(config: ExperimentConfig) -> AggregateStats:
    """Run ``config.trials`` seeded trials per market size and aggregate them.

    Trial ``t`` uses seed ``base_seed + t`` for both instance generation and
    the run, so results do not depend on execution order or worker count.
    Writes ``output_path`` (CSV) and a ``.json`` summary next to it when set.
    """
    if config.experiment is Experiment.D1_REPLAY:
        raise InputError("use replay() for the d1-replay experiment")
    jobs = []
    for idx, n in enumerate(config.n_values):
        m = resolve_m(config.m_rule, n, idx)
        jobs.extend((config, n, m, t) for t in range(config.trials))
    workers = _workers(config)
    log.info("running %d trials of %s on %d worker(s)", len(jobs), config.experiment.value, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial_args, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [run_trial(*job) for job in jobs]
    stats = aggregate(config, rows)
    if config.output_path is not None:
        path = Path(config.output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rows_to_csv(rows))
        path.with_suffix(".json").write_text(json.dumps(stats.to_json(), indent=2) + "\n")
    return stats


# -------------------------------------------------------------------- replay


def replay(fixture: Union[str, Path] = "d1") -> dict:
    """Replay a fixed-matrices fixture through the sequential algorithm and decoupled DA.

    When the fixture carries an ``expected`` section, each expectation is
    compared exactly and the outcome recorded under ``checks``.
    """
    instance, expected = load_fixture(fixture)
    result = run_sequential(instance, trace=True)
    report = check_interim_stability(instance, result.ledger, result.matching)
    full_mu, full_report = decoupled_da(instance, result.ledger, "full-interim")
    out = {
        "matching": result.matching.to_json(),
        "interviews": [[i + 1, j + 1] for i, j in result.interview_sequence()],
        "stability": report.to_json(),
        "decoupled_full_interim": full_mu.to_json(),
        "decoupled_full_interim_stability": full_report.to_json(),
        "trace": result.trace,
    }
    checks = {}
    if "matching" in expected:
        checks["matching"] = sorted(map(list, expected["matching"]["pairs"])) == out["matching"]["pairs"]
    if "interviews" in expected:
        checks["interviews"] = [list(p) for p in expected["interviews"]] == out["interviews"]
    if "decoupled_full_interim" in expected:
        checks["decoupled_full_interim"] = (
            sorted(map(list, expected["decoupled_full_interim"]["pairs"])) == out["decoupled_full_interim"]["pairs"]
        )
    if "decoupled_uninterviewed" in expected:
        checks["decoupled_uninterviewed"] = (
            [list(p) for p in expected["decoupled_uninterviewed"]]
            == full_report.to_json()["uninterviewed_matched_pairs"]
            and not full_report.is_interim_stable
        )
    checks["stable"] = report.is_interim_stable
    out["checks"] = checks
    out["ok"] = all(checks.values())
    return out
