"""Assignment quality metrics, utility CDFs, and scaling benchmarks.

Average utility divides by the number of assigned pairs, not by the number of
tasks: the two only coincide at full coverage, and reported totals, averages
and coverages stay mutually consistent this way (total = avg * pairs,
coverage = pairs / tasks).

Benchmark timings attribute to each method only the pipeline stages it
actually needs: random assignment skips straight to the draw, skill-only
matching needs extraction and similarity, and the willingness-aware matcher
pays for every stage. Plot data is emitted as CSV; rendering happens outside
the engine.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .assignment import (
    Assignment,
    CapacityMap,
    UtilityParams,
    assign_random,
    assign_skill_only,
    assign_swati,
    similarity_components,
    utility_matrix_from_components,
    willingness_matrix,
)
from .corpus import SyntheticConfig, generate_synthetic
from .errors import ConfigError, InconsistentInputError
from .extraction import build_market
from .ontology import Ontology, load_builtin_ontology
from .willingness import WillingnessParams, WillingnessState, pair_willingness

METHODS = ("random", "skill", "swati")

_STAGES_BY_METHOD = {
    "random": ("assignment",),
    "skill": ("extraction", "similarity", "assignment"),
    "swati": ("extraction", "similarity", "willingness", "assignment"),
}


@dataclass(frozen=True)
class QualityReport:
    method: str
    total_utility: float
    avg_utility: float
    coverage: float
    pair_count: int


def quality(assignment: Assignment, m_tasks: int, method: str = "") -> QualityReport:
    pairs = assignment.pairs
    if len(pairs) > m_tasks:
        raise InconsistentInputError(
            f"{len(pairs)} pairs cannot cover only {m_tasks} tasks"
        )
    total = assignment.total_utility()
    avg = total / len(pairs) if pairs else 0.0
    coverage = len(pairs) / m_tasks if m_tasks else 0.0
    return QualityReport(
        method=method,
        total_utility=total,
        avg_utility=avg,
        coverage=coverage,
        pair_count=len(pairs),
    )


def utility_cdf(assignment: Assignment, bins: int) -> list[tuple[float, float]]:
    """Empirical CDF of per-pair utilities at equally spaced thresholds over [0, 1].

    Empty assignments report zero everywhere rather than a degenerate 1.
    """
    if bins < 2:
        raise ConfigError("need at least 2 bins")
    utilities = [p.utility for p in assignment.pairs]
    points = []
    for k in range(1, bins + 1):
        threshold = k / bins
        if utilities:
            fraction = sum(1 for u in utilities if u <= threshold) / len(utilities)
        else:
            fraction = 0.0
        points.append((threshold, fraction))
    return points


@dataclass
class TimingReport:
    market_size: int
    method: str
    stage_seconds: dict[str, list[float]]
    repetitions: int

    def rep_totals(self) -> list[float]:
        return [
            sum(times[rep] for times in self.stage_seconds.values())
            for rep in range(self.repetitions)
        ]

    def median_total(self) -> float:
        return statistics.median(self.rep_totals())

    def dispersion(self) -> tuple[float, float, float]:
        totals = self.rep_totals()
        return min(totals), statistics.median(totals), max(totals)


@dataclass
class BenchResult:
    timings: list[TimingReport] = field(default_factory=list)
    quality: list[tuple[int, QualityReport]] = field(default_factory=list)
    cdf: list[tuple[int, str, float, float]] = field(default_factory=list)


def bench_scaling(
    sizes: Sequence[int],
    methods: Sequence[str],
    seed: int,
    repetitions: int = 3,
    ontology: Optional[Ontology] = None,
    utility_params: UtilityParams = UtilityParams(),
    willingness_params: WillingnessParams = WillingnessParams(),
    cdf_bins: int = 20,
) -> BenchResult:
    """Time each method over synthetic markets with |V| = |T| = size.

    Stages are re-run and re-timed per repetition; methods run sequentially so
    their timings do not interfere.
    """
    if list(sizes) != sorted(sizes):
        raise ConfigError("sizes must be ascending")
    if repetitions < 3:
        raise ConfigError("need at least 3 repetitions")
    for method in methods:
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}")
    if ontology is None:
        ontology = load_builtin_ontology()

    result = BenchResult()
    for idx, size in enumerate(sizes):
        cfg = SyntheticConfig(seed=seed + idx, n_volunteers=size, n_tasks=size)
        corpus = generate_synthetic(cfg, ontology)
        caps = CapacityMap()
        stage_times: dict[str, list[float]] = {
            "extraction": [],
            "similarity": [],
            "willingness": [],
        }
        assign_times: dict[str, list[float]] = {m: [] for m in methods}
        last_assignments: dict[str, Assignment] = {}

        for _ in range(repetitions):
            t0 = time.perf_counter()
            market = build_market(corpus, ontology)
            t1 = time.perf_counter()
            skill, content = similarity_components(market.profiles, market.taskspecs)
            t2 = time.perf_counter()
            state = WillingnessState()
            will = willingness_matrix(
                market.profiles,
                market.taskspecs,
                lambda v, t: pair_willingness(v, t, None, state, willingness_params),
            )
            t3 = time.perf_counter()
            stage_times["extraction"].append(t1 - t0)
            stage_times["similarity"].append(t2 - t1)
            stage_times["willingness"].append(t3 - t2)

            volunteer_ids = [p.id for p in market.profiles]
            task_ids = [t.id for t in market.taskspecs]
            for method in methods:
                t4 = time.perf_counter()
                matrix = utility_matrix_from_components(
                    volunteer_ids, task_ids, skill, content, will, utility_params
                )
                if method == "swati":
                    assignment = assign_swati(matrix, caps)
                elif method == "skill":
                    assignment = assign_skill_only(matrix, caps)
                else:
                    assignment = assign_random(matrix, caps, seed=seed + idx)
                assign_times[method].append(time.perf_counter() - t4)
                last_assignments[method] = assignment

        for method in methods:
            stages = {
                stage: (
                    assign_times[method]
                    if stage == "assignment"
                    else list(stage_times[stage])
                )
                for stage in _STAGES_BY_METHOD[method]
            }
            result.timings.append(
                TimingReport(
                    market_size=size,
                    method=method,
                    stage_seconds=stages,
                    repetitions=repetitions,
                )
            )
            report = quality(last_assignments[method], size, method=method)
            result.quality.append((size, report))
            for threshold, fraction in utility_cdf(last_assignments[method], cdf_bins):
                result.cdf.append((size, method, threshold, fraction))
    return result


# --- CSV emission ----------------------------------------------------------


def write_quality_csv(path: str, reports: Sequence[QualityReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "total_utility", "avg_utility", "coverage", "pairs"])
        for r in reports:
            writer.writerow(
                [r.method, f"{r.total_utility:.6f}", f"{r.avg_utility:.6f}",
                 f"{r.coverage:.6f}", r.pair_count]
            )


def write_cdf_csv(path: str, per_method: dict[str, list[tuple[float, float]]]) -> None:
    """Wide CDF table: threshold column plus one fraction column per method."""
    methods = list(per_method)
    thresholds = [t for t, _ in next(iter(per_method.values()))]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", *methods])
        for row_idx, threshold in enumerate(thresholds):
            row = [f"{threshold:.6f}"]
            for method in methods:
                row.append(f"{per_method[method][row_idx][1]:.6f}")
            writer.writerow(row)


def write_timing_csv(path: str, reports: Sequence[TimingReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "method", "stage", "rep", "seconds"])
        for report in reports:
            for stage, times in report.stage_seconds.items():
                for rep, seconds in enumerate(times):
                    writer.writerow(
                        [report.market_size, report.method, stage, rep, f"{seconds:.6f}"]
                    )
