"""Utility computation and capacity-constrained matching.

Two utility forms are supported because both appear in practice and they are
not equivalent:

* product form (default): ``u = (a*s + b*c) * w``, willingness discounting the
  whole blended similarity;
* split form: ``u = a*s + b*c*w``, willingness discounting only the content
  term and leaving pure skill overlap untouched.

The greedy matcher walks pairs in non-increasing utility with ties broken by
(volunteer_id, task_id) ascending, so equal inputs always produce identical
assignments. A brute-force optimizer over tiny instances serves as the
oracle for the greedy's approximation quality.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, InstanceTooLargeError
from .extraction import Profile, TaskSpec
from .similarity import skill_sim
from .willingness import (
    History,
    WillingnessParams,
    WillingnessState,
    pair_willingness,
)


class UtilityForm(enum.Enum):
    PRODUCT = "product"
    SPLIT = "split"


@dataclass(frozen=True)
class UtilityParams:
    skill_weight: float = 0.5
    content_weight: float = 0.5
    form: UtilityForm = UtilityForm.PRODUCT

    def __post_init__(self):
        if not 0.0 <= self.skill_weight <= 1.0 or not 0.0 <= self.content_weight <= 1.0:
            raise ConfigError("utility weights must lie in [0, 1]")
        if abs(self.skill_weight + self.content_weight - 1.0) > 1e-12:
            raise ConfigError("skill_weight + content_weight must equal 1")


class CapacityMap:
    """Volunteer capacities; ids not listed default to one task."""

    def __init__(self, capacities: Optional[Mapping[str, int]] = None, default: int = 1):
        capacities = dict(capacities or {})
        if default < 1:
            raise ConfigError("default capacity must be >= 1")
        for vid, cap in capacities.items():
            if cap < 1:
                raise ConfigError(f"capacity for {vid!r} must be >= 1")
        self._caps = capacities
        self.default = default

    def get(self, volunteer_id: str) -> int:
        return self._caps.get(volunteer_id, self.default)


@dataclass(frozen=True)
class AssignedPair:
    volunteer_id: str
    task_id: str
    utility: float


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[AssignedPair, ...]
    epoch: int = 0

    def total_utility(self) -> float:
        return float(sum(p.utility for p in self.pairs))

    def task_ids(self) -> set[str]:
        return {p.task_id for p in self.pairs}


@dataclass(frozen=True)
class UtilityMatrix:
    volunteers: tuple[str, ...]
    tasks: tuple[str, ...]
    utilities: np.ndarray
    skill: np.ndarray
    content: np.ndarray
    willingness: np.ndarray

    def __post_init__(self):
        shape = (len(self.volunteers), len(self.tasks))
        for name in ("utilities", "skill", "content", "willingness"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")
            if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")

    def cell(self, volunteer_id: str, task_id: str) -> float:
        i = self.volunteers.index(volunteer_id)
        j = self.tasks.index(task_id)
        return float(self.utilities[i, j])


def compute_utility(s: float, c: float, w: float, params: UtilityParams) -> float:
    """Blend skill and content similarity, discounted by willingness."""
    a, b = params.skill_weight, params.content_weight
    if params.form is UtilityForm.PRODUCT:
        return (a * s + b * c) * w
    return a * s + b * c * w


def utility_matrix_from_components(
    volunteers: Sequence[str],
    tasks: Sequence[str],
    skill: np.ndarray,
    content: np.ndarray,
    willingness: np.ndarray,
    params: UtilityParams,
) -> UtilityMatrix:
    skill = np.asarray(skill, dtype=np.float64)
    content = np.asarray(content, dtype=np.float64)
    willingness = np.asarray(willingness, dtype=np.float64)
    a, b = params.skill_weight, params.content_weight
    if params.form is UtilityForm.PRODUCT:
        utilities = (a * skill + b * content) * willingness
    else:
        utilities = a * skill + b * content * willingness
    return UtilityMatrix(
        volunteers=tuple(volunteers),
        tasks=tuple(tasks),
        utilities=utilities,
        skill=skill,
        content=content,
        willingness=willingness,
    )


def similarity_components(
    profiles: Sequence[Profile], taskspecs: Sequence[TaskSpec]
) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise skill-Jaccard and content-cosine matrices."""
    if not profiles or not taskspecs:
        raise DimensionError("need at least one volunteer and one task")
    n, m = len(profiles), len(taskspecs)
    skill = np.empty((n, m))
    for i, prof in enumerate(profiles):
        for j, task in enumerate(taskspecs):
            skill[i, j] = skill_sim(prof.skills, task.required_skills)

    # content cosine via one dense matmul; rows of empty vectors stay zero,
    # matching content_sim's empty-vector convention
    size = 0
    for vec in [p.content_vector for p in profiles] + [t.content_vector for t in taskspecs]:
        if len(vec.indices):
            size = max(size, int(vec.indices[-1]) + 1)
    xv = np.zeros((n, size))
    xt = np.zeros((m, size))
    for i, prof in enumerate(profiles):
        if len(prof.content_vector.indices):
            xv[i, prof.content_vector.indices] = prof.content_vector.weights
    for j, task in enumerate(taskspecs):
        if len(task.content_vector.indices):
            xt[j, task.content_vector.indices] = task.content_vector.weights
    content = np.clip(xv @ xt.T, 0.0, 1.0)
    return skill, content


def willingness_matrix(
    profiles: Sequence[Profile],
    taskspecs: Sequence[TaskSpec],
    willingness_fn: Callable[[Profile, TaskSpec], float],
) -> np.ndarray:
    if not profiles or not taskspecs:
        raise DimensionError("need at least one volunteer and one task")
    w = np.empty((len(profiles), len(taskspecs)))
    for i, prof in enumerate(profiles):
        for j, task in enumerate(taskspecs):
            w[i, j] = willingness_fn(prof, task)
    return w


def build_utility_matrix(
    profiles: Sequence[Profile],
    taskspecs: Sequence[TaskSpec],
    willingness_fn: Callable[[Profile, TaskSpec], float],
    params: UtilityParams,
) -> UtilityMatrix:
    """Dense pairwise utilities with per-cell component breakdown."""
    skill, content = similarity_components(profiles, taskspecs)
    willingness = willingness_matrix(profiles, taskspecs, willingness_fn)
    return utility_matrix_from_components(
        [p.id for p in profiles],
        [t.id for t in taskspecs],
        skill,
        content,
        willingness,
        params,
    )


def _greedy(
    matrix: UtilityMatrix, sort_scores: np.ndarray, caps: CapacityMap, epoch: int
) -> Assignment:
    n, m = sort_scores.shape
    order = sorted(
        ((i, j) for i in range(n) for j in range(m)),
        key=lambda ij: (-sort_scores[ij[0], ij[1]], matrix.volunteers[ij[0]], matrix.tasks[ij[1]]),
    )
    load = [0] * n
    caps_vec = [caps.get(v) for v in matrix.volunteers]
    taken: set[int] = set()
    pairs = []
    for i, j in order:
        if j in taken or load[i] >= caps_vec[i]:
            continue
        taken.add(j)
        load[i] += 1
        pairs.append(
            AssignedPair(matrix.volunteers[i], matrix.tasks[j], float(matrix.utilities[i, j]))
        )
        if len(taken) == m:
            break
    return Assignment(pairs=tuple(pairs), epoch=epoch)


def assign_swati(matrix: UtilityMatrix, caps: CapacityMap, epoch: int = 0) -> Assignment:
    """Greedy matching by descending utility under capacity constraints."""
    return _greedy(matrix, matrix.utilities, caps, epoch)


def assign_skill_only(matrix: UtilityMatrix, caps: CapacityMap, epoch: int = 0) -> Assignment:
    """Greedy matching by skill similarity alone.

    Reported pair utilities are still the full utility values, so baselines
    and the main method compare on a single objective.
    """
    return _greedy(matrix, matrix.skill, caps, epoch)


def assign_random(
    matrix: UtilityMatrix, caps: CapacityMap, seed: int, epoch: int = 0
) -> Assignment:
    """Assign each task (in id order) to a uniformly random free volunteer."""
    rng = random.Random(seed)
    vol_order = sorted(range(len(matrix.volunteers)), key=lambda i: matrix.volunteers[i])
    load = [0] * len(matrix.volunteers)
    caps_vec = [caps.get(v) for v in matrix.volunteers]
    pairs = []
    for j in sorted(range(len(matrix.tasks)), key=lambda j: matrix.tasks[j]):
        candidates = [i for i in vol_order if load[i] < caps_vec[i]]
        if not candidates:
            continue
        i = candidates[rng.randrange(len(candidates))]
        load[i] += 1
        pairs.append(
            AssignedPair(matrix.volunteers[i], matrix.tasks[j], float(matrix.utilities[i, j]))
        )
    return Assignment(pairs=tuple(pairs), epoch=epoch)


_BRUTE_FORCE_LIMIT = 8


def assign_optimal_bruteforce(
    matrix: UtilityMatrix, caps: CapacityMap, epoch: int = 0
) -> Assignment:
    """Exhaustive maximum-total-utility matching for tiny instances.

    Ties prefer leaving a task unassigned, then the lowest volunteer id,
    scanning tasks in id order; the result is therefore unique.
    """
    n, m = len(matrix.volunteers), len(matrix.tasks)
    if n > _BRUTE_FORCE_LIMIT or m > _BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(
            f"{n}x{m} exceeds the {_BRUTE_FORCE_LIMIT}x{_BRUTE_FORCE_LIMIT} guard"
        )
    task_order = sorted(range(m), key=lambda j: matrix.tasks[j])
    vol_order = sorted(range(n), key=lambda i: matrix.volunteers[i])
    start = tuple(min(caps.get(matrix.volunteers[i]), m) for i in range(n))
    memo: dict[tuple[int, tuple[int, ...]], tuple[float, int]] = {}

    def best(k: int, state: tuple[int, ...]) -> float:
        if k == m:
            return 0.0
        key = (k, state)
        if key in memo:
            return memo[key][0]
        j = task_order[k]
        best_total, choice = best(k + 1, state), -1
        for i in vol_order:
            if state[i] == 0:
                continue
            next_state = state[:i] + (state[i] - 1,) + state[i + 1 :]
            cand = float(matrix.utilities[i, j]) + best(k + 1, next_state)
            if cand > best_total:
                best_total, choice = cand, i
        memo[key] = (best_total, choice)
        return best_total

    best(0, start)
    pairs = []
    state = start
    for k in range(m):
        _, choice = memo[(k, state)]
        if choice >= 0:
            j = task_order[k]
            pairs.append(
                AssignedPair(
                    matrix.volunteers[choice],
                    matrix.tasks[j],
                    float(matrix.utilities[choice, j]),
                )
            )
            state = state[:choice] + (state[choice] - 1,) + state[choice + 1 :]
    return Assignment(pairs=tuple(pairs), epoch=epoch)


def validate_assignment(
    assignment: Assignment, caps: CapacityMap, matrix: Optional[UtilityMatrix] = None
) -> None:
    """Shared feasibility check: task uniqueness, capacity bounds, utility range."""
    seen_tasks: set[str] = set()
    load: dict[str, int] = {}
    for pair in assignment.pairs:
        if pair.task_id in seen_tasks:
            raise ValueError(f"task {pair.task_id!r} assigned twice")
        seen_tasks.add(pair.task_id)
        load[pair.volunteer_id] = load.get(pair.volunteer_id, 0) + 1
        if load[pair.volunteer_id] > caps.get(pair.volunteer_id):
            raise ValueError(f"volunteer {pair.volunteer_id!r} over capacity")
        if not 0.0 <= pair.utility <= 1.0:
            raise ValueError(f"utility {pair.utility} out of [0, 1]")
        if matrix is not None:
            if abs(pair.utility - matrix.cell(pair.volunteer_id, pair.task_id)) > 1e-9:
                raise ValueError(
                    f"utility for ({pair.volunteer_id}, {pair.task_id}) "
                    "does not match the matrix"
                )


def canonical_assignment_bytes(assignment: Assignment) -> bytes:
    """Canonical serialization used for digests: compact JSON, fixed key order."""
    payload = {
        "epoch": assignment.epoch,
        "pairs": [[p.volunteer_id, p.task_id, p.utility] for p in assignment.pairs],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def assignment_digest(assignment: Assignment) -> bytes:
    return hashlib.sha256(canonical_assignment_bytes(assignment)).digest()


@dataclass
class EpochResult:
    assignment: Assignment
    matrix: UtilityMatrix
    state: WillingnessState


def run_epoch(
    profiles: Sequence[Profile],
    taskspecs: Sequence[TaskSpec],
    histories: Optional[Mapping[str, History]],
    caps: CapacityMap,
    utility_params: UtilityParams,
    willingness_params: WillingnessParams,
    state: WillingnessState,
    epoch: int = 0,
) -> EpochResult:
    """One decision epoch: willingness (smoothed against state) -> utilities -> greedy."""

    def willingness_fn(profile: Profile, task: TaskSpec) -> float:
        history = None
        if histories:
            history = histories.get(profile.history_ref or profile.id)
        return pair_willingness(profile, task, history, state, willingness_params)

    matrix = build_utility_matrix(profiles, taskspecs, willingness_fn, utility_params)
    assignment = assign_swati(matrix, caps, epoch=epoch)
    return EpochResult(assignment=assignment, matrix=matrix, state=state)
