"""Per-pair willingness estimation.

A volunteer's willingness toward a task blends a history-derived acceptance
tendency with a score over profile preference cues, squashes the mix through
a gain/center logistic, and smooths the result exponentially across decision
epochs. All outputs stay in [0, 1].

The logistic uses gain 4 and center 0.5 by default so the [0, 1] input range
maps to roughly [0.12, 0.88]; a plain logistic on [0, 1] would compress into
[0.5, 0.73] and make willingness nearly constant across volunteers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError, ParseError
from .extraction import Profile, TaskSpec

Pair = tuple[str, str]

# Cue vector layout: (domain_affinity, prior_exposure, stated_interest,
# volunteering_history, availability). Affinity is halved when the volunteer
# shares no skill with the task, since the profile-level signal then says
# little about this particular pairing.
_NO_OVERLAP_AFFINITY_FACTOR = 0.5


@dataclass(frozen=True)
class HistoryRecord:
    task_skills: frozenset[str]
    accepted: bool


@dataclass(frozen=True)
class History:
    volunteer_id: str
    records: tuple[HistoryRecord, ...] = ()


@dataclass(frozen=True)
class WillingnessParams:
    history_weight: float = 0.5
    smoothing: float = 0.7
    cue_weights: tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)
    sigmoid_gain: float = 4.0
    sigmoid_center: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.history_weight <= 1.0:
            raise ConfigError("history_weight must lie in [0, 1]")
        if not 0.0 <= self.smoothing <= 1.0:
            raise ConfigError("smoothing must lie in [0, 1]")
        if len(self.cue_weights) != 5 or any(w < 0 for w in self.cue_weights):
            raise ConfigError("cue_weights must be 5 non-negative values")
        if abs(sum(self.cue_weights) - 1.0) > 1e-9:
            raise ConfigError("cue_weights must sum to 1")
        if self.sigmoid_gain <= 0:
            raise ConfigError("sigmoid_gain must be positive")


class WillingnessState:
    """Mutable store of last smoothed willingness per (volunteer, task) pair.

    The scoring functions around it are pure; this is the one mutable piece.
    Updates for distinct pairs may proceed concurrently, but each pair's
    read-modify-write must stay atomic; one writer per epoch is the
    reference contract.
    """

    def __init__(self):
        self._values: dict[Pair, float] = {}

    def get(self, pair: Pair) -> Optional[float]:
        return self._values.get(pair)

    def set(self, pair: Pair, value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"willingness {value} out of [0, 1]")
        self._values[pair] = value

    def __len__(self) -> int:
        return len(self._values)

    def snapshot(self) -> dict[Pair, float]:
        return dict(self._values)


def cue_vector(volunteer: Profile, task: TaskSpec) -> np.ndarray:
    """Pairwise cue vector; affinity is damped when skill sets are disjoint."""
    cues = volunteer.cues
    affinity = cues.domain_affinity
    if not (volunteer.skills & task.required_skills):
        affinity *= _NO_OVERLAP_AFFINITY_FACTOR
    return np.array(
        [
            affinity,
            cues.prior_exposure,
            cues.stated_interest,
            cues.volunteering_history,
            cues.availability,
        ]
    )


def profile_score(cue_vec: np.ndarray, params: WillingnessParams) -> float:
    """Convex combination of cue components under the configured weights."""
    return float(np.dot(np.asarray(params.cue_weights), cue_vec))


def history_tendency(history: Optional[History], task: TaskSpec) -> float:
    """Acceptance fraction over history records relevant to the task.

    Records whose skills intersect the task's requirements count as relevant;
    with no relevant records the overall acceptance fraction is used, and with
    no history at all the uninformative prior 0.5 is returned.
    """
    if history is None or not history.records:
        return 0.5
    relevant = [r for r in history.records if r.task_skills & task.required_skills]
    pool = relevant if relevant else history.records
    return sum(1 for r in pool if r.accepted) / len(pool)


def raw_willingness(g: float, f: float, params: WillingnessParams) -> float:
    """Mix history tendency and cue score, then squash through the logistic."""
    mixed = params.history_weight * g + (1.0 - params.history_weight) * f
    z = params.sigmoid_gain * (mixed - params.sigmoid_center)
    return 1.0 / (1.0 + math.exp(-z))


def smooth_willingness(
    state: WillingnessState, pair: Pair, w_hat: float, params: WillingnessParams
) -> float:
    """Exponentially smooth against the pair's previous value and store it.

    A pair never seen before initializes directly from the raw estimate, so a
    single-epoch run over a static corpus is smoothing-free.
    """
    if not 0.0 <= w_hat <= 1.0:
        raise ValueError(f"raw willingness {w_hat} out of [0, 1]")
    previous = state.get(pair)
    if previous is None:
        value = w_hat
    else:
        value = params.smoothing * previous + (1.0 - params.smoothing) * w_hat
    state.set(pair, value)
    return value


def pair_willingness(
    volunteer: Profile,
    task: TaskSpec,
    history: Optional[History],
    state: WillingnessState,
    params: WillingnessParams,
) -> float:
    """Full willingness pipeline for one pair: cues -> mix -> squash -> smooth."""
    f = profile_score(cue_vector(volunteer, task), params)
    g = history_tendency(history, task)
    w_hat = raw_willingness(g, f, params)
    return smooth_willingness(state, (volunteer.id, task.id), w_hat, params)


def histories_from_records(records: Iterable[dict]) -> dict[str, History]:
    """Group {volunteer_id, task_skills[], accepted} dicts into History objects."""
    grouped: dict[str, list[HistoryRecord]] = {}
    for obj in records:
        grouped.setdefault(obj["volunteer_id"], []).append(
            HistoryRecord(
                task_skills=frozenset(obj["task_skills"]), accepted=obj["accepted"]
            )
        )
    return {
        vid: History(volunteer_id=vid, records=tuple(recs))
        for vid, recs in grouped.items()
    }


def load_history(path: str) -> dict[str, History]:
    """Read history records from JSONL: {volunteer_id, task_skills[], accepted}."""
    grouped: dict[str, list[HistoryRecord]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
            try:
                vid = obj["volunteer_id"]
                skills = obj["task_skills"]
                accepted = obj["accepted"]
            except (KeyError, TypeError):
                raise ParseError(
                    "record needs volunteer_id, task_skills, accepted", line_no
                ) from None
            if not isinstance(vid, str) or not isinstance(accepted, bool):
                raise ParseError("bad field types", line_no)
            if not isinstance(skills, list) or not all(isinstance(s, str) for s in skills):
                raise ParseError("task_skills must be a list of strings", line_no)
            grouped.setdefault(vid, []).append(
                HistoryRecord(task_skills=frozenset(skills), accepted=accepted)
            )
    return {vid: History(volunteer_id=vid, records=tuple(recs)) for vid, recs in grouped.items()}
