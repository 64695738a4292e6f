import random

import numpy as np
import pytest

from swati.assignment import (
    Assignment,
    AssignedPair,
    CapacityMap,
    UtilityForm,
    UtilityParams,
    assign_optimal_bruteforce,
    assign_random,
    assign_skill_only,
    assign_swati,
    assignment_digest,
    build_utility_matrix,
    canonical_assignment_bytes,
    compute_utility,
    run_epoch,
    utility_matrix_from_components,
    validate_assignment,
)
from swati.corpus import SyntheticConfig, generate_synthetic, generate_synthetic_history
from swati.errors import ConfigError, DimensionError, InstanceTooLargeError
from swati.extraction import build_market
from swati.similarity import content_sim, skill_sim
from swati.willingness import (
    WillingnessParams,
    WillingnessState,
    histories_from_records,
    pair_willingness,
)


def _matrix(utilities, skill=None, content=None, willingness=None, params=None):
    """UtilityMatrix with U == given array (components s=c=u, w=1 by default)."""
    u = np.asarray(utilities, dtype=np.float64)
    n, m = u.shape
    vols = [f"v{i + 1}" for i in range(n)]
    tasks = [f"t{j + 1}" for j in range(m)]
    return utility_matrix_from_components(
        vols,
        tasks,
        u if skill is None else np.asarray(skill, dtype=np.float64),
        u if content is None else np.asarray(content, dtype=np.float64),
        np.ones_like(u) if willingness is None else np.asarray(willingness, dtype=np.float64),
        params or UtilityParams(),
    )


def _pairs(assignment):
    return {(p.volunteer_id, p.task_id) for p in assignment.pairs}


# --- utility computation ----------------------------------------------------


def test_compute_utility_upper_endpoint():
    for form in UtilityForm:
        params = UtilityParams(form=form)
        assert compute_utility(1.0, 1.0, 1.0, params) == 1.0


def test_compute_utility_zero_willingness_separates_forms():
    product = UtilityParams(form=UtilityForm.PRODUCT)
    split = UtilityParams(form=UtilityForm.SPLIT)
    assert compute_utility(0.8, 0.6, 0.0, product) == 0.0
    assert compute_utility(0.8, 0.6, 0.0, split) == pytest.approx(0.4, abs=1e-12)


def test_compute_utility_hand_value():
    params = UtilityParams()
    assert compute_utility(0.6, 0.4, 0.5, params) == pytest.approx(0.25, abs=1e-12)


def test_utility_params_validation():
    with pytest.raises(ConfigError):
        UtilityParams(skill_weight=0.6, content_weight=0.6)
    with pytest.raises(ConfigError):
        UtilityParams(skill_weight=-0.1, content_weight=1.1)


def test_capacity_map_defaults_and_validation():
    caps = CapacityMap({"v1": 3})
    assert caps.get("v1") == 3
    assert caps.get("anyone") == 1
    with pytest.raises(ConfigError):
        CapacityMap({"v1": 0})


# --- matrix construction ----------------------------------------------------


def _tiny_market(seed=3, n=4, m=3, builtin=None):
    corpus = generate_synthetic(
        SyntheticConfig(seed=seed, n_volunteers=n, n_tasks=m), builtin
    )
    return build_market(corpus, builtin)


def test_matrix_matches_scalar_composition(builtin_ontology):
    market = _tiny_market(builtin=builtin_ontology)
    params = UtilityParams()
    state = WillingnessState()
    wp = WillingnessParams()

    def wf(v, t):
        return pair_willingness(v, t, None, state, wp)

    matrix = build_utility_matrix(market.profiles, market.taskspecs, wf, params)
    check_state = WillingnessState()
    for i, prof in enumerate(market.profiles):
        for j, task in enumerate(market.taskspecs):
            s = skill_sim(prof.skills, task.required_skills)
            c = content_sim(prof.content_vector, task.content_vector)
            w = pair_willingness(prof, task, None, check_state, wp)
            assert matrix.skill[i, j] == pytest.approx(s, abs=1e-12)
            assert matrix.content[i, j] == pytest.approx(c, abs=1e-12)
            assert matrix.willingness[i, j] == pytest.approx(w, abs=1e-12)
            assert matrix.utilities[i, j] == pytest.approx(
                compute_utility(s, c, w, params), abs=1e-12
            )


def test_matrix_shape_and_range(builtin_ontology):
    market = _tiny_market(seed=5, n=2, m=3, builtin=builtin_ontology)
    matrix = build_utility_matrix(
        market.profiles, market.taskspecs, lambda v, t: 0.5, UtilityParams()
    )
    assert matrix.utilities.shape == (2, 3)
    assert matrix.utilities.min() >= 0.0 and matrix.utilities.max() <= 1.0


def test_matrix_row_permutation(builtin_ontology):
    market = _tiny_market(seed=9, n=4, m=3, builtin=builtin_ontology)
    params = UtilityParams()
    base = build_utility_matrix(market.profiles, market.taskspecs, lambda v, t: 0.7, params)
    perm = [2, 0, 3, 1]
    shuffled = build_utility_matrix(
        [market.profiles[i] for i in perm], market.taskspecs, lambda v, t: 0.7, params
    )
    assert np.allclose(shuffled.utilities, base.utilities[perm, :])


def test_matrix_requires_nonempty_inputs(builtin_ontology):
    market = _tiny_market(builtin=builtin_ontology)
    with pytest.raises(DimensionError):
        build_utility_matrix([], market.taskspecs, lambda v, t: 0.5, UtilityParams())


# --- greedy matcher ---------------------------------------------------------


def test_swati_single_pair():
    assignment = assign_swati(_matrix([[0.9]]), CapacityMap())
    assert assignment.pairs == (AssignedPair("v1", "t1", 0.9),)


def test_swati_respects_capacity():
    assignment = assign_swati(_matrix([[0.9, 0.8]]), CapacityMap({"v1": 1}))
    assert _pairs(assignment) == {("v1", "t1")}


def test_swati_lexicographic_tie_break():
    assignment = assign_swati(_matrix([[0.5, 0.5], [0.5, 0.5]]), CapacityMap())
    assert [(p.volunteer_id, p.task_id) for p in assignment.pairs] == [
        ("v1", "t1"),
        ("v2", "t2"),
    ]


def test_swati_deterministic(builtin_ontology):
    market = _tiny_market(seed=17, n=5, m=5, builtin=builtin_ontology)
    params = UtilityParams()
    a = run_epoch(
        market.profiles, market.taskspecs, None, CapacityMap(), params,
        WillingnessParams(), WillingnessState(),
    ).assignment
    b = run_epoch(
        market.profiles, market.taskspecs, None, CapacityMap(), params,
        WillingnessParams(), WillingnessState(),
    ).assignment
    assert a == b


def test_swati_scaling_invariance():
    rng = np.random.default_rng(0)
    u = rng.uniform(size=(5, 6)) * 0.25
    base = _pairs(assign_swati(_matrix(u), CapacityMap()))
    for k in (0.5, 0.25, 2.0, 4.0):
        # powers of two scale floats exactly, preserving the order
        scaled = _pairs(assign_swati(_matrix(u * k), CapacityMap()))
        assert scaled == base


def test_swati_equals_skill_only_when_s_equals_c():
    rng = np.random.default_rng(1)
    s = rng.uniform(size=(4, 4))
    matrix = _matrix(s, skill=s, content=s, willingness=np.ones_like(s))
    assert _pairs(assign_swati(matrix, CapacityMap())) == _pairs(
        assign_skill_only(matrix, CapacityMap())
    )


# --- baselines ----------------------------------------------------------------


def test_random_respects_capacity():
    assignment = assign_random(_matrix([[0.9, 0.8]]), CapacityMap({"v1": 1}), seed=0)
    assert len(assignment.pairs) == 1


def test_random_reproducible():
    matrix = _matrix(np.random.default_rng(2).uniform(size=(4, 5)))
    a = assign_random(matrix, CapacityMap(), seed=42)
    b = assign_random(matrix, CapacityMap(), seed=42)
    assert a == b


def test_random_perfect_matching_when_square():
    matrix = _matrix(np.random.default_rng(3).uniform(size=(6, 6)))
    assignment = assign_random(matrix, CapacityMap(), seed=7)
    assert len(assignment.pairs) == 6
    assert len({p.volunteer_id for p in assignment.pairs}) == 6


def test_skill_only_ignores_willingness():
    skill = [[1.0, 0.5]]
    willingness = [[0.1, 0.9]]
    matrix = _matrix(
        np.zeros((1, 2)), skill=skill, content=np.zeros((1, 2)), willingness=willingness
    )
    assignment = assign_skill_only(matrix, CapacityMap({"v1": 1}))
    assert _pairs(assignment) == {("v1", "t1")}
    # reported utility is the full utility of that cell, not the skill score
    assert assignment.pairs[0].utility == pytest.approx(
        float(matrix.utilities[0, 0]), abs=1e-12
    )


def test_skill_only_all_ties_reduce_to_lexicographic():
    s = np.full((2, 2), 0.4)
    matrix = _matrix(np.zeros((2, 2)), skill=s, content=np.zeros((2, 2)),
                     willingness=np.full((2, 2), 0.5))
    assignment = assign_skill_only(matrix, CapacityMap())
    assert [(p.volunteer_id, p.task_id) for p in assignment.pairs] == [
        ("v1", "t1"),
        ("v2", "t2"),
    ]


def test_skill_only_zero_skill_still_covers():
    matrix = _matrix(
        np.zeros((2, 5)), skill=np.zeros((2, 5)), content=np.zeros((2, 5)),
        willingness=np.ones((2, 5)),
    )
    assignment = assign_skill_only(matrix, CapacityMap({"v1": 2, "v2": 2}, default=2))
    assert len(assignment.pairs) == 4  # min(N*c, M)


# --- brute force oracle -------------------------------------------------------


def test_bruteforce_single_cell():
    assignment = assign_optimal_bruteforce(_matrix([[0.9]]), CapacityMap())
    assert _pairs(assignment) == {("v1", "t1")}


def test_bruteforce_prefers_skipping_zero_utility():
    assignment = assign_optimal_bruteforce(_matrix([[0.0]]), CapacityMap())
    assert assignment.pairs == ()


def test_bruteforce_beats_greedy_on_crafted_instance():
    u = [[0.9, 0.8], [0.85, 0.1]]
    matrix = _matrix(u)
    greedy = assign_swati(matrix, CapacityMap())
    optimal = assign_optimal_bruteforce(matrix, CapacityMap())
    assert greedy.total_utility() == pytest.approx(1.0, abs=1e-9)
    assert _pairs(optimal) == {("v1", "t2"), ("v2", "t1")}
    assert optimal.total_utility() == pytest.approx(1.65, abs=1e-9)


def test_bruteforce_guard():
    with pytest.raises(InstanceTooLargeError):
        assign_optimal_bruteforce(_matrix(np.zeros((9, 1))), CapacityMap())


def test_greedy_half_approximation_sample():
    rng = random.Random(123)
    for _ in range(50):
        n, m = rng.randint(1, 6), rng.randint(1, 6)
        u = np.array([[rng.random() for _ in range(m)] for _ in range(n)])
        caps = CapacityMap({f"v{i + 1}": rng.choice([1, 2]) for i in range(n)})
        matrix = _matrix(u)
        greedy_total = assign_swati(matrix, caps).total_utility()
        optimal_total = assign_optimal_bruteforce(matrix, caps).total_utility()
        assert greedy_total >= 0.5 * optimal_total - 1e-9


# --- shared validator ---------------------------------------------------------


def test_validator_accepts_all_algorithms(builtin_ontology):
    rng = np.random.default_rng(11)
    matrix = _matrix(rng.uniform(size=(5, 4)))
    caps = CapacityMap({"v1": 2})
    for assignment in (
        assign_swati(matrix, caps),
        assign_skill_only(matrix, caps),
        assign_random(matrix, caps, seed=5),
        assign_optimal_bruteforce(matrix, caps),
    ):
        validate_assignment(assignment, caps, matrix)


def test_validator_rejects_duplicate_task():
    bad = Assignment(
        pairs=(AssignedPair("v1", "t1", 0.5), AssignedPair("v2", "t1", 0.4))
    )
    with pytest.raises(ValueError):
        validate_assignment(bad, CapacityMap())


def test_validator_rejects_over_capacity():
    bad = Assignment(
        pairs=(AssignedPair("v1", "t1", 0.5), AssignedPair("v1", "t2", 0.4))
    )
    with pytest.raises(ValueError):
        validate_assignment(bad, CapacityMap({"v1": 1}))


def test_validator_rejects_wrong_utility():
    matrix = _matrix([[0.5]])
    bad = Assignment(pairs=(AssignedPair("v1", "t1", 0.9),))
    with pytest.raises(ValueError):
        validate_assignment(bad, CapacityMap(), matrix)


# --- epochs -------------------------------------------------------------------


def _epoch_inputs(builtin_ontology, seed=23):
    cfg = SyntheticConfig(seed=seed, n_volunteers=6, n_tasks=5)
    corpus = generate_synthetic(cfg, builtin_ontology)
    market = build_market(corpus, builtin_ontology)
    histories = histories_from_records(
        generate_synthetic_history(cfg, corpus, builtin_ontology)
    )
    return market, histories


def test_run_epoch_digest_is_stable(builtin_ontology):
    market, histories = _epoch_inputs(builtin_ontology)
    digests = []
    for _ in range(2):
        result = run_epoch(
            market.profiles, market.taskspecs, histories, CapacityMap(),
            UtilityParams(), WillingnessParams(), WillingnessState(),
        )
        digests.append(assignment_digest(result.assignment))
    assert digests[0] == digests[1]


@pytest.mark.parametrize("smoothing", [0.0, 1.0, 0.7])
def test_static_inputs_make_epochs_identical(builtin_ontology, smoothing):
    market, histories = _epoch_inputs(builtin_ontology)
    params = WillingnessParams(smoothing=smoothing)
    state = WillingnessState()
    first = run_epoch(
        market.profiles, market.taskspecs, histories, CapacityMap(),
        UtilityParams(), params, state, epoch=0,
    )
    second = run_epoch(
        market.profiles, market.taskspecs, histories, CapacityMap(),
        UtilityParams(), params, state, epoch=1,
    )
    assert _pairs(first.assignment) == _pairs(second.assignment)
    assert np.allclose(first.matrix.willingness, second.matrix.willingness)


def test_canonical_bytes_round_trip():
    assignment = Assignment(pairs=(AssignedPair("v1", "t1", 0.25),), epoch=2)
    blob = canonical_assignment_bytes(assignment)
    assert blob == b'{"epoch":2,"pairs":[["v1","t1",0.25]]}'
    assert len(assignment_digest(assignment)) == 32
