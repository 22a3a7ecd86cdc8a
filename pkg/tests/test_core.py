import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ranet import (
    CapacityError,
    ChoiceTrace,
    RngState,
    TraceError,
    apply_step,
    degree_histogram,
    generate,
    init_state,
    max_degree,
    replay,
    sample_index,
)
from ranet.core import MAX_T, check_capacity

from reference import ran, ran_seeded


def all_traces(t):
    return itertools.product(*[range(2 * s + 1) for s in range(t)])


def test_init_state():
    s = init_state()
    assert (s.num_vertices, s.num_edges, s.num_faces) == (3, 3, 1)
    assert s.degrees.tolist() == [2, 2, 2]
    assert degree_histogram(s).as_dict() == {2: 3}
    assert s.faces.tolist() == [[0, 1, 2]]
    assert s.edges().tolist() == [[0, 1], [1, 2], [2, 0]]
    assert max_degree(s) == 2


def test_first_step_is_forced():
    s = apply_step(init_state(), 0)
    assert s.degrees.tolist() == [3, 3, 3, 3]
    assert s.faces.tolist() == [[0, 1, 3], [1, 2, 3], [2, 0, 3]]
    assert degree_histogram(s).as_dict() == {3: 4}


def test_second_step():
    s = apply_step(apply_step(init_state(), 0), 0)
    assert dict(enumerate(s.degrees.tolist())) == {0: 4, 1: 4, 2: 3, 3: 4, 4: 3}
    assert degree_histogram(s).as_dict() == {3: 2, 4: 3}


def test_every_step_two_choice_gives_same_histogram():
    hists = {tuple(degree_histogram(replay(tr)).as_dict().items()) for tr in all_traces(2)}
    assert hists == {((3, 2), (4, 3))}
    assert max(max_degree(replay(tr)) for tr in all_traces(2)) == 4


def test_every_t3_trace_gives_same_histogram():
    traces = list(all_traces(3))
    assert len(traces) == 15
    hists = {tuple(degree_histogram(replay(tr)).as_dict().items()) for tr in traces}
    assert hists == {((3, 2), (4, 2), (5, 2))}


@pytest.mark.parametrize("t", [0, 1, 2, 5])
def test_apply_step_rejects_out_of_range(t):
    s = generate(t, 1, edges=True)
    with pytest.raises(TraceError):
        apply_step(s, 2 * t + 1)
    with pytest.raises(TraceError):
        apply_step(s, -1)


def test_sample_index():
    s = init_state()
    rng = RngState.from_seed(4)
    assert {sample_index(s, rng) for _ in range(20)} == {0}
    s = generate(10, 1)
    a = sample_index(s, RngState.from_seed(77))
    b = sample_index(s, RngState.from_seed(77))
    assert a == b and 0 <= a < 21


@pytest.mark.parametrize("seed", [0, 1, 2**63, 2**64 - 1])
def test_generate_small(seed):
    assert degree_histogram(generate(1, seed)).as_dict() == {3: 4}
    assert degree_histogram(generate(3, seed)).as_dict() == {3: 2, 4: 2, 5: 2}
    assert degree_histogram(generate(0, seed)).as_dict() == {2: 3}


def test_generate_negative_t():
    with pytest.raises(ValueError):
        generate(-1, 0)


def test_generate_large_is_deterministic():
    a = generate(10**6, 1, edges=True)
    b = generate(10**6, 1, edges=True)
    assert np.array_equal(a.edges(), b.edges())
    assert a.same_graph(b)


def test_generate_matches_pure_python_reference():
    for seed in range(5):
        trace, (deg, faces) = ran_seeded(300, seed)
        s = generate(300, seed, record_trace=True)
        assert list(s.trace) == trace
        assert s.degrees.tolist() == deg
        assert [tuple(f) for f in s.faces.tolist()] == faces


def test_stepwise_matches_generate():
    g = generate(200, 9, edges=True, record_trace=True)
    s = init_state()
    for idx in g.trace:
        apply_step(s, idx)
    assert s.same_graph(g)
    assert np.array_equal(s.edges(), g.edges())


def test_replay_examples():
    assert replay([0]).same_graph(apply_step(init_state(), 0))
    g = generate(100, 5, record_trace=True, edges=True)
    assert replay(g.trace, edges=True).same_graph(g)
    with pytest.raises(TraceError) as err:
        replay([0, 3])
    assert err.value.step == 2
    assert "step 2" in str(err.value)


def test_trace_validation_names_first_bad_step():
    with pytest.raises(TraceError) as err:
        ChoiceTrace([0, 1, 4, 9]).validate()
    assert err.value.step == 4
    with pytest.raises(TraceError):
        ChoiceTrace([1]).validate()


@settings(max_examples=40, deadline=None)
@given(t=st.integers(0, 3000), seed=st.integers(0, 2**64 - 1))
def test_generate_equals_replay_of_its_trace(t, seed):
    g = generate(t, seed, record_trace=True, edges=True)
    assert len(g.trace) == t
    assert replay(g.trace, edges=True).same_graph(g)


@settings(max_examples=60, deadline=None)
@given(t=st.sampled_from([1, 10, 100, 1000, 10**4]), seed=st.integers(0, 2**64 - 1))
def test_structural_invariants(t, seed):
    s = generate(t, seed, edges=True)
    h = degree_histogram(s)
    assert s.num_vertices == t + 3 == h.vertex_count() == s.degrees.shape[0]
    assert s.edges().shape[0] == 3 * (t + 1) == s.num_edges
    assert s.faces.shape[0] == 2 * t + 1
    assert h.degree_sum() == 6 * (t + 1)
    assert min(h.counts) == 3
    # Euler's formula with the outer face counted
    assert s.num_vertices - s.num_edges + (s.num_faces + 1) == 2


@settings(max_examples=20, deadline=None)
@given(t=st.integers(1, 1000), seed=st.integers(0, 2**32))
def test_face_corners_are_edges(t, seed):
    s = generate(t, seed, edges=True)
    edges = {frozenset(e) for e in s.edges().tolist()}
    assert len(edges) == 3 * (t + 1)
    for a, b, c in s.faces.tolist():
        assert len({a, b, c}) == 3
        assert {frozenset((a, b)), frozenset((b, c)), frozenset((c, a))} <= edges


@settings(max_examples=20, deadline=None)
@given(t=st.integers(1, 2000), seed=st.integers(0, 2**32))
def test_face_membership_matches_degree(t, seed):
    s = generate(t, seed)
    member = Counter(s.faces.ravel().tolist())
    deg = s.degrees.tolist()
    for v in range(3):
        assert member[v] == deg[v] - 1
    for v in range(3, t + 3):
        assert member[v] == deg[v]


def test_apply_step_is_pure_in_state_and_index():
    base = generate(50, 3, edges=True)
    for idx in (0, 17, 100):
        a = apply_step(base.copy(), idx)
        b = apply_step(base.copy(), idx)
        assert a.same_graph(b)
        deg, faces = ran(list(generate(50, 3, record_trace=True).trace) + [idx])
        assert a.degrees.tolist() == deg


def test_capacity_errors():
    with pytest.raises(CapacityError):
        generate(10**6, 1, memory_budget=1024)
    with pytest.raises(CapacityError):
        check_capacity(MAX_T + 1, memory_budget=2**70)


def test_histogram_helpers():
    h = degree_histogram(generate(2, 0))
    assert h[3] == 2 and h[4] == 3 and h[9] == 0
    assert h.max_degree == 4
    assert h.t == 2


def test_edges_need_recording():
    with pytest.raises(ValueError):
        generate(5, 1).edges()
