import numpy as np
import pytest

from match_arena.graph_core import ArrivalInstance
from match_arena.rounding import (Arc, ArcKind, ArcProfile, RoundingConfig, SelectionGraph, build_selection,
                                  greedy_match_pruned, greedy_status_trace, improved_plan, prune_selection,
                                  random_profile, resample_from_plan, resample_vertex, sample_profile)

from conftest import instance_suite

P, S = ArcKind.PRIMARY, ArcKind.SECONDARY

# branching fixture, arrival order u5 b4 a4 u4 a3 u3 a2 u2 u1 l2 u l1
U5, B4, A4, U4, A3, U3, A2, U2, U1, L2, U, L1 = range(12)
LEFT_PRIMARY = {U: U1, U1: U2, U2: U3, U3: U4, U4: U5, A2: A3, A3: A4, L1: L2}
LEFT_SECONDARY = {U4: B4, A2: U3, L1: U}


def left_fixture():
    edges = [(s, t) for s, t in LEFT_PRIMARY.items()] + [(s, t) for s, t in LEFT_SECONDARY.items()]
    inst = ArrivalInstance.from_edges(12, edges)
    prof = ArcProfile.empty(12)
    for s, t in LEFT_PRIMARY.items():
        prof.primary[s] = t
    for s, t in LEFT_SECONDARY.items():
        prof.secondary[s] = t
    return inst, prof


def test_branching_fixture_matching():
    inst, prof = left_fixture()
    h = prune_selection(build_selection(inst, prof))
    got = {frozenset(e) for e in greedy_match_pruned(h, inst)}
    assert got == {frozenset(e) for e in [(U1, U2), (U4, U5), (A2, U3), (A3, A4), (L1, L2)]}


def test_chain_fixture():
    from match_arena.diagnostics import primary_path_stats
    inst = ArrivalInstance.from_edges(5, [(4, 3), (3, 2), (2, 1), (1, 0)])
    prof = ArcProfile.empty(5)
    for s in range(1, 5):
        prof.primary[s] = s - 1
    h = prune_selection(build_selection(inst, prof))
    stats = primary_path_stats(h, {}, inst)
    assert stats.length[4] == 4
    assert {frozenset(e) for e in greedy_match_pruned(h)} == {frozenset((2, 3)), frozenset((0, 1))}


def test_empty_profile():
    inst = ArrivalInstance.from_edges(3, [(0, 1)])
    g = build_selection(inst, ArcProfile.empty(3))
    assert g.arcs == ()
    assert prune_selection(g).arcs == ()


def test_two_kinds():
    inst = ArrivalInstance.from_edges(3, [(0, 2), (1, 2)])
    prof = ArcProfile.empty(3)
    prof.primary[2], prof.secondary[2] = 0, 1
    g = build_selection(inst, prof)
    assert g.arcs == (Arc(2, 0, P), Arc(2, 1, S))


def test_choice_outside_neighborhood():
    inst = ArrivalInstance.from_edges(3, [(0, 2)])
    prof = ArcProfile.empty(3)
    prof.primary[2] = 1
    with pytest.raises(ValueError):
        build_selection(inst, prof)


def test_prune_keeps_earliest_primary():
    g = SelectionGraph(4, (Arc(1, 0, P), Arc(2, 0, P), Arc(3, 0, S)))
    assert prune_selection(g).arcs == (Arc(1, 0, P),)


def test_prune_drops_secondary_parallel_to_primary():
    g = SelectionGraph(3, (Arc(2, 0, P), Arc(2, 0, S), Arc(2, 1, S)))
    assert prune_selection(g).arcs == (Arc(2, 0, P), Arc(2, 1, S))


def test_secondary_before_first_primary_survives():
    g = SelectionGraph(4, (Arc(2, 0, S), Arc(3, 0, P)))
    assert prune_selection(g).arcs == (Arc(2, 0, S), Arc(3, 0, P))


def test_single_primary_arc_matched():
    g = SelectionGraph(2, (Arc(1, 0, P),))
    assert greedy_match_pruned(prune_selection(g)) == [(0, 1)]


def test_arc_count_and_pruned_structure(rng):
    for inst in instance_suite(4, 40, 2, 12):
        prof = random_profile(inst, rng)
        g = build_selection(inst, prof)
        count = sum(p is not None for p in prof.primary) + sum(s is not None for s in prof.secondary)
        assert len(g.arcs) == count
        h = prune_selection(g)
        indeg = np.zeros(inst.n, dtype=int)
        for a in h.arcs:
            assert a.target < a.source
            if a.kind is P:
                indeg[a.target] += 1
        assert indeg.max(initial=0) <= 1
        assert set(h.arcs) <= set(g.arcs)


def _max_status_gap(inst, a, b):
    _, ta = greedy_status_trace(prune_selection(build_selection(inst, a)))
    _, tb = greedy_status_trace(prune_selection(build_selection(inst, b)))
    return int((ta != tb).sum(axis=1).max())


def test_perturbation_arbitrary_profiles(rng):
    for inst in instance_suite(6, 50, 4, 16, 0.2, 0.7):
        for _ in range(20):
            prof = random_profile(inst, rng, 0.9, 0.5)
            v = int(rng.integers(inst.n))
            assert _max_status_gap(inst, prof, resample_vertex(inst, prof, v, rng, 0.9, 0.5)) <= 2


def test_perturbation_plan_profiles(rng):
    cfg = RoundingConfig()
    for inst in instance_suite(13, 10, 4, 10):
        plan = improved_plan(inst, cfg)
        for _ in range(30):
            prof = sample_profile(plan, rng)
            v = int(rng.integers(inst.n))
            assert _max_status_gap(inst, prof, resample_from_plan(plan, prof, v, rng)) <= 2
