import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tourpart.bits import mask_of
from tourpart.flow import set_flow
from tourpart.generators import random_tournament
from tourpart.oracle import bruteforce_max_path_family, bruteforce_min_set_cut
from tourpart.paths import (
    InfeasiblePaths,
    PathSystem,
    check_path_system,
    forward_chords,
    max_disjoint_paths,
    minimize_path_system,
    verify_backward_chords,
)
from tourpart.tournament import build


def random_terminals(n, seed):
    rng = random.Random(seed)
    verts = list(range(n))
    rng.shuffle(verts)
    a = rng.randint(1, max(1, n // 3))
    b = rng.randint(1, max(1, n // 3))
    f = rng.randint(0, max(0, n - a - b - 1))
    return verts[:a], verts[a:a + b], verts[a + b:a + b + f]


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2**32))
def test_set_flow_value_matches_packing_and_cut(n, seed):
    T = random_tournament(n, seed)
    S, D, F = random_terminals(n, seed)
    passable = T.all_mask & ~mask_of(F)
    res = set_flow(T.out_rows, T.in_rows, mask_of(S), mask_of(D), passable)
    assert res.value == bruteforce_max_path_family(T, S, D, F)
    assert res.value == bruteforce_min_set_cut(T, S, D, F)
    assert res.cut.bit_count() == res.value
    ps = PathSystem(tuple(tuple(p) for p in res.paths), frozenset(F))
    assert not check_path_system(T, ps)
    for p in res.paths:
        assert p[0] in S and p[-1] in D
        assert not set(p[1:]) & set(S) and not set(p[:-1]) & set(D)


def test_infeasible_reports_maximum_and_cut():
    # transitive: nothing reaches vertex 0
    T = build(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    with pytest.raises(InfeasiblePaths) as e:
        max_disjoint_paths(T, [3], [0], want=1)
    assert e.value.maximum == 0 and e.value.cut == []


def test_terminal_overlap_rejected():
    T = random_tournament(6, 1)
    with pytest.raises(ValueError):
        max_disjoint_paths(T, [0, 1], [1, 2])
    with pytest.raises(ValueError):
        max_disjoint_paths(T, [0], [1], forbidden=[0])


def test_forward_chords():
    T = build(3, [(0, 1), (1, 2), (0, 2)])
    assert forward_chords(T, [0, 1, 2]) == [(0, 2)]
    T2 = build(3, [(0, 1), (1, 2), (2, 0)])
    assert forward_chords(T2, [0, 1, 2]) == []


def random_system(seed):
    rng = random.Random(seed)
    n = rng.randint(20, 200)
    T = random_tournament(n, seed)
    S, D, F = random_terminals(n, seed)
    F = F[: n // 4]
    ps = max_disjoint_paths(T, S, D, F)
    return T, ps


@pytest.mark.parametrize("seed", range(25))
def test_minimize_invariants(seed):
    T, ps = random_system(seed)
    out = minimize_path_system(T, ps)
    assert not check_path_system(T, out)
    # exchange re-pairs paths, so only the start set and end set are fixed
    assert sorted(p[0] for p in out.paths) == sorted(p[0] for p in ps.paths)
    assert sorted(p[-1] for p in out.paths) == sorted(p[-1] for p in ps.paths)
    assert out.covered <= ps.covered
    assert verify_backward_chords(T, out)
    again = minimize_path_system(T, out)
    assert again.paths == out.paths


def test_shortcut_on_long_path():
    # path 0->1->2->3 with chord 0->3 collapses to 0->3
    arcs = [(0, 1), (1, 2), (2, 3), (0, 3), (2, 0), (3, 1)]
    T = build(4, arcs)
    out = minimize_path_system(T, PathSystem(((0, 1, 2, 3),)))
    assert out.paths == ((0, 3),)


def test_bypass_replaces_prefix():
    # path 0..4 has only backward chords, but spare vertex 5 gives 0->5->4
    n = 6
    arcs = {(i, i + 1) for i in range(4)}
    for i in range(5):
        for j in range(i + 2, 5):
            arcs.add((j, i))
    arcs |= {(0, 5), (5, 4), (1, 5), (2, 5), (5, 3)}
    T = build(n, arcs)
    out = minimize_path_system(T, PathSystem(((0, 1, 2, 3, 4),)))
    assert out.paths == ((0, 5, 4),)
    assert out.covered == 3


def _bits_in(mask):
    return [v for v in range(mask.bit_length()) if mask >> v & 1]


def no_move_applies(T, ps):
    """Independent restatement of the three minimality conditions."""
    on = {v for p in ps.paths for v in p}
    free = [y for y in range(T.n) if y not in on and y not in ps.forbidden]
    for P in ps.paths:
        m = len(P) - 1
        if forward_chords(T, P):
            return False
        if m >= 3:
            for y in free:
                if T.beats(P[0], y) and any(T.beats(y, P[j]) for j in range(3, m + 1)):
                    return False
                if T.beats(y, P[-1]) and any(T.beats(P[j], y) for j in range(0, m - 2)):
                    return False
        for Q in ps.paths:
            if Q is P:
                continue
            hits = [i for i, y in enumerate(Q) if T.beats(P[0], y)]
            if len(hits) >= 3 and any(T.beats(Q[i], u) for i in hits[:-2] for u in P[1:]):
                return False
            hits = [i for i, y in enumerate(Q) if T.beats(y, P[-1])]
            if len(hits) >= 3 and any(T.beats(u, Q[i]) for i in hits[2:] for u in P[:-1]):
                return False
    return True


@pytest.mark.parametrize("seed", range(25))
def test_minimal_system_admits_no_move(seed):
    T, ps = random_system(seed)
    assert no_move_applies(T, minimize_path_system(T, ps))


@pytest.mark.parametrize("seed", range(40))
def test_minimize_long_walks(seed):
    from systems import random_long_system

    T, ps = random_long_system(seed)
    out = minimize_path_system(T, ps)
    assert not check_path_system(T, out)
    assert sorted(p[0] for p in out.paths) == sorted(p[0] for p in ps.paths)
    assert sorted(p[-1] for p in out.paths) == sorted(p[-1] for p in ps.paths)
    assert out.covered <= ps.covered
    assert no_move_applies(T, out)
    assert minimize_path_system(T, out).paths == out.paths
