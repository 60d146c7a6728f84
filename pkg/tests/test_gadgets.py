import random
from dataclasses import replace

import pytest

from tourpart.errors import PreconditionError, StageFailure
from tourpart.gadgets import (
    Gadget,
    build_dominating_seq,
    build_gadget_family,
    classify_vertices,
    compute_X,
    halving_holds,
    select_hubs,
    verify_gadget_properties,
)
from tourpart.generators import random_tournament
from tourpart.profile import DESK, PAPER
from tourpart.tournament import build


def transitive(n):
    return build(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.fixture(scope="module")
def desk_build():
    T = random_tournament(4000, 11)
    return T, build_gadget_family(T, 1, 2, DESK, 11)


class TestHubs:
    def test_transitive(self):
        assert select_hubs(transitive(5), 1) == ((0,), (4,))

    def test_too_many(self):
        with pytest.raises(PreconditionError) as e:
            select_hubs(transitive(4), 2)
        assert e.value.kind == "n-too-small"

    @pytest.mark.parametrize("seed", range(10))
    def test_disjoint_and_sized(self, seed):
        T = random_tournament(50, seed)
        plus, minus = select_hubs(T, 5)
        assert len(plus) == len(minus) == 5 and not set(plus) & set(minus)
        worst_in = min(T.out_degree(v) for v in plus)
        assert all(T.out_degree(v) <= worst_in for v in range(50) if v not in plus)


class TestDominatingSequence:
    def test_hub_beats_pool(self):
        T = transitive(6)
        assert build_dominating_seq(T, 0, range(1, 6), 3).vertices == (0,)

    def test_cap_zero(self):
        T = transitive(6)
        assert build_dominating_seq(T, 5, range(5), 0).vertices == (5,)

    def test_hub_in_pool_rejected(self):
        with pytest.raises(PreconditionError):
            build_dominating_seq(transitive(4), 1, [1, 2], 2)

    @pytest.mark.parametrize("seed", range(15))
    @pytest.mark.parametrize("direction", ["out", "in"])
    def test_structure_and_halving(self, seed, direction):
        n = 120
        T = random_tournament(n, seed)
        rng = random.Random(seed)
        a = rng.randrange(n)
        pool = [v for v in range(n) if v != a and rng.random() < 0.7]
        seq = build_dominating_seq(T, a, pool, 4, direction)
        vs = seq.vertices
        beats = T.beats if direction == "out" else (lambda x, y: T.beats(y, x))
        # each later vertex beats every earlier one
        assert all(beats(vs[j], vs[i]) for i in range(len(vs)) for j in range(i + 1, len(vs)))
        assert len(vs) <= 5
        # residual recomputed directly: pool vertices no chosen vertex beats
        resid = [w for w in pool if w not in vs and not any(beats(u, w) for u in vs)]
        assert len(resid) == seq.residual.bit_count()
        assert halving_holds(seq.candidate_sizes)


class TestComputeX:
    def test_short_path_has_empty_X(self):
        T = random_tournament(10, 1)
        g = Gadget(0, 0, 1, (0,), (1,), (1, 0) if T.beats(1, 0) else (1, 2, 0))
        if len(g.path) == 2:
            assert compute_X(T, g) == frozenset()

    def test_definition(self):
        T = random_tournament(30, 4)
        # S holds three vertices at each path end, so only 5 and 6 are inner
        g = Gadget(0, 0, 1, (0,), (1,), (1, 7, 8, 5, 6, 9, 10, 0))
        inner = [5, 6]
        assert g.U - g.S == set(inner)
        want = {
            u for u in range(30)
            if (T.beats(u, 0) and any(T.beats(w, u) for w in inner))
            or (T.beats(1, u) and any(T.beats(u, w) for w in inner))
        }
        assert compute_X(T, g) == frozenset(want)


def reclassify(T, family, k, t):
    """Per-vertex restatement of the okay / bad+ / bad- rules."""
    s_all = set().union(*(g.S for g in family.gadgets))
    okay, bp, bm = set(), set(), set()
    for u in range(T.n):
        if u in s_all:
            continue
        okay.add(u)
        miss_out = sum(not any(T.beats(u, x) for x in g.S_minus) for g in family.gadgets)
        miss_in = sum(not any(T.beats(x, u) for x in g.S_plus) for g in family.gadgets)
        if miss_out >= k * t:
            bp.add(u)
        if miss_in >= k * t:
            bm.add(u)
    return okay, bp, bm


def members(mask):
    return {v for v in range(mask.bit_length()) if mask >> v & 1}


class TestFamily:
    def test_structural_properties(self, desk_build):
        T, fam = desk_build
        assert len(fam.gadgets) == DESK.gadget_count(1, 2)
        rep = verify_gadget_properties(T, fam, 1, 2, DESK)
        for name in ("G1", "G2", "G3", "G4", "backward-chords", "dominating-halving"):
            assert rep.checks[name].passed, (name, rep.checks[name].counterexample)
        assert rep.gating_ok

    def test_classification_matches_definition(self, desk_build):
        T, fam = desk_build
        okay, bp, bm = reclassify(T, fam, 1, 2)
        assert members(fam.okay) == okay
        assert members(fam.bad_plus) == bp
        assert members(fam.bad_minus) == bm
        assert members(fam.good) == okay - bp - bm
        assert members(fam.bad) == bp & bm

    @pytest.mark.parametrize("seed", range(4))
    def test_classification_small(self, seed):
        T = random_tournament(300, seed)
        prof = DESK.with_changes(sigma1=8)
        fam = build_gadget_family(T, 1, 1, prof, seed)
        okay, bp, bm = reclassify(T, fam, 1, 1)
        assert (members(fam.okay), members(fam.bad_plus), members(fam.bad_minus)) == (okay, bp, bm)

    def test_unreachable_threshold(self, desk_build):
        T, fam = desk_build
        big = classify_vertices(T, fam, len(fam.gadgets) + 1, 1)
        assert big.bad_plus == 0 and big.bad_minus == 0

    def test_json_shape(self, desk_build):
        _, fam = desk_build
        d = fam.to_dict()
        assert len(d["gadgets"]) == len(fam.gadgets)
        assert d["classification"]["V_okay"] == sorted(members(fam.okay))

    def test_too_small(self):
        with pytest.raises(StageFailure) as e:
            build_gadget_family(random_tournament(10, 0), 1, 1, DESK)
        assert e.value.stage == "hub-selection"
        with pytest.raises(StageFailure):
            build_gadget_family(random_tournament(50, 0), 1, 1, PAPER)


class TestCorruption:
    def test_shared_vertex_fails_G1(self, desk_build):
        T, fam = desk_build
        g0, g1 = fam.gadgets[0], fam.gadgets[1]
        bad = replace(g1, S_plus=g1.S_plus + (g0.S_plus[0],))
        fam2 = replace(fam, gadgets=(g0, bad) + fam.gadgets[2:])
        chk = verify_gadget_properties(T, fam2, 1, 2, DESK).checks["G1"]
        assert not chk.passed and str(g0.S_plus[0]) in chk.counterexample

    def test_oversized_S_fails_G2(self, desk_build):
        T, fam = desk_build
        g0 = fam.gadgets[0]
        used = set().union(*(g.U for g in fam.gadgets))
        spare = [v for v in range(T.n) if v not in used][: DESK.rho + 1]
        big = replace(g0, S_plus=g0.S_plus + tuple(spare))
        fam2 = replace(fam, gadgets=(big,) + fam.gadgets[1:])
        assert not verify_gadget_properties(T, fam2, 1, 2, DESK).checks["G2"].passed


def test_G3_paths_exist(desk_build):
    T, fam = desk_build
    for g in fam.gadgets[:20]:
        for u in g.S_minus:
            for v in g.S_plus:
                seq = ([u] if g.path[0] != u else []) + list(g.path) + ([v] if g.path[-1] != v else [])
                assert all(T.beats(a, b) for a, b in zip(seq, seq[1:]))
