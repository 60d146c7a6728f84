import json

import pytest

from planted import PLANTED, planted_instance
from tourpart.complete import PartitionCertificate, extend_partition, finish_from_refined, partition_tournament
from tourpart.errors import PreconditionError, StageFailure
from tourpart.generators import random_tournament, rotational_tournament
from tourpart.profile import DESK
from tourpart.tournament import build, verify_partition


def to_mask(vs):
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def two_cycles_plus(extra_arcs, n):
    """Cycles 0-1-2 and 3-4-5 (first beats second), extra vertices wired by ``extra_arcs``."""
    arcs = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    arcs += [(i, j) for i in range(3) for j in range(3, 6)]
    arcs += extra_arcs
    return build(n, arcs)


P0, P1 = to_mask([0, 1, 2]), to_mask([3, 4, 5])


class TestExtend:
    def test_nothing_to_place(self):
        T = two_cycles_plus([], 6)
        assert extend_partition(T, 0, 0, [P0, P1], 1, 2) == [P0, P1]

    def test_single_y(self):
        # 6 -> 0, 1 -> 6, 6 -> 3, 4 -> 6, the other pairs point at 6
        extra = [(6, 0), (1, 6), (2, 6), (6, 3), (4, 6), (5, 6)]
        T = two_cycles_plus(extra, 7)
        out = extend_partition(T, 0, 1 << 6, [P0, P1], 1, 2, seed=3)
        assert sum(p >> 6 & 1 for p in out) == 1
        parts = [[v for v in range(7) if p >> v & 1] for p in out]
        assert verify_partition(T, parts, 1).valid

    def test_leftover_degree_failure_names_z(self):
        # 7 is a y with neighbours both ways in both cycles; 6 loses to everyone
        extra = [(v, 6) for v in range(6)] + [(7, 6)]
        extra += [(7, 0), (1, 7), (2, 7), (7, 3), (4, 7), (5, 7)]
        T = two_cycles_plus(extra, 8)
        log = []
        with pytest.raises(StageFailure) as e:
            extend_partition(T, 1 << 6, 1 << 7, [P0, P1], 1, 2, profile=DESK, log=log)
        d = e.value.detail
        assert e.value.reason == "hypothesis"
        assert d["bullet"] == "leftover-degree" and d["witness"] == 6 and d["direction"] == "+"
        assert log[-1]["status"] == "fail"

    def test_overlap_rejected(self):
        T = two_cycles_plus([], 6)
        with pytest.raises(StageFailure) as e:
            extend_partition(T, 1, 0, [P0, P1], 1, 2)
        assert e.value.detail["bullet"] == "disjoint"

    def test_part_not_connected(self):
        T = build(6, [(i, j) for i in range(6) for j in range(i + 1, 6)])
        with pytest.raises(StageFailure) as e:
            extend_partition(T, 0, 0, [P0, P1], 1, 2)
        assert e.value.detail["bullet"] == "k-connected"

    def test_wrong_part_count(self):
        T = two_cycles_plus([], 6)
        with pytest.raises(PreconditionError):
            extend_partition(T, 0, 0, [P0], 1, 2)


class TestSinglePart:
    def test_k_connected_input(self):
        T = rotational_tournament(7)
        cert = partition_tournament(T, 3, 1)
        assert cert.parts == [list(range(7))]
        assert cert.stage_log[0]["stage"] == "single-part"
        assert cert.verify(T).valid

    def test_not_k_connected(self):
        with pytest.raises(StageFailure) as e:
            partition_tournament(rotational_tournament(7), 4, 1)
        assert e.value.stage == "single-part"
        assert e.value.transcript[-1]["status"] == "fail"


class TestDriver:
    def test_transitive_fails_with_transcript(self):
        n = 300
        T = build(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
        with pytest.raises(StageFailure) as e:
            partition_tournament(T, 1, 2)
        assert e.value.transcript and e.value.transcript[-1]["stage"] == e.value.stage
        json.dumps(e.value.to_dict())

    def test_desk_failure_is_deterministic(self):
        T = random_tournament(600, 1)
        runs = []
        for _ in range(2):
            with pytest.raises(StageFailure) as e:
                partition_tournament(T, 1, 2, DESK, seed=4)
            runs.append(e.value.to_dict())
        assert runs[0] == runs[1]

    def test_bad_arguments(self):
        T = random_tournament(5, 0)
        with pytest.raises(PreconditionError):
            partition_tournament(T, 0, 2)
        with pytest.raises(PreconditionError):
            partition_tournament(T, 5, 2)


@pytest.fixture(scope="module")
def planted():
    return planted_instance(400, 12, 200, 1, 2, seed=2)


class TestPlantedChain:
    @pytest.mark.parametrize("seed", range(4))
    def test_valid_partition(self, planted, seed):
        T, fam = planted
        log = []
        parts = finish_from_refined(T, fam, fam.index_set, 1, 2, PLANTED, seed=seed, log=log)
        rep = verify_partition(T, parts, 1)
        assert rep.valid and rep.covers
        ok_stages = [e["stage"] for e in log if e["status"] == "ok"]
        assert ok_stages == ["group", "connect", "extend:1", "extend:2", "extend:3", "extend:4"]

    def test_deterministic(self, planted):
        T, fam = planted
        a = finish_from_refined(T, fam, fam.index_set, 1, 2, PLANTED, seed=5)
        b = finish_from_refined(T, fam, fam.index_set, 1, 2, PLANTED, seed=5)
        assert a == b


class TestCertificate:
    def cert(self):
        return partition_tournament(rotational_tournament(5), 2, 1, seed=7)

    def test_round_trip(self):
        c = self.cert()
        back = PartitionCertificate.from_json(c.to_json())
        assert back == c
        assert back.to_json() == c.to_json()
        assert json.loads(c.to_json())["version"] == 1

    def test_malformed(self):
        d = self.cert().to_dict()
        with pytest.raises(ValueError):
            PartitionCertificate.from_dict({**d, "version": 2})
        del d["parts"]
        with pytest.raises(ValueError):
            PartitionCertificate.from_dict(d)

    def test_verify_detects_tampering(self):
        T = rotational_tournament(5)
        c = self.cert()
        c.parts = [[0, 1, 2, 3]]
        assert not c.verify(T).valid
        with pytest.raises(ValueError):
            c.verify(rotational_tournament(7))
