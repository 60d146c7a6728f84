import numpy as np
import pytest

from tourpart.errors import PreconditionError
from tourpart.generators import Exhausted, random_k_connected, random_tournament, rotational_tournament
from tourpart.tournament import connectivity, format_trn, is_k_connected


def test_same_seed_same_tournament():
    assert format_trn(random_tournament(40, 7)) == format_trn(random_tournament(40, 7))
    assert random_tournament(40, 7) != random_tournament(40, 8)


def test_pair_coin_layout():
    # pair p = (i<j) in lexicographic order reads bit p%64 of Philox word p//64
    n, seed = 30, 12345
    T = random_tournament(n, seed)
    words = np.random.Philox(key=seed).random_raw(-(-n * (n - 1) // 2 // 64) + 1)
    p = 0
    for i in range(n):
        for j in range(i + 1, n):
            bit = int(words[p // 64]) >> (p % 64) & 1
            assert T.beats(i, j) == bool(bit)
            p += 1


def test_prefix_stability():
    # the coins of the first pairs do not depend on n beyond the pair order
    small = random_tournament(10, 3)
    assert all(small.beats(0, j) == random_tournament(25, 3).beats(0, j) for j in range(1, 10))


def test_trivial_sizes():
    assert random_tournament(0, 1).n == 0
    assert random_tournament(1, 1).n == 1


def test_seed_range():
    with pytest.raises(PreconditionError):
        random_tournament(5, -1)
    with pytest.raises(PreconditionError):
        random_tournament(5, 1 << 64)


def test_rotational_is_regular():
    T = rotational_tournament(9)
    assert all(T.out_degree(v) == 4 for v in range(9))
    with pytest.raises(PreconditionError) as e:
        rotational_tournament(8)
    assert e.value.kind == "n-even"


def test_random_k_connected():
    T = random_k_connected(14, 3, seed=5)
    assert is_k_connected(T, 3).ok
    # attempt 0 is the plain uniform tournament
    if is_k_connected(random_tournament(14, 5), 3).ok:
        assert T == random_tournament(14, 5)


def test_random_k_connected_exhausts():
    with pytest.raises(Exhausted):
        random_k_connected(4, 2, seed=1, max_tries=3)
    with pytest.raises(PreconditionError):
        random_k_connected(3, 3, seed=1)


def test_connectivity_is_at_most_min_degree():
    T = random_tournament(30, 2)
    delta = min(min(T.out_degree(v), T.in_degree(v)) for v in range(30))
    assert connectivity(T) <= delta
