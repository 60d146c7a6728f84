"""Seeded tournament generators.

Uniform tournaments read their coin flips from a Philox-4x64 counter stream
keyed by the seed. Unordered pair ``p`` (pairs ``i < j`` listed
lexicographically) is oriented ``i -> j`` iff bit ``p % 64`` of output word
``p // 64`` is set. Because Philox is counter based, the coin for any pair
sits at a fixed position of the stream, independent of how the pairs are
visited.
"""

from __future__ import annotations

import numpy as np

from .errors import PreconditionError
from .tournament import Tournament, is_k_connected

SEED_BITS = 64


class Exhausted(RuntimeError):
    def __init__(self, tries: int, n: int, k: int):
        super().__init__(f"no {k}-connected tournament on {n} vertices after {tries} tries")
        self.tries = tries


def _check_seed(seed: int) -> None:
    if not 0 <= seed < 1 << SEED_BITS:
        raise PreconditionError("seed-range", f"seed must lie in [0, 2^{SEED_BITS}), got {seed}")


def _pair_bits(n: int, key: int) -> np.ndarray:
    npairs = n * (n - 1) // 2
    words = -(-npairs // 64)
    raw = np.random.Philox(key=key).random_raw(words) if words else np.zeros(0, np.uint64)
    raw = np.ascontiguousarray(raw, dtype="<u8")
    return np.unpackbits(raw.view(np.uint8), bitorder="little")[:npairs].astype(bool)


def _from_pair_bits(n: int, bits: np.ndarray) -> Tournament:
    m = np.zeros((n, n), dtype=bool)
    off = 0
    for i in range(n - 1):
        width = n - 1 - i
        m[i, i + 1 :] = bits[off : off + width]
        off += width
    m |= np.tril(~m.T, -1)
    return Tournament.from_matrix(m, validate=False)


def random_tournament(n: int, seed: int) -> Tournament:
    if n < 0:
        raise PreconditionError("negative-size", f"n must be non-negative, got {n}")
    _check_seed(seed)
    if n <= 1:
        return Tournament(n, (0,) * n)
    return _from_pair_bits(n, _pair_bits(n, seed))


def rotational_tournament(n: int) -> Tournament:
    if n < 1 or n % 2 == 0:
        raise PreconditionError("n-even", f"rotational tournaments need odd n >= 1, got {n}")
    half = (n - 1) // 2
    rows = []
    for i in range(n):
        r = 0
        for j in range(1, half + 1):
            r |= 1 << ((i + j) % n)
        rows.append(r)
    return Tournament(n, tuple(rows))


def random_k_connected(n: int, k: int, seed: int, max_tries: int = 1000) -> Tournament:
    """Rejection sampling over uniform tournaments.

    Attempt ``a`` uses the 128-bit Philox key ``seed + (a << 64)``, so the
    first attempt coincides with ``random_tournament(n, seed)``.
    """
    if k < 1:
        raise PreconditionError("precondition", f"k must be at least 1, got {k}")
    if n < k + 1:
        raise PreconditionError("precondition", f"need n >= k+1, got n={n}, k={k}")
    if max_tries < 1:
        raise PreconditionError("precondition", "max_tries must be at least 1")
    _check_seed(seed)
    for attempt in range(max_tries):
        T = _from_pair_bits(n, _pair_bits(n, seed + (attempt << SEED_BITS)))
        if is_k_connected(T, k):
            return T
    raise Exhausted(max_tries, n, k)
