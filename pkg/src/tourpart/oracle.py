"""Exhaustive ground truth for small tournaments.

Nothing here calls the flow code or the pipeline search routines: cuts come
from subset enumeration and k-connectivity from separator enumeration.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .tournament import Tournament

DEFAULT_LIMIT = 12


class LimitExceeded(ValueError):
    kind = "limit-exceeded"


class InseparablePair(ValueError):
    kind = "inseparable-pair"


def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _reachable(T: Tournament, start: int, alive: int) -> int:
    # plain depth-first search over adjacency tests
    seen = 1 << start
    stack = [start]
    rows = T.out_rows
    while stack:
        v = stack.pop()
        row = rows[v] & alive & ~seen
        for w in _bits(row):
            seen |= 1 << w
            stack.append(w)
    return seen


def _strong(T: Tournament, alive: int) -> bool:
    verts = _bits(alive)
    if len(verts) <= 1:
        return True
    v = verts[0]
    if _reachable(T, v, alive) != alive:
        return False
    # every vertex must reach v
    return all(_reachable(T, w, alive) >> v & 1 for w in verts[1:])


def bruteforce_local_cut(T: Tournament, u: int, v: int, limit: int = DEFAULT_LIMIT) -> int:
    if T.n > limit:
        raise LimitExceeded(f"n={T.n} exceeds oracle limit {limit}")
    if u == v:
        raise ValueError("u and v must differ")
    if T.out_rows[u] >> v & 1:
        raise InseparablePair(f"arc {u}->{v} present; pair cannot be separated")
    others = [w for w in range(T.n) if w not in (u, v)]
    everyone = (1 << T.n) - 1
    for size in range(len(others) + 1):
        for Z in combinations(others, size):
            zmask = sum(1 << z for z in Z)
            if not _reachable(T, u, everyone & ~zmask) >> v & 1:
                return size
    raise AssertionError("removing every other vertex always separates u from v")


def bruteforce_is_k_connected(T: Tournament, k: int, alive: int | None = None) -> bool:
    """Definition check: at least k+1 vertices and no separator of size < k."""
    alive = (1 << T.n) - 1 if alive is None else alive
    verts = _bits(alive)
    if len(verts) < k + 1:
        return False
    for size in range(k):
        for Z in combinations(verts, size):
            zmask = sum(1 << z for z in Z)
            if not _strong(T, alive & ~zmask):
                return False
    return True


def bruteforce_connectivity(T: Tournament) -> int:
    k = 0
    while bruteforce_is_k_connected(T, k + 1):
        k += 1
    return k


# ---------------------------------------------------------------- partitions


@dataclass
class SearchResult:
    status: str  # "found", "none" or "timeout"
    parts: list[list[int]] | None = None
    fraction_searched: float = 1.0
    targets: list[int] | None = None

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "status": self.status,
            "parts": self.parts,
            "targets": self.targets,
            "fraction_searched": self.fraction_searched,
        }


class _Clock:
    def __init__(self, budget_ms: float | None):
        self.deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0
        self.ticks = 0

    def expired(self) -> bool:
        self.ticks += 1
        if self.deadline is None or self.ticks & 255:
            return False
        return time.monotonic() > self.deadline


class _Timeout(Exception):
    pass


def _submasks_with(low: int, rest: int) -> Iterable[int]:
    """All subsets of ``rest`` united with the pinned bit ``low``."""
    sub = 0
    while True:
        yield sub | low
        sub = (sub - rest) & rest
        if sub == 0:
            return


def _search(T, remaining, targets, clock, cache, progress):
    if len(targets) == 1:
        k = targets[0]
        return [remaining] if _kconn(T, remaining, k, cache) else None
    low = remaining & -remaining
    rest = remaining & ~low
    top = progress is not None
    for part in _submasks_with(low, rest):
        if top:
            progress[0] += 1
        if clock.expired():
            raise _Timeout
        other = remaining & ~part
        if not other:
            continue
        for k in sorted(set(targets)):
            if part.bit_count() < k + 1 or not _kconn(T, part, k, cache):
                continue
            left = list(targets)
            left.remove(k)
            sub = _search(T, other, left, clock, cache, None)
            if sub is not None:
                return [part] + sub
    return None


def _kconn(T, mask, k, cache):
    key = (mask, k)
    hit = cache.get(key)
    if hit is None:
        hit = bruteforce_is_k_connected(T, k, mask)
        if len(cache) < 200_000:
            cache[key] = hit
    return hit


def bruteforce_partition_mixed(
    T: Tournament, targets: Sequence[int], budget_ms: float | None = None
) -> SearchResult:
    """Partition V into len(targets) parts, part i being targets[i]-connected.

    The part holding the smallest remaining vertex is enumerated first; every
    distinct target value is tried for it, so the returned parts come paired
    with the target each one satisfies.
    """
    if not targets:
        raise ValueError("need at least one part")
    if any(k < 1 for k in targets):
        raise ValueError("targets must be positive")
    if T.n == 0:
        return SearchResult("none", fraction_searched=1.0)
    clock = _Clock(budget_ms)
    progress = [0]
    total = 2 ** (T.n - 1)
    try:
        found = _search(T, (1 << T.n) - 1, list(targets), clock, {}, progress)
    except _Timeout:
        return SearchResult("timeout", fraction_searched=min(1.0, progress[0] / total))
    if found is None:
        return SearchResult("none", fraction_searched=1.0)
    parts = [_bits(m) for m in found]
    achieved = _match_targets(T, found, targets)
    return SearchResult("found", parts, fraction_searched=min(1.0, progress[0] / total), targets=achieved)


def _match_targets(T, masks, targets):
    left = list(targets)
    out = []
    for m in masks:
        for k in sorted(set(left), reverse=True):
            if bruteforce_is_k_connected(T, k, m):
                out.append(k)
                left.remove(k)
                break
    return out


def bruteforce_partition(T: Tournament, k: int, t: int, budget_ms: float | None = None) -> SearchResult:
    if t < 1:
        raise ValueError("t must be at least 1")
    res = bruteforce_partition_mixed(T, [k] * t, budget_ms)
    res.targets = None
    return res


# ---------------------------------------------------------------- path families


def bruteforce_min_set_cut(
    T: Tournament, sources: Iterable[int], sinks: Iterable[int], forbidden: Iterable[int] = ()
) -> int:
    """Smallest vertex set meeting every source->sink path avoiding ``forbidden``."""
    if T.n > DEFAULT_LIMIT:
        raise LimitExceeded(f"n={T.n} exceeds oracle limit {DEFAULT_LIMIT}")
    S = sum(1 << s for s in set(sources))
    D = sum(1 << d for d in set(sinks))
    F = sum(1 << f for f in set(forbidden)) & ~S & ~D
    alive = ((1 << T.n) - 1) & ~F
    candidates = _bits(alive)
    for size in range(len(candidates) + 1):
        for C in combinations(candidates, size):
            cmask = sum(1 << c for c in C)
            live = alive & ~cmask
            hit = False
            for s in _bits(S & live):
                if _reachable(T, s, live) & D & live:
                    hit = True
                    break
            if not hit:
                return size
    return 0


def bruteforce_max_path_family(
    T: Tournament, sources: Iterable[int], sinks: Iterable[int], forbidden: Iterable[int] = ()
) -> int:
    """Largest family of vertex-disjoint source->sink paths, by explicit packing."""
    S = set(sources)
    D = set(sinks)
    F = set(forbidden) - S - D
    paths: list[int] = []

    def extend(path, used):
        v = path[-1]
        if v in D and len(path) > 1:
            paths.append(used)
            return
        for w in range(T.n):
            if used >> w & 1 or w in F or not T.out_rows[v] >> w & 1:
                continue
            extend(path + [w], used | (1 << w))

    for s in S:
        if s in D:
            continue
        extend([s], 1 << s)
    # keep only inclusion-minimal vertex sets, then pack
    uniq = sorted(set(paths), key=lambda m: m.bit_count())
    best = 0

    def pack(i, used, count):
        nonlocal best
        best = max(best, count)
        if count + (len(uniq) - i) <= best:
            return
        for j in range(i, len(uniq)):
            if not uniq[j] & used:
                pack(j + 1, used | uniq[j], count + 1)

    pack(0, 0, 0)
    return best


# ---------------------------------------------------------------- experiments

CSV_COLUMNS = ["seed", "n", "k", "t", "connectivity", "result", "elapsed_ms"]


@dataclass
class ExperimentTable:
    rows: list[dict] = field(default_factory=list)

    @property
    def success_fraction(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r["result"] == "found" for r in self.rows) / len(self.rows)

    def by_connectivity(self) -> dict[int, float]:
        groups: dict[int, list[bool]] = {}
        for r in self.rows:
            groups.setdefault(r["connectivity"], []).append(r["result"] == "found")
        return {c: sum(v) / len(v) for c, v in sorted(groups.items())}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()


def threshold_experiment(
    n: int,
    k: int,
    t: int,
    seeds: int,
    budget_ms: float | None = 60_000,
    mode: str = "exact",
    record_timing: bool = False,
    first_seed: int = 0,
) -> ExperimentTable:
    """Success of exact search (or the pipeline) on uniform random tournaments.

    ``elapsed_ms`` is left blank unless ``record_timing`` is set, so that the
    default table is byte-for-byte reproducible.
    """
    from .generators import random_tournament
    from .tournament import connectivity

    if mode not in ("exact", "pipeline"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and n > 24:
        raise LimitExceeded(f"exact mode supports n <= 24, got {n}")
    table = ExperimentTable()
    for seed in range(first_seed, first_seed + seeds):
        T = random_tournament(n, seed)
        start = time.perf_counter()
        if mode == "exact":
            result = bruteforce_partition(T, k, t, budget_ms).status
        else:
            result = _pipeline_status(T, k, t, seed)
        elapsed = (time.perf_counter() - start) * 1000.0
        table.rows.append(
            {
                "seed": seed,
                "n": n,
                "k": k,
                "t": t,
                "connectivity": connectivity(T),
                "result": result,
                "elapsed_ms": f"{elapsed:.1f}" if record_timing else "",
            }
        )
    return table


def _pipeline_status(T, k, t, seed):
    from .complete import partition_tournament
    from .errors import PreconditionError, StageFailure
    from .profile import DESK

    # "none" here means no certificate was issued, not that none exists
    try:
        partition_tournament(T, k, t, DESK, seed)
    except (StageFailure, PreconditionError):
        return "none"
    return "found"
