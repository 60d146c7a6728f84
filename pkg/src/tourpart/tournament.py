"""Tournaments stored as bitset rows, plus exact strong k-connectivity.

A tournament on ``n`` vertices keeps one Python integer per vertex whose
bit ``w`` is set when the vertex beats ``w``. Most routines also accept a
vertex mask so that induced subtournaments can be examined without being
materialised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .bits import full_mask, iter_bits, lowest, mask_of, members
from .errors import TournamentError, VertexOutOfRange
from .flow import local_flow


@dataclass(frozen=True, eq=False)
class Tournament:
    n: int
    out_rows: tuple[int, ...]

    @cached_property
    def in_rows(self) -> tuple[int, ...]:
        everyone = full_mask(self.n)
        return tuple(everyone & ~row & ~(1 << v) for v, row in enumerate(self.out_rows))

    @cached_property
    def all_mask(self) -> int:
        return full_mask(self.n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tournament):
            return NotImplemented
        return self.n == other.n and self.out_rows == other.out_rows

    def __hash__(self) -> int:
        return hash((self.n, self.out_rows))

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise VertexOutOfRange(v, self.n)

    def beats(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return bool(self.out_rows[u] >> v & 1)

    def out_degree(self, v: int) -> int:
        self._check(v)
        return self.out_rows[v].bit_count()

    def in_degree(self, v: int) -> int:
        self._check(v)
        return self.n - 1 - self.out_rows[v].bit_count()

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u, row in enumerate(self.out_rows):
            for w in iter_bits(row):
                yield (u, w)

    def reversed(self) -> "Tournament":
        return Tournament(self.n, self.in_rows)

    def to_matrix(self) -> np.ndarray:
        """Boolean adjacency matrix, ``M[u, w]`` true iff u beats w."""
        m = np.zeros((self.n, self.n), dtype=bool)
        nbytes = (self.n + 7) // 8
        for u, row in enumerate(self.out_rows):
            raw = np.frombuffer(row.to_bytes(nbytes, "little"), dtype=np.uint8)
            m[u] = np.unpackbits(raw, bitorder="little")[: self.n]
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray, validate: bool = True) -> "Tournament":
        m = np.asarray(m, dtype=bool)
        n = m.shape[0]
        if m.shape != (n, n):
            raise TournamentError("shape", f"adjacency matrix must be square, got {m.shape}")
        if validate:
            diag = np.flatnonzero(np.diagonal(m))
            if diag.size:
                v = int(diag[0])
                raise TournamentError("self-loop", f"self-loop at {v}", (v, v))
            both = np.argwhere(np.triu(m & m.T, 1))
            if both.size:
                u, v = map(int, both[0])
                raise TournamentError("duplicate-pair", f"pair {{{u},{v}}} oriented both ways", (u, v))
            none = np.argwhere(np.triu(~(m | m.T), 1))
            if none.size:
                u, v = map(int, none[0])
                raise TournamentError("missing-pair", f"pair {{{u},{v}}} has no arc", (u, v))
        if n == 0:
            return cls(0, ())
        packed = np.packbits(m, axis=1, bitorder="little")
        rows = tuple(int.from_bytes(r.tobytes(), "little") for r in packed)
        return cls(n, rows)


def build(n: int, arcs: Iterable[tuple[int, int]]) -> Tournament:
    if n < 0:
        raise TournamentError("negative-size", f"n must be non-negative, got {n}")
    rows = [0] * n
    for u, v in arcs:
        for x in (u, v):
            if not 0 <= x < n:
                raise VertexOutOfRange(x, n)
        if u == v:
            raise TournamentError("self-loop", f"self-loop at {u}", (u, v))
        if rows[u] >> v & 1 or rows[v] >> u & 1:
            a, b = min(u, v), max(u, v)
            raise TournamentError("duplicate-pair", f"pair {{{a},{b}}} appears twice", (a, b))
        rows[u] |= 1 << v
    if sum(r.bit_count() for r in rows) != n * (n - 1) // 2:
        for u in range(n):
            seen = rows[u] | (1 << u)
            for v in range(u + 1, n):
                if not seen >> v & 1 and not rows[v] >> u & 1:
                    raise TournamentError("missing-pair", f"pair {{{u},{v}}} has no arc", (u, v))
    return Tournament(n, tuple(rows))


def out_degree(T: Tournament, v: int) -> int:
    return T.out_degree(v)


def in_degree(T: Tournament, v: int) -> int:
    return T.in_degree(v)


def induced(T: Tournament, S: Iterable[int]) -> tuple[Tournament, list[int]]:
    """Subtournament on ``S``, relabelled densely in ascending id order.

    Returns the new tournament and ``labels`` with ``labels[new] = old``.
    """
    verts = sorted(set(S))
    for v in verts:
        if not 0 <= v < T.n:
            raise VertexOutOfRange(v, T.n)
    m = len(verts)
    if m == 0:
        return Tournament(0, ()), []
    if m <= 64:
        rows = []
        for u in verts:
            row_u = T.out_rows[u]
            r = 0
            for j, w in enumerate(verts):
                if row_u >> w & 1:
                    r |= 1 << j
            rows.append(r)
        return Tournament(m, tuple(rows)), verts
    idx = np.asarray(verts)
    sub = T.to_matrix()[np.ix_(idx, idx)]
    return Tournament.from_matrix(sub, validate=False), verts


# ---------------------------------------------------------------- reachability


def reach(rows: Sequence[int], start: int, alive: int) -> int:
    """Vertices of ``alive`` reachable from ``start`` along ``rows``."""
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= rows[v]
        frontier = nxt & alive & ~seen
        seen |= frontier
    return seen


def strongly_connected_on(T: Tournament, alive: int) -> bool:
    if alive & (alive - 1) == 0:
        return True
    v = lowest(alive)
    return reach(T.out_rows, v, alive) == alive and reach(T.in_rows, v, alive) == alive


def is_strongly_connected(T: Tournament) -> bool:
    return strongly_connected_on(T, T.all_mask)


# ---------------------------------------------------------------- connectivity


@dataclass(frozen=True)
class CutWitness:
    kind: str  # "too-few-vertices" or "separator"
    separator: frozenset[int] = frozenset()
    separated_pair: tuple[int, int] | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "separator": sorted(self.separator),
            "separated_pair": list(self.separated_pair) if self.separated_pair else None,
        }


@dataclass(frozen=True)
class KConnectivity:
    ok: bool
    witness: CutWitness | None = None

    def __bool__(self) -> bool:
        return self.ok


def _local_on(T: Tournament, u: int, v: int, alive: int, limit: int | None):
    return local_flow(T.out_rows, T.in_rows, u, v, alive, limit)


def local_connectivity(T: Tournament, u: int, v: int) -> int:
    T._check(u)
    T._check(v)
    if u == v:
        raise ValueError("local_connectivity needs two distinct vertices")
    if T.out_rows[u] >> v & 1:
        return T.n - 1
    return _local_on(T, u, v, T.all_mask, None).value


def min_cut(T: Tournament, u: int, v: int, alive: int | None = None) -> frozenset[int]:
    """A minimum u->v vertex separator inside ``alive`` (no direct arc u->v)."""
    alive = T.all_mask if alive is None else alive
    res = _local_on(T, u, v, alive, None)
    return frozenset(members(res.cut))


def _pair_fails(T: Tournament, u: int, v: int, alive: int, k: int) -> bool:
    """True when fewer than k internally disjoint u->v paths exist in ``alive``."""
    common = T.out_rows[u] & T.in_rows[v] & alive
    if common.bit_count() >= k:
        return False
    return _local_on(T, u, v, alive, k).value < k


def _pair_witness(T: Tournament, u: int, v: int, alive: int) -> CutWitness:
    sep = min_cut(T, u, v, alive)
    return CutWitness("separator", sep, (u, v))


def k_connected_on(T: Tournament, alive: int, k: int) -> KConnectivity:
    """Strong k-connectivity of the subtournament induced by ``alive``.

    Uses the fact that any separator of size below k misses one of k fixed
    vertices, and in a tournament every remaining vertex is then separated
    from that vertex in one direction.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    size = alive.bit_count()
    if size < k + 1:
        return KConnectivity(False, CutWitness("too-few-vertices"))
    out, inn = T.out_rows, T.in_rows
    if k == 1:
        v = lowest(alive)
        fwd = reach(out, v, alive)
        if fwd != alive:
            return KConnectivity(False, CutWitness("separator", frozenset(), (v, lowest(alive & ~fwd))))
        back = reach(inn, v, alive)
        if back != alive:
            return KConnectivity(False, CutWitness("separator", frozenset(), (lowest(alive & ~back), v)))
        return KConnectivity(True)
    for v in iter_bits(alive):
        outs = out[v] & alive
        if outs.bit_count() < k:
            other = lowest(alive & ~outs & ~(1 << v))
            return KConnectivity(False, CutWitness("separator", frozenset(members(outs)), (v, other)))
        ins = inn[v] & alive
        if ins.bit_count() < k:
            other = lowest(alive & ~ins & ~(1 << v))
            return KConnectivity(False, CutWitness("separator", frozenset(members(ins)), (other, v)))
    anchors = members(alive)[:k]
    for a in anchors:
        for w in iter_bits(alive & ~(1 << a)):
            if out[a] >> w & 1:
                u, v = w, a
            else:
                u, v = a, w
            if _pair_fails(T, u, v, alive, k):
                return KConnectivity(False, _pair_witness(T, u, v, alive))
    return KConnectivity(True)


def is_k_connected(T: Tournament, k: int) -> KConnectivity:
    return k_connected_on(T, T.all_mask, k)


def connectivity_on(T: Tournament, alive: int) -> int:
    if not strongly_connected_on(T, alive) or alive.bit_count() < 2:
        return 0
    verts = members(alive)
    out = T.out_rows
    best = len(verts) - 1
    for v in verts:
        best = min(best, (out[v] & alive).bit_count(), (T.in_rows[v] & alive).bit_count())
    i = 0
    while i <= best and i < len(verts):
        a = verts[i]
        for w in verts:
            if w == a:
                continue
            u, v = (w, a) if out[a] >> w & 1 else (a, w)
            common = (out[u] & T.in_rows[v] & alive).bit_count()
            if common >= best:
                continue
            val = _local_on(T, u, v, alive, best).value
            if val < best:
                best = val
        i += 1
    return best


def connectivity(T: Tournament) -> int:
    return connectivity_on(T, T.all_mask)


# ---------------------------------------------------------------- partitions


@dataclass
class PartReport:
    index: int
    size: int
    ok: bool
    witness: CutWitness | None = None


@dataclass
class PartitionReport:
    valid: bool
    missing: list[int] = field(default_factory=list)
    duplicated: list[int] = field(default_factory=list)
    out_of_range: list[int] = field(default_factory=list)
    parts: list[PartReport] = field(default_factory=list)

    @property
    def covers(self) -> bool:
        return not (self.missing or self.duplicated or self.out_of_range)

    @property
    def failing_parts(self) -> list[PartReport]:
        return [p for p in self.parts if not p.ok]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "missing": self.missing,
            "duplicated": self.duplicated,
            "out_of_range": self.out_of_range,
            "parts": [
                {
                    "index": p.index,
                    "size": p.size,
                    "k_connected": p.ok,
                    "witness": p.witness.to_dict() if p.witness else None,
                }
                for p in self.parts
            ],
        }


def verify_partition(T: Tournament, parts: Sequence[Iterable[int]], k: int) -> PartitionReport:
    seen: dict[int, int] = {}
    dup: set[int] = set()
    bad: set[int] = set()
    masks = []
    for part in parts:
        verts = list(part)
        m = 0
        for v in verts:
            if not 0 <= v < T.n:
                bad.add(v)
                continue
            if v in seen:
                dup.add(v)
            seen[v] = seen.get(v, 0) + 1
            m |= 1 << v
        masks.append(m)
    missing = [v for v in range(T.n) if v not in seen]
    report = PartitionReport(
        valid=False, missing=missing, duplicated=sorted(dup), out_of_range=sorted(bad)
    )
    all_ok = True
    for i, m in enumerate(masks):
        res = k_connected_on(T, m, k)
        report.parts.append(PartReport(i, m.bit_count(), res.ok, res.witness))
        all_ok &= res.ok
    report.valid = all_ok and report.covers
    return report


# ---------------------------------------------------------------- .trn format


def format_trn(T: Tournament) -> str:
    lines = [str(T.n)]
    for i in range(T.n - 1):
        row = T.out_rows[i] >> (i + 1)
        width = T.n - 1 - i
        lines.append(format(row, f"0{width}b")[::-1])
    return "\n".join(lines) + "\n"


def parse_trn(text: str) -> Tournament:
    lines = text.splitlines()
    if not lines:
        raise TournamentError("malformed-trn", "empty input")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise TournamentError("malformed-trn", f"first line must be n, got {lines[0]!r}") from None
    if n < 0:
        raise TournamentError("malformed-trn", "n must be non-negative")
    body = lines[1:]
    while body and body[-1].strip() == "" and len(body) > max(n - 1, 0):
        body.pop()
    if len(body) != max(n - 1, 0):
        raise TournamentError(
            "malformed-trn", f"expected {max(n - 1, 0)} orientation lines, got {len(body)}"
        )
    m = np.zeros((n, n), dtype=bool)
    for i, line in enumerate(body):
        line = line.strip()
        if len(line) != n - 1 - i:
            raise TournamentError(
                "malformed-trn", f"line {i + 2}: expected {n - 1 - i} characters, got {len(line)}"
            )
        if line.strip("01"):
            raise TournamentError("malformed-trn", f"line {i + 2}: only 0/1 allowed")
        m[i, i + 1 :] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) == ord("1")
    m |= np.tril(~m.T, -1)
    return Tournament.from_matrix(m, validate=False)


def read_trn(path) -> Tournament:
    with open(path, "r", encoding="ascii") as fh:
        return parse_trn(fh.read())


def write_trn(T: Tournament, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_trn(T))


def vertex_mask(T: Tournament, S: Iterable[int]) -> int:
    m = mask_of(S)
    if m >> T.n:
        raise VertexOutOfRange(m.bit_length() - 1, T.n)
    return m
