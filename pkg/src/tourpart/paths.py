"""Disjoint path systems and their local minimisation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .bits import iter_bits, lowest, mask_of, members
from .flow import set_flow
from .tournament import Tournament


@dataclass(frozen=True)
class PathSystem:
    paths: tuple[tuple[int, ...], ...]
    forbidden: frozenset[int] = frozenset()

    @property
    def terminals(self) -> list[tuple[int, int]]:
        return [(p[0], p[-1]) for p in self.paths]

    @property
    def covered(self) -> int:
        return sum(len(p) for p in self.paths)

    def vertex_mask(self) -> int:
        return mask_of(v for p in self.paths for v in p)


class InfeasiblePaths(Exception):
    kind = "infeasible"

    def __init__(self, want: int, maximum: int, cut: Sequence[int]):
        super().__init__(f"wanted {want} disjoint paths, only {maximum} exist")
        self.want = want
        self.maximum = maximum
        self.cut = list(cut)


def check_path_system(T: Tournament, ps: PathSystem) -> list[str]:
    """Return a list of invariant violations (empty when valid)."""
    problems = []
    used: dict[int, int] = {}
    for i, p in enumerate(ps.paths):
        if not p:
            problems.append(f"path {i} is empty")
            continue
        for a, b in zip(p, p[1:]):
            if not T.out_rows[a] >> b & 1:
                problems.append(f"path {i}: no arc {a}->{b}")
        for v in p:
            if v in used:
                problems.append(f"vertex {v} on paths {used[v]} and {i}")
            used[v] = i
        for v in p[1:-1]:
            if v in ps.forbidden:
                problems.append(f"path {i}: forbidden internal vertex {v}")
    return problems


def max_disjoint_paths(
    T: Tournament,
    sources: Iterable[int],
    sinks: Iterable[int],
    forbidden: Iterable[int] = (),
    want: int | None = None,
) -> PathSystem:
    """Vertex-disjoint source-to-sink paths whose internal vertices avoid ``forbidden``.

    Raises InfeasiblePaths (with the true maximum and a minimum vertex cut)
    when fewer than ``want`` paths exist. ``want=None`` asks for a maximum
    family.
    """
    src = mask_of(sources)
    snk = mask_of(sinks)
    forb = frozenset(forbidden)
    fmask = mask_of(forb)
    if (src | snk) & fmask:
        raise ValueError("sources and sinks must avoid the forbidden set")
    if src & snk:
        raise ValueError("sources and sinks must be disjoint")
    passable = T.all_mask & ~fmask
    res = set_flow(T.out_rows, T.in_rows, src, snk, passable, want)
    if want is not None and res.value < want:
        raise InfeasiblePaths(want, res.value, members(res.cut))
    return PathSystem(tuple(tuple(p) for p in res.paths), forb)


# ---------------------------------------------------------------- minimisation


class _Work:
    def __init__(self, T: Tournament, ps: PathSystem):
        self.T = T
        self.out = T.out_rows
        self.inn = T.in_rows
        self.paths = [list(p) for p in ps.paths]
        self.forbidden = mask_of(ps.forbidden)

    def on_paths(self) -> int:
        return mask_of(v for p in self.paths for v in p)

    def free(self) -> int:
        return self.T.all_mask & ~self.on_paths() & ~self.forbidden

    # R1: forward chord x_i -> x_j with j > i + 1
    def shortcut(self) -> bool:
        for p in self.paths:
            pos = {v: i for i, v in enumerate(p)}
            for i in range(len(p) - 2):
                later = mask_of(p[i + 2 :])
                hits = self.out[p[i]] & later
                if hits:
                    j = max(pos[v] for v in iter_bits(hits))
                    del p[i + 1 : j]
                    return True
        return False

    # R2: s -> y -> x_j with y outside every path, j >= 3; mirrored at the end
    def bypass(self) -> bool:
        free = self.free()
        for p in self.paths:
            m = len(p) - 1
            if m < 3:
                continue
            s, e = p[0], p[-1]
            ys = self.out[s] & free
            if ys:
                for j in range(m, 2, -1):
                    cand = ys & self.inn[p[j]]
                    if cand:
                        p[1:j] = [lowest(cand)]
                        return True
            ys = self.inn[e] & free
            if ys:
                for j in range(0, m - 2):
                    cand = ys & self.out[p[j]]
                    if cand:
                        p[j + 1 : m] = [lowest(cand)]
                        return True
        return False

    # R3: three out-neighbours y1 < y2 < y3 of s along another path Q, y1 -> u on P
    def exchange(self) -> bool:
        paths = self.paths
        for a, P in enumerate(paths):
            s, e = P[0], P[-1]
            tail = mask_of(P[1:])
            head = mask_of(P[:-1])
            for b, Q in enumerate(paths):
                if a == b:
                    continue
                hits = [i for i, y in enumerate(Q) if self.out[s] >> Q[i] & 1]
                if len(hits) >= 3:
                    i3 = hits[-1]
                    for i1 in hits[:-2]:
                        reach = self.out[Q[i1]] & tail
                        if reach:
                            j = max(P.index(u) for u in iter_bits(reach))
                            newP = Q[: i1 + 1] + P[j:]
                            newQ = [s] + Q[i3:]
                            paths[a], paths[b] = newP, newQ
                            return True
                hits = [i for i, y in enumerate(Q) if self.inn[e] >> Q[i] & 1]
                if len(hits) >= 3:
                    i1 = hits[0]
                    for i3 in reversed(hits[2:]):
                        reach = self.inn[Q[i3]] & head
                        if reach:
                            j = min(P.index(u) for u in iter_bits(reach))
                            newP = P[: j + 1] + Q[i3:]
                            newQ = Q[: i1 + 1] + [e]
                            paths[a], paths[b] = newP, newQ
                            return True
        return False


def minimize_path_system(T: Tournament, ps: PathSystem) -> PathSystem:
    """Apply shortcut, bypass and exchange moves until none applies.

    Every move strictly lowers the number of covered vertices and keeps the
    set of start vertices, the set of end vertices, disjointness and
    forbidden-avoidance. Exchange may re-pair starts with ends. Bypass and exchange are
    also applied in their mirrored form at the end of a path.
    """
    w = _Work(T, ps)
    changed = True
    while changed:
        changed = False
        for rule in (w.shortcut, w.bypass, w.exchange):
            while rule():
                changed = True
    return PathSystem(tuple(tuple(p) for p in w.paths), ps.forbidden)


def forward_chords(T: Tournament, path: Sequence[int]) -> list[tuple[int, int]]:
    out = []
    for i in range(len(path)):
        for j in range(i + 2, len(path)):
            if T.out_rows[path[i]] >> path[j] & 1:
                out.append((path[i], path[j]))
    return out


def verify_backward_chords(T: Tournament, ps: PathSystem) -> bool:
    return all(not forward_chords(T, p) for p in ps.paths)
