"""Vertex-disjoint path flows over bitset adjacency rows.

Every vertex is split into an in-node and an out-node joined by a
capacity-1 link; arcs have unbounded capacity, so every minimum cut is a
set of vertices. Two modes share one augmenting-path engine:

* ``local_flow``: internally disjoint paths between a single source and a
  single sink (the endpoints have unbounded capacity).
* ``set_flow``: fully vertex-disjoint paths from a source set to a sink set.

Adjacency is passed as a sequence of out-rows and in-rows (Python ints);
``passable`` is the mask of vertices allowed as internal path vertices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .bits import iter_bits, lowest


@dataclass
class FlowResult:
    value: int
    paths: list[list[int]]
    # Minimum vertex cut; only meaningful when the flow was not capped.
    cut: int = 0
    saturated: bool = False
    augmentations: int = field(default=0, repr=False)


class _Engine:
    def __init__(self, out, inn, sources, sinks, passable, single):
        self.out = out
        self.inn = inn
        self.n = len(out)
        self.src = sources
        self.snk = sinks
        self.passable = passable
        self.single = single
        self.split = passable | sources | sinks
        self.enter_ok = passable | sinks
        self.leave_ok = passable | sources
        self.flow_out = [0] * self.n
        self.flow_in = [0] * self.n
        self.through = 0
        self.starts = 0
        self.ends = 0
        self.value = 0
        self.last_vis = (0, 0)

    def _push_arc(self, u, w):
        self.flow_out[u] |= 1 << w
        self.flow_in[w] |= 1 << u

    def seed_single(self, s, t, limit):
        common = self.out[s] & self.inn[t] & self.passable
        for w in iter_bits(common):
            if self.value >= limit:
                break
            self._push_arc(s, w)
            self._push_arc(w, t)
            self.through |= 1 << w
            self.value += 1

    def seed_sets(self, limit):
        mid = self.passable & ~self.src & ~self.snk
        for s in iter_bits(self.src):
            if self.value >= limit:
                break
            bs = 1 << s
            direct = self.out[s] & self.snk & ~self.ends
            if direct:
                t = lowest(direct)
                self._push_arc(s, t)
            else:
                for t in iter_bits(self.snk & ~self.ends):
                    via = self.out[s] & self.inn[t] & mid & ~self.through
                    if via:
                        w = lowest(via)
                        self._push_arc(s, w)
                        self._push_arc(w, t)
                        self.through |= 1 << w
                        break
                else:
                    continue
            self.starts |= bs
            self.ends |= 1 << t
            self.through |= bs | (1 << t)
            self.value += 1

    def augment(self, s=-1, t=-1):
        """One BFS in the residual network; returns True if flow grew."""
        n = self.n
        single = self.single
        through = self.through
        parent = {}
        vis_in = 0
        vis_out = 0
        q = deque()
        if single:
            vis_out = 1 << s
            parent[s + n] = -1
            q.append(s + n)
        else:
            for v in iter_bits(self.src & ~self.starts):
                vis_in |= 1 << v
                parent[v] = -1
                q.append(v)
        target = -1
        snk_open = self.snk & ~self.ends
        while q and target < 0:
            x = q.popleft()
            if x < n:
                w = x
                bw = 1 << w
                if not through & bw and self.split & bw and not vis_out & bw:
                    vis_out |= bw
                    parent[w + n] = w
                    if not single and snk_open & bw:
                        target = w + n
                        break
                    q.append(w + n)
                for u in iter_bits(self.flow_in[w] & ~vis_out):
                    bu = 1 << u
                    vis_out |= bu
                    parent[u + n] = w
                    if not single and snk_open & bu:
                        target = u + n
                        break
                    q.append(u + n)
            else:
                v = x - n
                bv = 1 << v
                if self.leave_ok & bv:
                    cand = self.out[v] & self.enter_ok & ~vis_in
                    if single and cand >> t & 1:
                        parent[t] = x
                        target = t
                        break
                    vis_in |= cand
                    for w in iter_bits(cand):
                        parent[w] = x
                        q.append(w)
                if through & bv and not vis_in & bv:
                    vis_in |= bv
                    parent[v] = x
                    q.append(v)
        if target < 0:
            self.last_vis = (vis_in, vis_out)
            return False
        self._apply(parent, target)
        return True

    def _apply(self, parent, target):
        n = self.n
        if not self.single:
            self.ends |= 1 << (target - n)
        cur = target
        while True:
            prev = parent[cur]
            if prev == -1:
                if cur < n:
                    self.starts |= 1 << cur
                break
            if prev < n:
                w = prev
                if cur >= n:
                    u = cur - n
                    if u == w:
                        self.through |= 1 << w
                    else:
                        # cancel flow on u -> w
                        self.flow_out[u] &= ~(1 << w)
                        self.flow_in[w] &= ~(1 << u)
            else:
                v = prev - n
                if cur == v:
                    self.through &= ~(1 << v)
                else:
                    self._push_arc(v, cur)
            cur = prev
        self.value += 1


def local_flow(
    out: Sequence[int],
    inn: Sequence[int],
    s: int,
    t: int,
    passable: int,
    limit: int | None = None,
) -> FlowResult:
    """Internally disjoint s->t paths through ``passable`` vertices.

    The caller must make sure there is no arc s->t. With ``limit`` set the
    search stops after that many paths and ``cut`` is left at 0.
    """
    if s == t:
        raise ValueError("source equals sink")
    if out[s] >> t & 1:
        raise ValueError("direct arc between endpoints")
    passable &= ~((1 << s) | (1 << t))
    cap = limit if limit is not None else len(out)
    eng = _Engine(out, inn, 1 << s, 1 << t, passable, single=True)
    eng.seed_single(s, t, cap)
    grew = True
    while eng.value < cap:
        grew = eng.augment(s, t)
        if not grew:
            break
    paths = []
    for w in iter_bits(eng.flow_out[s]):
        path = [s, w]
        while w != t:
            w = lowest(eng.flow_out[w])
            path.append(w)
        paths.append(path)
    res = FlowResult(eng.value, paths, saturated=eng.value >= cap)
    if not grew:
        vis_in, vis_out = eng.last_vis
        res.cut = vis_in & ~vis_out & passable
    return res


def set_flow(
    out: Sequence[int],
    inn: Sequence[int],
    sources: int,
    sinks: int,
    passable: int,
    limit: int | None = None,
) -> FlowResult:
    """Vertex-disjoint paths from ``sources`` to ``sinks``.

    Returned paths are trimmed so that each contains exactly one source
    (its first vertex) and one sink (its last vertex).
    """
    if sources & sinks:
        raise ValueError("sources and sinks overlap")
    cap = limit if limit is not None else len(out)
    eng = _Engine(out, inn, sources, sinks, passable, single=False)
    eng.seed_sets(cap)
    grew = True
    while eng.value < cap:
        grew = eng.augment()
        if not grew:
            break
    paths = []
    for s in iter_bits(eng.starts):
        path = [s]
        v = s
        while eng.flow_out[v]:
            v = lowest(eng.flow_out[v])
            path.append(v)
        first = max(i for i, x in enumerate(path) if sources >> x & 1)
        last = next(i for i in range(first, len(path)) if sinks >> path[i] & 1)
        paths.append(path[first : last + 1])
    paths.sort(key=lambda p: p[0])
    res = FlowResult(eng.value, paths, saturated=eng.value >= cap)
    if not grew:
        vis_in, vis_out = eng.last_vis
        res.cut = (
            (vis_in & ~vis_out & eng.split)
            | (sources & ~vis_in)
            | (sinks & vis_out)
        )
    return res
