"""Grouping gadgets into blocks and linking each block into a k-connected set."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bits import bool_to_mask, iter_bits, mask_to_bool, members
from .errors import PreconditionError, StageFailure
from .gadgets import GadgetFamily
from .profile import ConstantsProfile
from .tournament import Tournament, k_connected_on


@dataclass
class GroupPlan:
    A3: tuple[int, ...]
    blocks: list[tuple[int, ...]]
    eligible_reservoir: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "A3": list(self.A3),
            "blocks": [list(b) for b in self.blocks],
            "eligible_reservoir_sizes": [m.bit_count() for m in self.eligible_reservoir],
        }


@dataclass
class LinkedPart:
    block_id: int
    members: int
    contains_gadgets: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.members.bit_count()

    def to_dict(self) -> dict:
        return {"block_id": self.block_id, "size": self.size, "gadgets": list(self.contains_gadgets)}


# ---------------------------------------------------------------- predicates


def _hit_masks(T: Tournament, family: GadgetFamily, A: Iterable[int]):
    """Per index: vertices with an out-neighbour in S-(alpha), and with an in-neighbour in S+(alpha)."""
    to_minus, from_plus = [], []
    for a in A:
        g = family.gadget(a)
        m = 0
        for x in g.S_minus:
            m |= T.in_rows[x]
        to_minus.append(m)
        m = 0
        for x in g.S_plus:
            m |= T.out_rows[x]
        from_plus.append(m)
    return to_minus, from_plus


def _few_misses(n: int, hits: Sequence[int], k: int) -> int:
    miss = np.zeros(n, dtype=np.int64)
    for h in hits:
        miss += ~mask_to_bool(h, n)
    return bool_to_mask(miss <= k)


def layered_masks(
    T: Tournament, family: GadgetFamily, A: Iterable[int], W: int, k: int, need: int
) -> tuple[int, int, int, int]:
    """The four layers shared by eligibility and helpfulness.

    Layer 1: good vertices of W missing at most k of the S- sets (outwards)
    and of the S+ sets (inwards). Layer 2: good-plus-only vertices missing at
    most k S- sets with ``need`` in-neighbours in layer 1. Layer 3: the mirror
    image, counting out-neighbours in layers 1-2. Layer 4: bad vertices with
    both neighbour counts.
    """
    A = list(A)
    n = T.n
    to_minus, from_plus = _hit_masks(T, family, A)
    okm = _few_misses(n, to_minus, k)
    okp = _few_misses(n, from_plus, k)
    out, inn = T.out_rows, T.in_rows
    gp, gm = family.good_plus, family.good_minus
    l1 = family.good & W & okm & okp
    l2 = 0
    for u in iter_bits(gp & ~gm & W & okm):
        if (inn[u] & l1).bit_count() >= need:
            l2 |= 1 << u
    l12 = l1 | l2
    l3 = 0
    for u in iter_bits(gm & ~gp & W & okp):
        if (out[u] & l12).bit_count() >= need:
            l3 |= 1 << u
    l4 = 0
    for u in iter_bits(family.bad & W):
        if (inn[u] & l1).bit_count() >= need and (out[u] & l12).bit_count() >= need:
            l4 |= 1 << u
    return l1, l2, l3, l4


def eligible_mask(
    T: Tournament, family: GadgetFamily, A: Iterable[int], W: int, k: int, profile: ConstantsProfile,
    t: int | None = None,
) -> int:
    t = family.t if t is None else t
    need = profile.threshold(profile.tau3, k, t, "tau3")
    l1, l2, l3, l4 = layered_masks(T, family, A, W, k, need)
    return l1 | l2 | l3 | l4


def is_eligible(T, family, A, W, u, k, profile, t=None) -> bool:
    return bool(eligible_mask(T, family, A, W, k, profile, t) >> u & 1)


def helpful_mask(T: Tournament, family: GadgetFamily, A: Iterable[int], W: int, k: int) -> int:
    l1, l2, l3, l4 = layered_masks(T, family, A, W, k, k)
    return l1 | l2 | l3 | l4


def is_helpful(T, family, A, W, u, k) -> bool:
    return bool(helpful_mask(T, family, A, W, k) >> u & 1)


# ---------------------------------------------------------------- grouping


def _neighbour_shortfall(T, family, block, W_of_alpha, k, need, mask_for):
    """First (alpha, s, direction, count) whose eligible neighbourhood is too small, or None."""
    for a in block:
        g = family.gadget(a)
        el = mask_for(W_of_alpha(a))
        for s in sorted(g.S):
            for nu, rows in (("+", T.out_rows), ("-", T.in_rows)):
                c = (rows[s] & el).bit_count()
                if c < need:
                    return {"alpha": a, "s": s, "direction": nu, "count": c, "needed": need}
    return None


def _class_passes(T, family, cls, rest_W, k, t, profile, need, reservoir_need, W_reservoir):
    """Neighbour check and reservoir check for one class; returns (ok, check, detail, reservoir)."""
    cache = {}

    def mask_for(W):
        if W not in cache:
            cache[W] = eligible_mask(T, family, cls, W, k, profile, t)
        return cache[W]

    bad = _neighbour_shortfall(
        T, family, cls, lambda a: rest_W & ~family.gadget(a).X_mask, k, need, mask_for
    )
    if bad is not None:
        return False, "eligible-neighbours", bad, 0
    res = mask_for(W_reservoir) & family.good & W_reservoir
    if res.bit_count() < reservoir_need:
        return False, "eligible-reservoir", {"count": res.bit_count(), "needed": reservoir_need}, res
    return True, None, None, res


def group_gadgets(
    T: Tournament, family: GadgetFamily, A2: Sequence[int], k: int, t: int,
    profile: ConstantsProfile, seed: int = 0, max_rounds: int = 64, log: list[dict] | None = None,
) -> GroupPlan:
    if t < 1:
        raise PreconditionError("precondition", "t must be at least 1")
    if k < 1:
        raise PreconditionError("precondition", "k must be at least 1")
    log = [] if log is None else log
    A2 = sorted(A2)
    nblocks = profile.sigma3 * t
    size = 10 * k
    floor = max(size * nblocks, profile.sigma2 * k * t)
    if len(A2) < floor:
        raise StageFailure("group", "too few indices to form the blocks",
                           {"check": "size", "achieved": len(A2), "needed": floor, "rounds": 0})
    nclasses = profile.phi * t
    need = profile.threshold(profile.tau3, k, t, "tau3")
    class_need = profile.fraction_of(profile.class_reservoir, T.n)
    block_need = profile.fraction_of(profile.block_reservoir, T.n)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(3,)))
    best = {"check": "classes", "achieved": 0}
    for r in range(max_rounds):
        labels = rng.integers(0, nclasses, size=len(A2))
        classes = [[a for a, c in zip(A2, labels) if c == i] for i in range(nclasses)]
        passing = []
        fails: dict[str, int] = {}
        for i, cls in enumerate(classes):
            if len(cls) < size:
                fails["size"] = fails.get("size", 0) + 1
                continue
            rest_W = family.W(a for j, c in enumerate(classes) if j != i for a in c)
            ok, check, _, _ = _class_passes(
                T, family, cls, rest_W, k, t, profile, need, class_need, family.W(cls)
            )
            if ok:
                passing.append(i)
            else:
                fails[check] = fails.get(check, 0) + 1
        chosen = sorted(passing, key=lambda i: (family.U_of(classes[i]).bit_count(), i))[: len(passing) // 8]
        status = "ok" if len(chosen) >= nblocks else "retry"
        detail = {"passing_classes": len(passing), "selected": len(chosen), "needed": nblocks, "failures": fails}
        if len(chosen) > best["achieved"]:
            best = {"check": "classes", "achieved": len(chosen)}
        if len(chosen) >= nblocks:
            blocks = [tuple(sorted(classes[i])[:size]) for i in chosen[:nblocks]]
            plan, problem = _recheck_plan(T, family, blocks, k, t, profile, need, block_need)
            if plan is not None:
                log.append({"stage": "group", "round": r, "status": "ok", "detail": detail})
                return plan
            status = "recheck-failed"
            detail["problem"] = problem
        log.append({"stage": "group", "round": r, "status": status, "detail": detail})
    raise StageFailure("group", "no round produced enough verified blocks",
                       {**best, "needed": nblocks, "rounds": max_rounds})


def _recheck_plan(T, family, blocks, k, t, profile, need, block_need):
    A3 = tuple(sorted(a for b in blocks for a in b))
    if len(set(A3)) != len(A3):
        return None, {"check": "disjoint"}
    W3 = family.W(A3)
    reservoir_W = W3 & family.good
    reservoirs = []
    for i, b in enumerate(blocks):
        rest_W = family.W(a for j, bb in enumerate(blocks) if j != i for a in bb)
        ok, check, detail, res = _class_passes(
            T, family, list(b), rest_W, k, t, profile, need, block_need, reservoir_W
        )
        if not ok:
            return None, {"check": check, "block": i, **(detail or {})}
        reservoirs.append(res)
    return GroupPlan(A3, [tuple(b) for b in blocks], reservoirs), None


# ---------------------------------------------------------------- linking


def link_group(
    T: Tournament, family: GadgetFamily, block: Sequence[int], W_i: int, k: int, block_id: int = 0
) -> LinkedPart:
    if len(block) < 3 * k:
        raise PreconditionError("precondition", f"block needs at least 3k = {3 * k} gadgets, got {len(block)}")
    helpful = helpful_mask(T, family, block, W_i, k)
    for a in block:
        g = family.gadget(a)
        usable = helpful & ~g.X_mask
        for s in sorted(g.S):
            for nu, rows in (("+", T.out_rows), ("-", T.in_rows)):
                c = (rows[s] & usable).bit_count()
                if c < k:
                    raise StageFailure("link", "hypothesis-unmet",
                                       {"block": block_id, "alpha": a, "s": s, "direction": nu,
                                        "count": c, "needed": k})
    Y = helpful | family.U_of(block)
    res = k_connected_on(T, Y, k)
    if not res.ok:
        raise StageFailure("link", "not-k-connected",
                           {"block": block_id, "witness": res.witness.to_dict() if res.witness else None})
    return LinkedPart(block_id, Y, tuple(sorted(block)))


def reservoir_count(T: Tournament, pool: int, part: int, k: int) -> int:
    """Vertices of ``pool`` with at least k out- and k in-neighbours in ``part``."""
    c = 0
    for u in iter_bits(pool):
        if (T.out_rows[u] & part).bit_count() >= k and (T.in_rows[u] & part).bit_count() >= k:
            c += 1
    return c


def build_connected_parts(
    T: Tournament, family: GadgetFamily, plan: GroupPlan, k: int, t: int,
    profile: ConstantsProfile, seed: int = 0, max_rounds: int = 64, log: list[dict] | None = None,
) -> tuple[list[LinkedPart], int, int]:
    """Split W(A3) at random, link each block, keep t parts of admissible size.

    Returns the parts, the leftover set Z and the random reservoir Y.
    """
    log = [] if log is None else log
    n = T.n
    if 2 * k * t > n:
        raise StageFailure("connect", "2k exceeds n/t", {"bullet": "size", "achieved": 0, "rounds": 0})
    nblocks = len(plan.blocks)
    W = family.W(plan.A3)
    verts = np.array(members(W), dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(4,)))
    need_res = profile.fraction_of(profile.part_reservoir, n)
    best = 0
    for r in range(max_rounds):
        to_Y = rng.random(len(verts)) < 0.5
        which = rng.integers(0, nblocks, size=len(verts))
        Y = 0
        W_parts = [0] * nblocks
        for v, y, b in zip(verts.tolist(), to_Y.tolist(), which.tolist()):
            if y:
                Y |= 1 << v
            else:
                W_parts[b] |= 1 << v
        linked, reasons = [], {}
        for i, b in enumerate(plan.blocks):
            try:
                p = link_group(T, family, b, W_parts[i], k, block_id=i)
            except StageFailure as exc:
                reasons[exc.reason] = reasons.get(exc.reason, 0) + 1
                continue
            if 2 * k <= p.size and p.size * t <= n:
                linked.append(p)
            else:
                reasons["size"] = reasons.get("size", 0) + 1
        best = max(best, len(linked))
        detail = {"linked": len(linked), "needed": t, "failures": reasons}
        if len(linked) >= t:
            parts = linked[:t]
            union = 0
            for p in parts:
                union |= p.members
            Z = T.all_mask & ~union
            pool = Z & family.good
            counts = [reservoir_count(T, pool, p.members, k) for p in parts]
            detail["reservoir"] = counts
            if min(counts) >= need_res:
                log.append({"stage": "connect", "round": r, "status": "ok", "detail": detail})
                return parts, Z, Y
            log.append({"stage": "connect", "round": r, "status": "reservoir-short", "detail": detail})
            continue
        log.append({"stage": "connect", "round": r, "status": "retry", "detail": detail})
    raise StageFailure("connect", "fewer than t parts linked and verified",
                       {"bullet": "parts", "achieved": best, "needed": t, "rounds": max_rounds})
