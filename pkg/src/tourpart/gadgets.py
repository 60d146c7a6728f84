"""Gadget construction and vertex classification.

A gadget joins a transitive in-set (entered from its source hub) to a
transitive out-set (ending at its sink hub) by a short path. The family
records, for every vertex, whether it is adjacent in the right direction to
almost every gadget, which drives the later stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .bits import full_mask, iter_bits, mask_of, mask_to_bool, members, bool_to_mask
from .errors import PreconditionError, StageFailure
from .paths import InfeasiblePaths, PathSystem, check_path_system, max_disjoint_paths
from .paths import minimize_path_system, verify_backward_chords
from .profile import ConstantsProfile
from .tournament import Tournament

JSON_VERSION = 1


@dataclass(frozen=True)
class Gadget:
    id: int
    hub_out: int
    hub_in: int
    S_plus: tuple[int, ...]  # selection order, hub_out first
    S_minus: tuple[int, ...]  # selection order, hub_in first
    path: tuple[int, ...]
    X: frozenset[int] = frozenset()
    # candidate-set sizes recorded while growing S_plus / S_minus
    plus_sizes: tuple[int, ...] = ()
    minus_sizes: tuple[int, ...] = ()

    @property
    def s_plus(self) -> int:
        return self.path[-1]

    @property
    def s_minus(self) -> int:
        return self.path[0]

    @cached_property
    def U(self) -> frozenset[int]:
        return frozenset(self.S_plus) | frozenset(self.S_minus) | frozenset(self.path)

    @cached_property
    def S(self) -> frozenset[int]:
        return (
            frozenset(self.S_plus)
            | frozenset(self.S_minus)
            | frozenset(self.path[:3])
            | frozenset(self.path[-3:])
        )

    @cached_property
    def U_mask(self) -> int:
        return mask_of(self.U)

    @cached_property
    def S_mask(self) -> int:
        return mask_of(self.S)

    @cached_property
    def X_mask(self) -> int:
        return mask_of(self.X)

    @cached_property
    def plus_mask(self) -> int:
        return mask_of(self.S_plus)

    @cached_property
    def minus_mask(self) -> int:
        return mask_of(self.S_minus)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "hub_out": self.hub_out,
            "hub_in": self.hub_in,
            "S_plus": list(self.S_plus),
            "S_minus": list(self.S_minus),
            "path": list(self.path),
            "X": sorted(self.X),
        }


@dataclass(frozen=True)
class GadgetFamily:
    n: int
    k: int
    t: int
    gadgets: tuple[Gadget, ...]
    okay: int = 0
    bad_plus: int = 0
    bad_minus: int = 0
    reversed: bool = False

    @property
    def index_set(self) -> tuple[int, ...]:
        return tuple(g.id for g in self.gadgets)

    @property
    def everyone(self) -> int:
        return full_mask(self.n)

    @property
    def bad(self) -> int:
        return self.bad_plus & self.bad_minus

    @property
    def good_plus(self) -> int:
        return self.okay & ~self.bad_plus

    @property
    def good_minus(self) -> int:
        return self.okay & ~self.bad_minus

    @property
    def good(self) -> int:
        return self.good_plus & self.good_minus

    @property
    def orientation_ok(self) -> bool:
        return self.bad_minus.bit_count() >= self.bad_plus.bit_count()

    def gadget(self, alpha: int) -> Gadget:
        return self.gadgets[alpha]

    def U_of(self, indices: Iterable[int]) -> int:
        m = 0
        for a in indices:
            m |= self.gadgets[a].U_mask
        return m

    def W(self, indices: Iterable[int]) -> int:
        """Vertices outside every U(alpha) with alpha in ``indices``."""
        return self.everyone & ~self.U_of(indices)

    def to_dict(self) -> dict:
        return {
            "version": JSON_VERSION,
            "n": self.n,
            "k": self.k,
            "t": self.t,
            "reversed": self.reversed,
            "gadgets": [g.to_dict() for g in self.gadgets],
            "classification": {
                "V_okay": members(self.okay),
                "V_bad_plus": members(self.bad_plus),
                "V_bad_minus": members(self.bad_minus),
                "V_bad": members(self.bad),
                "V_good_plus": members(self.good_plus),
                "V_good_minus": members(self.good_minus),
                "V_good": members(self.good),
            },
        }


# ---------------------------------------------------------------- hubs


def select_hubs(T: Tournament, m: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if m < 0:
        raise PreconditionError("precondition", "m must be non-negative")
    if T.n <= 2 * m:
        raise PreconditionError("n-too-small", f"need n > 2m, got n={T.n}, m={m}")
    by_out = sorted(range(T.n), key=lambda v: (-T.out_rows[v].bit_count(), v))
    plus = by_out[:m]
    taken = set(plus)
    rest = [v for v in range(T.n) if v not in taken]
    by_in = sorted(rest, key=lambda v: (-T.in_rows[v].bit_count(), v))
    minus = by_in[:m]
    return tuple(sorted(plus)), tuple(sorted(minus))


# ---------------------------------------------------------------- dominating sequences


@dataclass(frozen=True)
class DominatingSequence:
    vertices: tuple[int, ...]
    # |U_1|, |U_2|, ...: candidate-set sizes before each pick, ending with the residual
    candidate_sizes: tuple[int, ...]
    residual: int

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @property
    def last(self) -> int:
        return self.vertices[-1]


def build_dominating_seq(
    T: Tournament, a: int, pool: Iterable[int] | int, cap: int, direction: str = "out"
) -> DominatingSequence:
    """Greedy transitive set anchored at ``a``.

    For ``direction="out"`` each new vertex beats everything chosen so far
    and is picked among the pool vertices not yet beaten by any chosen
    vertex, maximising out-degree inside that candidate set; ``a`` ends up
    the sink. ``direction="in"`` is the mirror image.
    """
    if direction not in ("out", "in"):
        raise ValueError("direction must be 'out' or 'in'")
    pmask = pool if isinstance(pool, int) else mask_of(pool)
    if pmask >> a & 1:
        raise PreconditionError("precondition", f"hub {a} lies in its own pool")
    rows = T.out_rows if direction == "out" else T.in_rows
    chosen = [a]
    covered = rows[a] | (1 << a)
    sizes = []
    cand = pmask & ~covered
    while True:
        sizes.append(cand.bit_count())
        if not cand or len(chosen) > cap:
            break
        best, best_deg = -1, -1
        for v in iter_bits(cand):
            d = (rows[v] & cand).bit_count()
            if d > best_deg:
                best, best_deg = v, d
        chosen.append(best)
        covered |= rows[best] | (1 << best)
        cand &= ~covered
    return DominatingSequence(tuple(chosen), tuple(sizes), cand)


# ---------------------------------------------------------------- exception sets


def compute_X(T: Tournament, g: Gadget) -> frozenset[int]:
    inner = g.U_mask & ~g.S_mask
    beaten_by_inner = 0
    beating_inner = 0
    for w in iter_bits(inner):
        beaten_by_inner |= T.out_rows[w]
        beating_inner |= T.in_rows[w]
    x = (T.in_rows[g.s_plus] & beaten_by_inner) | (T.out_rows[g.s_minus] & beating_inner)
    return frozenset(members(x))


# ---------------------------------------------------------------- family


def _miss_counts(n: int, masks: Sequence[int]) -> np.ndarray:
    counts = np.zeros(n, dtype=np.int64)
    for m in masks:
        counts += ~mask_to_bool(m, n)
    return counts


def classify_vertices(T: Tournament, family: GadgetFamily, k: int, t: int) -> GadgetFamily:
    n = T.n
    s_all = 0
    has_out_to_minus = []
    has_in_from_plus = []
    for g in family.gadgets:
        s_all |= g.S_mask
        m = 0
        for x in g.S_minus:
            m |= T.in_rows[x]
        has_out_to_minus.append(m)
        m = 0
        for x in g.S_plus:
            m |= T.out_rows[x]
        has_in_from_plus.append(m)
    okay = full_mask(n) & ~s_all
    kt = k * t
    bad_plus = bool_to_mask(_miss_counts(n, has_out_to_minus) >= kt) & okay
    bad_minus = bool_to_mask(_miss_counts(n, has_in_from_plus) >= kt) & okay
    return replace(family, okay=okay, bad_plus=bad_plus, bad_minus=bad_minus)


def build_gadget_family(
    T: Tournament, k: int, t: int, profile: ConstantsProfile, seed: int = 0
) -> GadgetFamily:
    """Build and classify sigma1*k*t gadgets.

    The construction is deterministic; ``seed`` is accepted for interface
    uniformity with the randomised stages and is not consumed.
    """
    n = T.n
    G = profile.gadget_count(k, t)
    if n <= 2 * G:
        raise StageFailure("hub-selection", "too few vertices for the hubs", {"needed_n": 2 * G + 1, "n": n})
    hubs_plus, hubs_minus = select_hubs(T, G)
    hubs = mask_of(hubs_plus) | mask_of(hubs_minus)
    cap = profile.dominating_cap

    used = hubs
    seq_plus = {}
    for a in hubs_plus:
        seq = build_dominating_seq(T, a, full_mask(n) & ~used, cap, "out")
        seq_plus[a] = seq
        used |= mask_of(seq.vertices)
    seq_minus = {}
    for a in hubs_minus:
        seq = build_dominating_seq(T, a, full_mask(n) & ~used, cap, "in")
        seq_minus[a] = seq
        used |= mask_of(seq.vertices)

    sources = {seq.last: a for a, seq in seq_minus.items()}
    sinks = {seq.last: a for a, seq in seq_plus.items()}
    forbidden = used & ~mask_of(sources) & ~mask_of(sinks)
    try:
        ps = max_disjoint_paths(T, sources, sinks, members(forbidden), want=G)
    except InfeasiblePaths as exc:
        raise StageFailure(
            "paths", "not enough disjoint paths between gadget ends", {"needed": G, "achieved": exc.maximum}
        ) from None
    ps = minimize_path_system(T, ps)
    problems = check_path_system(T, ps)
    if problems or not verify_backward_chords(T, ps):
        raise StageFailure("paths", "minimised path system is invalid", {"problems": problems[:5]})

    by_hub = sorted(ps.paths, key=lambda p: sources[p[0]])
    gadgets = []
    for alpha, path in enumerate(by_hub):
        a_minus = sources[path[0]]
        a_plus = sinks[path[-1]]
        sp, sm = seq_plus[a_plus], seq_minus[a_minus]
        g = Gadget(
            alpha, a_plus, a_minus, sp.vertices, sm.vertices, tuple(path),
            plus_sizes=sp.candidate_sizes, minus_sizes=sm.candidate_sizes,
        )
        g = replace(g, X=compute_X(T, g))
        if len(g.S) > profile.rho:
            raise StageFailure("gadget-bounds", "|S| exceeds rho",
                               {"gadget": alpha, "size": len(g.S), "rho": profile.rho})
        x_cap = profile.rho * G
        if len(g.X) > x_cap:
            raise StageFailure("gadget-bounds", "|X| exceeds rho*sigma1*k*t",
                               {"gadget": alpha, "size": len(g.X), "bound": x_cap})
        gadgets.append(g)
    family = GadgetFamily(n, k, t, tuple(gadgets))
    return classify_vertices(T, family, k, t)


# ---------------------------------------------------------------- verification


@dataclass
class PropertyCheck:
    passed: bool
    counterexample: str | None = None
    gating: bool = True


@dataclass
class GadgetReport:
    checks: dict[str, PropertyCheck] = field(default_factory=dict)

    @property
    def gating_ok(self) -> bool:
        return all(c.passed for c in self.checks.values() if c.gating)

    def failed(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            name: {"passed": c.passed, "gating": c.gating, "counterexample": c.counterexample}
            for name, c in self.checks.items()
        }


def _is_transitive_chain(T: Tournament, seq: Sequence[int], later_beats_earlier: bool) -> bool:
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            a, b = (seq[j], seq[i]) if later_beats_earlier else (seq[i], seq[j])
            if not T.out_rows[a] >> b & 1:
                return False
    return True


def _check_G1(family):
    owner = {}
    for g in family.gadgets:
        for v in sorted(g.U):
            if v in owner:
                return PropertyCheck(False, f"vertex {v} in gadgets {owner[v]} and {g.id}")
            owner[v] = g.id
    return PropertyCheck(True)


def _check_G2(family, profile, k, t):
    cap = profile.rho * profile.gadget_count(k, t)
    for g in family.gadgets:
        if len(g.S) > profile.rho:
            return PropertyCheck(False, f"gadget {g.id}: |S|={len(g.S)} > rho={profile.rho}")
        if len(g.X) > cap:
            return PropertyCheck(False, f"gadget {g.id}: |X|={len(g.X)} > {cap}")
    return PropertyCheck(True)


def _check_G3(T, family):
    out = T.out_rows
    for g in family.gadgets:
        if g.path[0] not in g.S_minus or g.path[-1] not in g.S_plus:
            return PropertyCheck(False, f"gadget {g.id}: path ends outside S_minus/S_plus")
        if not _is_transitive_chain(T, g.S_plus, True) or g.S_plus[0] != g.hub_out:
            return PropertyCheck(False, f"gadget {g.id}: S_plus is not transitive with sink at its hub")
        if not _is_transitive_chain(T, g.S_minus, False) or g.S_minus[0] != g.hub_in:
            return PropertyCheck(False, f"gadget {g.id}: S_minus is not transitive with source at its hub")
        for u in g.S_minus:
            for v in g.S_plus:
                walk = ([u] if u != g.s_minus else []) + list(g.path) + ([v] if v != g.s_plus else [])
                for a, b in zip(walk, walk[1:]):
                    if not out[a] >> b & 1:
                        return PropertyCheck(False, f"gadget {g.id}: no arc {a}->{b} on walk {u}..{v}")
                if len(set(walk)) != len(walk) or not set(walk) <= g.U:
                    return PropertyCheck(False, f"gadget {g.id}: walk {u}..{v} is not a path in U")
    return PropertyCheck(True)


def _check_G4(T, family):
    for g in family.gadgets:
        into_plus = T.in_rows[g.s_plus] & ~g.X_mask
        from_minus = T.out_rows[g.s_minus] & ~g.X_mask
        for w in iter_bits(g.U_mask & ~g.S_mask):
            bw = 1 << w
            stray = into_plus & ~T.in_rows[w] & ~bw
            if stray:
                return PropertyCheck(False, f"gadget {g.id}: {min(iter_bits(stray))} beats s_plus but not {w}")
            stray = from_minus & ~T.out_rows[w] & ~bw
            if stray:
                return PropertyCheck(False, f"gadget {g.id}: s_minus beats {min(iter_bits(stray))} but {w} does not")
    return PropertyCheck(True)


def halving_holds(sizes: Sequence[int]) -> bool:
    return all(sizes[j] * 2**j <= sizes[0] for j in range(len(sizes)))


def _check_halving(family):
    for g in family.gadgets:
        for name, sizes in (("S_plus", g.plus_sizes), ("S_minus", g.minus_sizes)):
            if sizes and not halving_holds(sizes):
                return PropertyCheck(False, f"gadget {g.id}: {name} candidate sizes {list(sizes)}")
    return PropertyCheck(True)


def verify_gadget_properties(
    T: Tournament, family: GadgetFamily, k: int, t: int, profile: ConstantsProfile
) -> GadgetReport:
    """Check the structural properties (gating) and the degree properties (reported only)."""
    rep = GadgetReport()
    rep.checks["G1"] = _check_G1(family)
    rep.checks["G2"] = _check_G2(family, profile, k, t)
    rep.checks["G3"] = _check_G3(T, family)
    rep.checks["G4"] = _check_G4(T, family)
    chords_ok = all(
        verify_backward_chords(T, PathSystem((g.path,))) for g in family.gadgets
    )
    rep.checks["backward-chords"] = PropertyCheck(chords_ok, None if chords_ok else "forward chord on a path")
    rep.checks["dominating-halving"] = _check_halving(family)

    out, inn = T.out_rows, T.in_rows
    okay = family.okay
    nbp, nbm = family.bad_plus.bit_count(), family.bad_minus.bit_count()
    big = profile.bad_degree_factor
    mid = profile.good_degree_factor
    floor_ = profile.tau1 * k * t / 2

    def first_fail(cond, verts):
        for u in iter_bits(verts):
            if not cond(u):
                return PropertyCheck(False, f"vertex {u}", gating=False)
        return PropertyCheck(True, gating=False)

    rep.checks["G5"] = first_fail(
        lambda u: out[u].bit_count() >= big * nbp and inn[u].bit_count() >= big * nbm, okay
    )
    ng = family.good.bit_count()
    rep.checks["G6"] = PropertyCheck(2 * ng >= T.n, None if 2 * ng >= T.n else f"|V_good|={ng}", gating=False)
    need7 = max(mid * nbp, floor_)
    rep.checks["G7"] = first_fail(lambda u: (out[u] & family.good_plus).bit_count() >= need7, okay)
    need8 = max(mid * nbm, floor_)
    rep.checks["G8"] = first_fail(lambda u: (inn[u] & family.good).bit_count() >= need8, okay)
    need9 = max(mid * (T.n - okay.bit_count()), floor_)
    rep.checks["G9"] = first_fail(
        lambda u: (out[u] & okay).bit_count() >= need9 and (inn[u] & okay).bit_count() >= need9,
        T.all_mask,
    )
    return rep
