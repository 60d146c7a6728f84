"""Trimming the gadget index set until every gadget sees many available vertices.

Each stage first thins the index set with a deterministic two-pass filter
and then repeatedly draws a random half, keeping the indices whose
neighbourhood condition survives. Randomness only decides how quickly an
acceptable subset is found: every kept set is rechecked directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np

from .bits import iter_bits
from .errors import PreconditionError, StageFailure
from .gadgets import GadgetFamily
from .profile import ConstantsProfile
from .tournament import Tournament

Key = tuple[int, str]  # (vertex s in S(alpha), direction "+" or "-")


@dataclass
class FilterOutcome:
    kept: tuple[int, ...]
    rounds_used: int
    verified: bool
    log: list[dict] = field(default_factory=list)


# ---------------------------------------------------------------- availability


def available_mask(
    T: Tournament, family: GadgetFamily, A: Iterable[int], alpha: int, k: int, t: int,
    profile: ConstantsProfile,
) -> int:
    """All vertices available for ``alpha`` with respect to ``A``."""
    A = set(A)
    if alpha not in A:
        raise PreconditionError("alpha-not-in-A", f"index {alpha} is not in A")
    W = family.W(A) | family.gadget(alpha).U_mask
    th = profile.threshold(profile.tau2, k, t, "tau2")
    out, inn = T.out_rows, T.in_rows
    gp, gm = family.good_plus, family.good_minus
    l1 = family.good & W
    l2 = 0
    for u in iter_bits(gp & ~gm & W):
        if (inn[u] & l1).bit_count() >= th:
            l2 |= 1 << u
    l12 = l1 | l2
    l3 = 0
    for u in iter_bits(gm & ~gp & W):
        if (out[u] & l12).bit_count() >= th:
            l3 |= 1 << u
    l4 = 0
    for u in iter_bits(family.bad & W):
        if (inn[u] & l1).bit_count() >= th and (out[u] & l12).bit_count() >= th:
            l4 |= 1 << u
    return l12 | l3 | l4


def is_available(
    T: Tournament, family: GadgetFamily, A: Iterable[int], alpha: int, u: int,
    profile: ConstantsProfile, k: int | None = None, t: int | None = None,
) -> bool:
    k = family.k if k is None else k
    t = family.t if t is None else t
    return bool(available_mask(T, family, A, alpha, k, t, profile) >> u & 1)


# ---------------------------------------------------------------- two-pass filter


def two_pass_filter(
    C0: Sequence[int],
    keys: Callable[[int], Iterable[Hashable]],
    trigger: Callable[[int, Hashable, Sequence[int]], Optional[int]],
) -> list[int]:
    """Forward pass then backward pass; each kept index evicts one witness per key.

    ``trigger(alpha, key, pool)`` returns some index of ``pool`` (the indices
    still unclaimed, in order, without ``alpha``) that witnesses ``key``, or
    None. The result keeps the order of ``C0``.
    """

    def one_pass(seq: list[int], backward: bool) -> list[int]:
        kept: list[int] = []
        claimed: set[int] = set()
        order = list(reversed(seq)) if backward else list(seq)
        for alpha in order:
            if alpha in claimed:
                continue
            claimed.add(alpha)
            kept.append(alpha)
            for key in keys(alpha):
                pool = [b for b in seq if b not in claimed]
                beta = trigger(alpha, key, pool)
                if beta is not None:
                    if beta in claimed or beta not in pool:
                        raise ValueError("trigger returned a claimed index")
                    claimed.add(beta)
        return kept

    x1 = one_pass(list(C0), backward=False)
    x2 = one_pass(x1, backward=True)
    pos = {a: i for i, a in enumerate(C0)}
    return sorted(x2, key=pos.__getitem__)


# ---------------------------------------------------------------- stage machinery


def _at_least(rows: Sequence[int], cands: int, target: int, th: int) -> int:
    """Vertices u of ``cands`` with |rows[u] & target| >= th."""
    out = 0
    if target.bit_count() < th:
        return 0
    for u in iter_bits(cands):
        if (rows[u] & target).bit_count() >= th:
            out |= 1 << u
    return out


def _count_at_least(rows, cands, target, th, need) -> bool:
    """Whether at least ``need`` vertices u of ``cands`` satisfy |rows[u] & target| >= th."""
    if cands.bit_count() < need or target.bit_count() < th:
        return False
    hits = 0
    left = cands.bit_count()
    for u in iter_bits(cands):
        if (rows[u] & target).bit_count() >= th:
            hits += 1
            if hits >= need:
                return True
        left -= 1
        if hits + left < need:
            return False
    return False


class _Ctx:
    def __init__(self, T, family, k, t, profile, rng, max_rounds, log):
        self.T = T
        self.F = family
        self.k, self.t = k, t
        self.P = profile
        self.rng = rng
        self.max_rounds = max_rounds
        self.log = log
        self.rows = {"+": T.out_rows, "-": T.in_rows}
        self.good_of = {"+": family.good_plus, "-": family.good}
        self.rounds = 0

    def th(self, value: Fraction, what: str) -> int:
        return self.P.threshold(value, self.k, self.t, what)

    def keys(self, alpha):
        g = self.F.gadget(alpha)
        return [(s, nu) for s in sorted(g.S) for nu in ("+", "-")]

    def n_okay(self, s, nu):
        return self.rows[nu][s] & self.F.okay

    def W_minus(self, D: Iterable[int], alpha: int) -> int:
        return self.F.W(D) | self.F.gadget(alpha).U_mask

    def lemma(self, name: str, C_in: Sequence[int], trig_ok, check_ok) -> list[int]:
        """Two-pass filter, then random halves until a quarter survives the check."""
        U = {b: self.F.gadget(b).U_mask for b in C_in}

        def trigger(alpha, key, pool):
            s, nu = key
            for b in pool:
                if trig_ok(alpha, s, nu, b, U[b]):
                    return b
            return None

        Cp = two_pass_filter(C_in, self.keys, trigger)
        target = max(1, math.ceil(len(Cp) / 4))
        best = 0
        for r in range(self.max_rounds):
            self.rounds += 1
            coins = self.rng.random(len(Cp)) < 0.5
            Dpp = [a for a, c in zip(Cp, coins) if c]
            Wpp = self.F.W(Dpp)
            Dppp = {a for a in Cp if check_ok(a, Wpp | U[a])}
            D = [a for a in Dpp if a in Dppp]
            best = max(best, len(D))
            self.log.append(
                {"stage": f"refine:{name}", "round": r, "status": "ok" if len(D) >= target else "retry",
                 "detail": {"filtered": len(Cp), "half": len(Dpp), "passing": len(Dppp), "kept": len(D),
                            "target": target}}
            )
            if len(D) >= target:
                # W only grows when indices are dropped, so the check carries over
                WD = self.F.W(D)
                if not all(check_ok(a, WD | U[a]) for a in D):
                    raise AssertionError("refinement check not monotone")
                return D
        raise StageFailure(
            "refine", f"{name}: no random half met the target",
            {"substage": name, "target": target, "best_achieved": best, "rounds": self.max_rounds,
             "input": len(C_in), "filtered": len(Cp)},
        )


def refine_available(
    T: Tournament, family: GadgetFamily, A1: Sequence[int], k: int, t: int,
    profile: ConstantsProfile, seed: int = 0, max_rounds: int = 64,
    log: list[dict] | None = None,
) -> FilterOutcome:
    log = [] if log is None else log
    need = profile.sigma2 * k * t
    A1 = sorted(A1)
    if len(A1) < need:
        raise StageFailure("refine", "input index set below sigma2*k*t",
                           {"target": need, "best_achieved": len(A1), "rounds": 0})
    if max_rounds < 1:
        raise StageFailure("refine", "no rounds allowed",
                           {"substage": "step1", "target": need, "best_achieved": 0, "rounds": 0})
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    cx = _Ctx(T, family, k, t, profile, rng, max_rounds, log)
    rows, good_of = cx.rows, cx.good_of
    rho = profile.rho

    # step 1: many okay neighbours outside the other gadgets
    th1 = cx.th(profile.phi1, "phi1")
    nok = {}

    def nk(s, nu):
        key = (s, nu)
        if key not in nok:
            nok[key] = cx.n_okay(s, nu)
        return nok[key]

    C1 = cx.lemma(
        "step1", A1,
        lambda a, s, nu, b, Ub: (nk(s, nu) & Ub).bit_count() >= th1,
        lambda a, W: all((nk(s, nu) & W).bit_count() >= th1 for s, nu in cx.keys(a)),
    )

    # step 2, first pass: mu = "+"
    theta1 = profile.phi1
    theta2 = theta1 / (2**7 * rho)
    C2a = _second_order(cx, "step2+", C1, "+", theta2,
                        lambda a, s, nu: nk(s, nu) & cx.W_minus(C1, a))
    # step 2, second pass: mu = "-", M restricted by the first pass
    th_prev = cx.th(theta2, "phi1/2^7rho")
    theta1b = theta2
    theta2b = theta1b / (2**7 * rho)

    def M_2b(a, s, nu):
        base = nk(s, nu) & cx.W_minus(C1, a)
        return _at_least(rows["+"], base, good_of["+"] & cx.W_minus(C2a, a), th_prev)

    C2 = _second_order(cx, "step2-", C2a, "-", theta2b, M_2b)

    # step 3, first pass
    phi2 = profile.phi2
    t1 = cx.th(phi2, "phi2")
    theta3 = phi2 / (2**8 * rho)

    def M_3a(a, s, nu):
        Wa = cx.W_minus(C2, a)
        base = nk(s, nu) & Wa
        m = _at_least(rows["+"], base, good_of["+"] & Wa, t1)
        return _at_least(rows["-"], m, good_of["-"] & Wa, t1)

    C3a = _third_order(cx, "step3a", C2, C2, "+", theta3, M_3a)
    # step 3, second pass
    theta1c = theta3
    t1c = cx.th(theta1c, "phi2/2^8rho")
    theta3c = theta1c / (2**8 * rho)
    down_cache = {}

    def M_3b(a, s, nu):
        Wa = cx.W_minus(C2, a)
        base = nk(s, nu) & Wa
        m = _at_least(rows["-"], base, good_of["-"] & Wa, t1c)
        if a not in down_cache:
            down_cache[a] = _at_least(rows["-"], T.all_mask, good_of["-"] & cx.W_minus(C3a, a), t1c)
        ok_v = down_cache[a]
        return _at_least(rows["+"], m, good_of["+"] & Wa & ok_v, t1c)

    A2 = _third_order(cx, "step3b", C3a, C2, "-", theta3c, M_3b)

    # final postcondition, checked directly
    verified, bad = check_available_postcondition(T, family, A2, k, t, profile)
    log.append({"stage": "refine:final", "round": 0, "status": "ok" if verified and len(A2) >= need else "fail",
                "detail": {"kept": len(A2), "target": need, "violations": len(bad)}})
    if len(A2) < need:
        raise StageFailure("refine", "refined index set below sigma2*k*t",
                           {"target": need, "best_achieved": len(A2), "rounds": cx.rounds})
    if not verified:
        raise StageFailure("refine", "availability postcondition fails", {"violations": bad[:5], "rounds": cx.rounds})
    return FilterOutcome(tuple(A2), cx.rounds, True, log)


def _second_order(cx: _Ctx, name, D1, mu, theta2, M_of):
    """Keep indices whose M-sets hold many vertices with many good mu-neighbours in W."""
    th = cx.th(theta2, name)
    rows_mu = cx.rows[mu]
    good_mu = cx.good_of[mu]
    Ms = {}

    def M(a, s, nu):
        key = (a, s, nu)
        if key not in Ms:
            Ms[key] = M_of(a, s, nu)
        return Ms[key]

    Q = {}

    def trig_ok(a, s, nu, b, Ub):
        if b not in Q:
            Q[b] = _at_least(rows_mu, cx.T.all_mask, good_mu & Ub, th)
        return (M(a, s, nu) & Q[b]).bit_count() >= th

    def check_ok(a, W):
        return all(_count_at_least(rows_mu, M(a, s, nu), good_mu & W, th, th) for s, nu in cx.keys(a))

    return cx.lemma(name, D1, trig_ok, check_ok)


def _third_order(cx: _Ctx, name, D1, C2, mu, theta2, M_of):
    """Like _second_order, one neighbourhood level deeper."""
    th = cx.th(theta2, name)
    rows_mu = cx.rows[mu]
    good_mu = cx.good_of[mu]
    inn = cx.rows["-"]
    good_in = cx.good_of["-"]
    Ms = {}

    def M(a, s, nu):
        key = (a, s, nu)
        if key not in Ms:
            Ms[key] = M_of(a, s, nu)
        return Ms[key]

    # vertices v with enough good in-neighbours inside U(b)
    R = {}
    Qsup = {}

    def trig_ok(a, s, nu, b, Ub):
        if b not in R:
            R[b] = _at_least(inn, cx.T.all_mask, good_in & Ub, th)
            Qsup[b] = _at_least(rows_mu, cx.T.all_mask, good_mu & R[b], th)
        cands = M(a, s, nu) & Qsup[b]
        if cands.bit_count() < th:
            return False
        target = good_mu & cx.W_minus(C2, a) & R[b]
        return _count_at_least(rows_mu, cands, target, th, th)

    def check_ok(a, W):
        Rw = _at_least(inn, cx.T.all_mask, good_in & W, th)
        target = good_mu & cx.W_minus(C2, a) & Rw
        return all(_count_at_least(rows_mu, M(a, s, nu), target, th, th) for s, nu in cx.keys(a))

    return cx.lemma(name, D1, trig_ok, check_ok)


def check_available_postcondition(
    T: Tournament, family: GadgetFamily, A2: Sequence[int], k: int, t: int, profile: ConstantsProfile
) -> tuple[bool, list[dict]]:
    """Every s in S(alpha) needs tau2*k*t available out- and in-neighbours."""
    th = profile.threshold(profile.tau2, k, t, "tau2")
    bad = []
    for a in A2:
        av = available_mask(T, family, A2, a, k, t, profile)
        for s in sorted(family.gadget(a).S):
            for nu, rows in (("+", T.out_rows), ("-", T.in_rows)):
                c = (rows[s] & av).bit_count()
                if c < th:
                    bad.append({"alpha": a, "s": s, "direction": nu, "count": c, "needed": th})
    return not bad, bad
