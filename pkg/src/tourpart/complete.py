"""Absorbing leftover vertices into the parts, and the end-to-end driver."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .assemble import build_connected_parts, group_gadgets
from .bits import iter_bits, mask_of, members
from .errors import PreconditionError, StageFailure
from .gadgets import GadgetFamily, build_gadget_family
from .profile import DESK, ConstantsProfile
from .refine import refine_available
from .tournament import Tournament, is_k_connected, k_connected_on, verify_partition

CERT_VERSION = 1


@dataclass
class PartitionCertificate:
    n: int
    k: int
    t: int
    seed: int
    profile: dict[str, Any]
    parts: list[list[int]]
    stage_log: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": CERT_VERSION,
            "n": self.n,
            "k": self.k,
            "t": self.t,
            "seed": self.seed,
            "profile": self.profile,
            "parts": self.parts,
            "stage_log": self.stage_log,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionCertificate":
        if d.get("version") != CERT_VERSION:
            raise ValueError(f"unsupported certificate version {d.get('version')!r}")
        try:
            return cls(
                int(d["n"]), int(d["k"]), int(d["t"]), int(d["seed"]), dict(d["profile"]),
                [[int(v) for v in p] for p in d["parts"]], list(d.get("stage_log", [])),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed certificate: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "PartitionCertificate":
        return cls.from_dict(json.loads(text))

    def verify(self, T: Tournament):
        if T.n != self.n:
            raise ValueError(f"certificate is for n={self.n}, tournament has n={T.n}")
        if len(self.parts) != self.t:
            raise ValueError(f"certificate lists {len(self.parts)} parts, expected t={self.t}")
        return verify_partition(T, self.parts, self.k)


# ---------------------------------------------------------------- extension


def _degree_ok(T: Tournament, u: int, part: int, k: int) -> bool:
    return (T.out_rows[u] & part).bit_count() >= k and (T.in_rows[u] & part).bit_count() >= k


def _fail(reason, detail, log):
    exc = StageFailure("extend", reason, detail)
    log.append({"stage": "extend", "round": 0, "status": "fail", "detail": {"reason": reason, **detail}})
    return exc


def extend_partition(
    T: Tournament, Z: int, Y: int, parts: Sequence[int], k: int, t: int, seed: int = 0,
    max_rounds: int = 64, profile: ConstantsProfile = DESK, check_upper: bool = True,
    log: list[dict] | None = None, label: str = "extend", stream: int = 0,
) -> list[int]:
    """Grow ``parts`` (vertex masks) by the vertices of ``Y`` and ``Z``.

    The hypotheses are verified first. Each round sends every y to a random
    part where it has k out- and k in-neighbours, then places each z (in
    ascending order) into the first part where it has k neighbours each way
    among that part and its new y vertices. The reservoir hypothesis only
    matters for placing z, so it is checked only when Z is non-empty.
    """
    log = [] if log is None else log
    parts = list(parts)
    n = T.n
    if len(parts) != t:
        raise PreconditionError("precondition", f"expected {t} parts, got {len(parts)}")
    seen = Z
    if Z & Y:
        raise _fail("hypothesis", {"bullet": "disjoint", "witness": members(Z & Y)[:5]}, log)
    for i, p in enumerate(parts):
        if p & seen:
            raise _fail("hypothesis", {"bullet": "disjoint", "part": i}, log)
        seen |= p
    if seen & Y:
        raise _fail("hypothesis", {"bullet": "disjoint", "witness": members(seen & Y)[:5]}, log)
    for i, p in enumerate(parts):
        size = p.bit_count()
        if size < 2 * k or (check_upper and size * t > n):
            raise _fail("hypothesis", {"bullet": "size", "part": i, "size": size}, log)
        if not k_connected_on(T, p, k).ok:
            raise _fail("hypothesis", {"bullet": "k-connected", "part": i}, log)
    quorum = math.ceil(3 * t / 4)
    options: dict[int, list[int]] = {}
    for y in iter_bits(Y):
        opts = [i for i, p in enumerate(parts) if _degree_ok(T, y, p, k)]
        if len(opts) < quorum:
            raise _fail("hypothesis", {"bullet": "y-spread", "witness": y, "parts": len(opts), "needed": quorum}, log)
        options[y] = opts
    if Z:
        need = profile.fraction_of(profile.extension_reservoir, n)
        for i, p in enumerate(parts):
            c = sum(1 for y in options if i in options[y])
            if c < need:
                raise _fail("hypothesis", {"bullet": "reservoir", "part": i, "count": c, "needed": need}, log)
    union = Y
    for p in parts:
        union |= p
    big = max(math.ceil(profile.leftover_factor * Z.bit_count()), math.ceil(profile.leftover_kt_factor * k * t))
    for z in iter_bits(Z):
        for nu, rows in (("+", T.out_rows), ("-", T.in_rows)):
            spread = sum(1 for p in parts if (rows[z] & p).bit_count() >= k)
            if spread < quorum and (rows[z] & union).bit_count() < big:
                raise _fail("hypothesis", {"bullet": "leftover-degree", "witness": z, "direction": nu,
                                           "spread": spread, "degree": (rows[z] & union).bit_count(),
                                           "needed": big}, log)

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(5, stream)))
    ys = sorted(options)
    stuck = None
    for r in range(max_rounds):
        picks = rng.random(len(ys))
        grown = list(parts)
        for y, x in zip(ys, picks.tolist()):
            opts = options[y]
            i = opts[int(x * len(opts))]
            grown[i] |= 1 << y
        final = list(grown)
        stuck = None
        for z in iter_bits(Z):
            for i, g in enumerate(grown):
                if _degree_ok(T, z, g, k):
                    final[i] |= 1 << z
                    break
            else:
                stuck = z
                break
        if stuck is not None:
            log.append({"stage": label, "round": r, "status": "retry", "detail": {"unassignable": stuck}})
            continue
        for i, f in enumerate(final):
            res = k_connected_on(T, f, k)
            if not res.ok:
                witness = res.witness.to_dict() if res.witness else None
                raise _fail("not-k-connected", {"part": i, "witness": witness}, log)
        log.append({"stage": label, "round": r, "status": "ok",
                    "detail": {"placed_y": len(ys), "placed_z": Z.bit_count(),
                               "sizes": [f.bit_count() for f in final]}})
        return final
    raise _fail("unassignable-vertex", {"witness": stuck, "rounds": max_rounds}, log)


# ---------------------------------------------------------------- driver


def partition_tournament(
    T: Tournament, k: int, t: int, profile: ConstantsProfile = DESK, seed: int = 0, max_rounds: int = 64
) -> PartitionCertificate:
    """Run every stage and return a certificate whose parts passed verify_partition.

    Any stage failure is raised as StageFailure with the transcript so far.
    """
    n = T.n
    if k < 1 or t < 1:
        raise PreconditionError("precondition", "k and t must be at least 1")
    if n < k + 1:
        raise PreconditionError("precondition", f"need n >= k+1, got n={n}, k={k}")
    log: list[dict] = []
    try:
        parts = _run(T, k, t, profile, seed, max_rounds, log)
    except StageFailure as exc:
        log.append({"stage": exc.stage, "round": 0, "status": "fail", "detail": {"reason": exc.reason, **exc.detail}})
        exc.transcript = log
        raise
    report = verify_partition(T, parts, k)
    if not report.valid:
        exc = StageFailure("verify", "final partition failed verification", report.to_dict())
        exc.transcript = log
        raise exc
    log.append({"stage": "verify", "round": 0, "status": "ok", "detail": {"sizes": [len(p) for p in parts]}})
    return PartitionCertificate(n, k, t, seed, profile.to_dict(), parts, log)


def _run(T, k, t, profile, seed, max_rounds, log) -> list[list[int]]:
    n = T.n
    if t == 1:
        res = is_k_connected(T, k)
        log.append({"stage": "single-part", "round": 0, "status": "ok" if res.ok else "fail", "detail": {}})
        if not res.ok:
            raise StageFailure("single-part", "tournament is not k-connected",
                               {"witness": res.witness.to_dict() if res.witness else None})
        return [list(range(n))]

    family = build_gadget_family(T, k, t, profile, seed)
    work = T
    if not family.orientation_ok:
        # connectivity is symmetric under reversal, so the parts carry over
        work = T.reversed()
        family = build_gadget_family(work, k, t, profile, seed)
        family = replace(family, reversed=True)
    log.append({"stage": "gadgets", "round": 0, "status": "ok", "detail": {
        "gadgets": len(family.gadgets), "reversed": family.reversed,
        "okay": family.okay.bit_count(), "good": family.good.bit_count(), "bad": family.bad.bit_count()}})

    refined = refine_available(work, family, family.index_set, k, t, profile, seed, max_rounds, log)
    return finish_from_refined(work, family, refined.kept, k, t, profile, seed, max_rounds, log)


def finish_from_refined(
    T: Tournament, family: GadgetFamily, A2: Sequence[int], k: int, t: int, profile: ConstantsProfile,
    seed: int = 0, max_rounds: int = 64, log: list[dict] | None = None,
) -> list[list[int]]:
    """Grouping, linking and the four extension passes, starting from a refined index set."""
    log = [] if log is None else log
    plan = group_gadgets(T, family, A2, k, t, profile, seed, max_rounds, log)
    linked, Z, _ = build_connected_parts(T, family, plan, k, t, profile, seed, max_rounds, log)
    parts = [p.members for p in linked]

    Yall = Z & family.good
    Zs = [
        Z & family.good_plus & ~family.good_minus,
        Z & family.good_minus & ~family.good_plus,
        Z & family.bad,
        Z & ~family.okay,
    ]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(6,)))
    ys = members(Yall)
    labels = rng.integers(0, 4, size=len(ys)).tolist()
    Ys = [mask_of(y for y, c in zip(ys, labels) if c == j) for j in range(4)]
    for j in range(4):
        parts = extend_partition(
            T, Zs[j], Ys[j], parts, k, t, seed=seed, stream=j + 1, max_rounds=max_rounds,
            profile=profile, check_upper=(j == 0), log=log, label=f"extend:{j + 1}",
        )
    return [members(p) for p in parts]
