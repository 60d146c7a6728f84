"""Runtime values for the construction's constants.

Two presets ship: ``DESK`` (small values that let the stages run on
tournaments with a few thousand vertices) and ``PAPER`` (the asymptotic
values, useful only for bookkeeping since they exceed any real input).
All real-valued constants are exact fractions so derived thresholds never
depend on float rounding.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

_FRACTION_FIELDS = (
    "tau1",
    "tau2",
    "tau3",
    "separation",
    "bad_degree_factor",
    "good_degree_factor",
    "class_reservoir",
    "block_reservoir",
    "part_reservoir",
    "extension_reservoir",
    "leftover_factor",
    "leftover_kt_factor",
)


def _frac(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


@dataclass(frozen=True)
class ConstantsProfile:
    name: str
    rho: int
    sigma1: int
    sigma2: int
    sigma3: int
    tau1: Fraction
    tau2: Fraction
    tau3: Fraction
    # factor by which each constant in tau1 >> tau2 >> tau3 >> max(rho, sigma) must exceed the next
    separation: Fraction
    # degree multipliers in the classification checks (large-degree and good-neighbour bounds)
    bad_degree_factor: Fraction
    good_degree_factor: Fraction
    # reservoir sizes as fractions of n for grouping, blocks, parts and extension
    class_reservoir: Fraction = Fraction(1, 4)
    block_reservoir: Fraction = Fraction(1, 10)
    part_reservoir: Fraction = Fraction(1, 100)
    extension_reservoir: Fraction = Fraction(1, 1000)
    # leftover vertices need max(leftover_factor*|Z|, leftover_kt_factor*k*t) neighbours
    leftover_factor: Fraction = Fraction(10**10)
    leftover_kt_factor: Fraction = Fraction(100)

    def __post_init__(self):
        for name in _FRACTION_FIELDS:
            object.__setattr__(self, name, _frac(getattr(self, name)))
        for name in ("rho", "sigma1", "sigma2", "sigma3"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("tau1", "tau2", "tau3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    # derived values

    @property
    def phi0(self) -> Fraction:
        return self.tau1 / 4

    @property
    def phi1(self) -> Fraction:
        return self.phi0 / (2**6 * self.rho)

    @property
    def phi2(self) -> Fraction:
        return self.phi1 / (2**14 * self.rho**2)

    @property
    def phi3(self) -> Fraction:
        return self.phi2 / (2**14 * self.rho**2)

    @property
    def phi(self) -> int:
        return 16 * self.sigma3

    @property
    def dominating_cap(self) -> int:
        return self.rho // 10

    def gadget_count(self, k: int, t: int) -> int:
        return self.sigma1 * k * t

    @property
    def paper_faithful(self) -> bool:
        sep = self.separation
        return (
            self.rho == 10**4
            and self.sigma1 == 10**60
            and self.sigma2 == 10**4
            and self.sigma3 == 10
            and self.tau1 >= sep * self.tau2
            and self.tau2 >= sep * self.tau3
            and self.tau3 >= sep * max(self.rho, self.sigma1, self.sigma2, self.sigma3)
        )

    def warnings(self) -> list[str]:
        """Inequalities between constants that the construction relies on."""
        out = []
        sep = self.separation
        big = max(self.rho, self.sigma1, self.sigma2, self.sigma3)
        if self.tau1 < sep * self.tau2:
            out.append(f"tau1 >> tau2 fails at separation {sep}")
        if self.tau2 < sep * self.tau3:
            out.append(f"tau2 >> tau3 fails at separation {sep}")
        if self.tau3 < sep * big:
            out.append(f"tau3 >> max(rho, sigma) fails at separation {sep}")
        if self.phi3 < self.tau2:
            out.append("phi3 >= tau2 fails")
        if self.tau2 < 2 * self.rho * self.sigma1:
            out.append("tau2 >= 2*rho*sigma1 fails")
        if self.tau1 < self.rho * self.sigma1:
            out.append("tau1 >= rho*sigma1 fails (minimum degree too small for the path system)")
        if self.dominating_cap < 1:
            out.append("rho // 10 == 0: dominating sequences degenerate to single hubs")
        elif 2 ** Fraction(self.dominating_cap) < self.bad_degree_factor * self.sigma1:
            out.append("2^(rho/10) >= bad_degree_factor * sigma1 fails")
        # refinement halves the index set about five times; grouping then needs
        # phi*t classes of 10k indices each
        if self.sigma1 < 2**5 * max(self.sigma2, 10 * self.phi):
            out.append("sigma1 too small for refinement and grouping to leave enough gadgets")
        return out

    def threshold(self, value: Fraction, k: int, t: int, what: str = "") -> int:
        """Integer count threshold ceil(value*k*t), clamped to at least 1."""
        raw = math.ceil(_frac(value) * k * t)
        if raw < 1:
            log.warning("threshold %s = %s*kt rounds below 1; clamped to 1", what or "", value)
            return 1
        return raw

    def fraction_of(self, frac: Fraction, n: int) -> int:
        """ceil(frac*n), at least 1 for positive n."""
        return max(1 if n else 0, math.ceil(_frac(frac) * n))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for name in _FRACTION_FIELDS:
            v = getattr(self, name)
            d[name] = int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ConstantsProfile":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown profile fields: {sorted(extra)}")
        return cls(**d)

    def with_changes(self, **kw) -> "ConstantsProfile":
        return replace(self, **kw)


DESK = ConstantsProfile(
    name="desk",
    rho=6,
    sigma1=64,
    sigma2=8,
    sigma3=2,
    tau1=Fraction(32),
    tau2=Fraction(8),
    tau3=Fraction(2),
    separation=Fraction(2),
    bad_degree_factor=Fraction(8),
    good_degree_factor=Fraction(4),
    leftover_factor=Fraction(2),
    leftover_kt_factor=Fraction(4),
)

PAPER = ConstantsProfile(
    name="paper",
    rho=10**4,
    sigma1=10**60,
    sigma2=10**4,
    sigma3=10,
    tau1=Fraction(10**100),
    tau2=Fraction(10**66),
    tau3=Fraction(10**63),
    separation=Fraction(10**3),
    bad_degree_factor=Fraction(10**12),
    good_degree_factor=Fraction(10**11),
)

PRESETS = {"desk": DESK, "paper": PAPER}


def load_profile(spec: str | Path) -> ConstantsProfile:
    """A preset name or a path to a JSON profile."""
    key = str(spec)
    if key in PRESETS:
        return PRESETS[key]
    with open(spec, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return ConstantsProfile.from_dict(data)
