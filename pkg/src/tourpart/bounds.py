"""Concentration-bound calculators and Monte Carlo checks of them.

Bounds are carried in log space so that paper-scale exponents such as
exp(-8*10^4) stay representable; ``bound`` is the (possibly underflowed)
probability and ``log_bound`` its natural logarithm.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class BoundResult:
    bound: float
    log_bound: float
    threshold: float

    def to_dict(self) -> dict:
        return {"version": 1, "bound": self.bound, "log_bound": self.log_bound, "threshold": self.threshold}


def _result(log_bound: float, threshold: float) -> BoundResult:
    log_bound = min(0.0, log_bound)
    return BoundResult(math.exp(log_bound), log_bound, threshold)


def hoeffding_bound(eta1: float, eta2: float, ell: float = 1.0) -> BoundResult:
    """Failure probability exp(-eta1/(8*eta2)) for the event sum < eta2*ell.

    Applies to independent X_j taking values 0 and m_j <= eta2*ell, each
    m_j with probability at least 1/2, where the m_j sum to at least eta1*ell.
    """
    if not eta1 > 4 * eta2 > 0:
        raise PreconditionError("precondition-violation", f"need eta1 > 4*eta2 > 0, got eta1={eta1}, eta2={eta2}")
    if ell <= 0:
        raise PreconditionError("precondition-violation", "ell must be positive")
    return _result(-eta1 / (8 * eta2), eta2 * ell)


def markov_bound(eta: float, r: int) -> BoundResult:
    """Sum of r indicators, each 1 with probability >= 1 - eta^2, falls below (1-eta)r with probability <= eta."""
    if not 0 < eta < 1:
        raise PreconditionError("precondition-violation", f"need 0 < eta < 1, got {eta}")
    if r < 0:
        raise PreconditionError("precondition-violation", "r must be non-negative")
    if r == 0:
        # the empty sum always meets the threshold 0
        return BoundResult(0.0, -math.inf, 0.0)
    return _result(math.log(eta), (1 - eta) * r)


def chernoff_bound(mu: float, delta: float, tail: str) -> BoundResult:
    if mu < 0:
        raise PreconditionError("precondition-violation", "mu must be non-negative")
    if not 0 <= delta <= 1:
        raise PreconditionError("precondition-violation", f"need 0 <= delta <= 1, got {delta}")
    if tail == "lower":
        return _result(-delta * delta * mu / 2, (1 - delta) * mu)
    if tail == "upper":
        return _result(-delta * delta * mu / 3, (1 + delta) * mu)
    raise PreconditionError("precondition-violation", f"tail must be 'lower' or 'upper', got {tail!r}")


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class HoeffdingScenario:
    eta1: float
    eta2: float
    values: tuple[float, ...]
    p: float = 0.5
    ell: float = 1.0

    def check(self) -> None:
        cap = self.eta2 * self.ell
        if any(m < 0 or m > cap for m in self.values):
            raise PreconditionError("precondition-violation", "every value must lie in [0, eta2*ell]")
        if sum(self.values) < self.eta1 * self.ell:
            raise PreconditionError("precondition-violation", "values must sum to at least eta1*ell")
        if self.p < 0.5:
            raise PreconditionError("precondition-violation", "success probability must be at least 1/2")

    def bound(self) -> BoundResult:
        return hoeffding_bound(self.eta1, self.eta2, self.ell)

    def failures(self, rng: np.random.Generator, trials: int) -> np.ndarray:
        total = np.zeros(trials)
        for m, c in sorted(Counter(self.values).items()):
            total += m * rng.binomial(c, self.p, size=trials)
        return total < self.eta2 * self.ell


@dataclass(frozen=True)
class MarkovScenario:
    eta: float
    r: int
    p: float

    def check(self) -> None:
        if self.p < 1 - self.eta**2:
            raise PreconditionError("precondition-violation", "each indicator needs probability >= 1 - eta^2")

    def bound(self) -> BoundResult:
        return markov_bound(self.eta, self.r)

    def failures(self, rng, trials):
        return rng.binomial(self.r, self.p, size=trials) < (1 - self.eta) * self.r


@dataclass(frozen=True)
class ChernoffScenario:
    n: int
    p: float
    delta: float
    tail: str

    def check(self) -> None:
        if not 0 <= self.p <= 1:
            raise PreconditionError("precondition-violation", "p must lie in [0, 1]")

    def bound(self) -> BoundResult:
        return chernoff_bound(self.n * self.p, self.delta, self.tail)

    def failures(self, rng, trials):
        x = rng.binomial(self.n, self.p, size=trials)
        th = self.bound().threshold
        return x <= th if self.tail == "lower" else x >= th


Scenario = Union[HoeffdingScenario, MarkovScenario, ChernoffScenario]


@dataclass(frozen=True)
class MonteCarloResult:
    frequency: float
    failures: int
    trials: int
    bound: float
    sigma: float

    @property
    def within_three_sigma(self) -> bool:
        return self.frequency <= self.bound + 3 * self.sigma

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "frequency": self.frequency,
            "failures": self.failures,
            "trials": self.trials,
            "bound": self.bound,
            "sigma": self.sigma,
            "within_three_sigma": self.within_three_sigma,
        }


def monte_carlo_validate(scenario: Scenario, trials: int, seed: int = 0) -> MonteCarloResult:
    """Empirical frequency of the bounded failure event; sigma is the binomial sd at the bound."""
    if trials < 1:
        raise PreconditionError("precondition-violation", "trials must be at least 1")
    scenario.check()
    rng = np.random.default_rng(seed)
    fails = int(np.count_nonzero(scenario.failures(rng, trials)))
    b = scenario.bound().bound
    sigma = math.sqrt(b * (1 - b) / trials)
    return MonteCarloResult(fails / trials, fails, trials, b, sigma)


def standard_scenarios() -> list[tuple[str, Scenario]]:
    """Nine parameterisations covering every bound and both Chernoff tails."""
    return [
        ("hoeffding-equal-r100", HoeffdingScenario(8.0, 1.0, (0.1,) * 100, 0.5, 1.0)),
        ("hoeffding-mixed", HoeffdingScenario(5.0, 1.0, (1.0,) * 3 + (0.25,) * 12 + (0.1,) * 10, 0.5, 1.0)),
        ("hoeffding-ell10", HoeffdingScenario(12.0, 2.0, (20.0,) * 8 + (5.0,) * 10, 0.6, 10.0)),
        ("markov-0.1", MarkovScenario(0.1, 1000, 0.99)),
        ("markov-0.5", MarkovScenario(0.5, 10, 0.75)),
        ("chernoff-lower-50", ChernoffScenario(100, 0.5, 0.5, "lower")),
        ("chernoff-upper-50", ChernoffScenario(100, 0.5, 0.5, "upper")),
        ("chernoff-lower-10", ChernoffScenario(40, 0.25, 0.8, "lower")),
        ("chernoff-upper-10", ChernoffScenario(40, 0.25, 0.8, "upper")),
    ]
