"""Closed-form separation probabilities, bounds, and test-count planning.

A certification plan pits a target spectrum against an adversary set (all
states of Schmidt number <= r, or all states with tail measure <= E) and a
strategy. The worst-case single-test pass probability P of the adversary
determines the number of tests N = ceil(ln delta / ln P) needed to certify
at significance delta.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .operators import HermitianOperator, target_state
from .spectra import PureState, as_spectrum, e_r, fidelity_limited

__all__ = [
    "InfeasibleError",
    "AdversarySet",
    "Bounds",
    "CertificationPlan",
    "sep_prob_mes_rank",
    "sep_prob_mes_limited",
    "sep_prob_mub",
    "bounds_rank",
    "bounds_limited",
    "tests_required",
    "adversarial_state",
    "pass_prob",
    "build_plan",
    "STRATEGY_IDS",
]

STRATEGY_IDS = ("opt", "mub", "seph", "lch")

# Separation is impossible once P reaches 1; reject before taking logs.
P_ONE_GUARD = 1e-12


class InfeasibleError(ValueError):
    """The requested certification task has no separating strategy."""


@dataclass(frozen=True)
class AdversarySet:
    """States of Schmidt number <= r, optionally with tail measure <= E."""

    r: int
    E: float | None = None

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.E is not None and self.E < 0:
            raise ValueError("E must be nonnegative")

    @property
    def kind(self) -> str:
        return "schmidt_rank" if self.E is None else "limited_er"

    def validate_against(self, spectrum) -> None:
        s = as_spectrum(spectrum)
        if self.r > s.d - 1:
            raise ValueError(f"r={self.r} out of range [1, {s.d - 1}]")
        if self.E is not None and self.E >= e_r(s, self.r):
            raise InfeasibleError(
                f"E={self.E} reaches the target tail measure {e_r(s, self.r)}; "
                "the adversary set contains the target's fidelity class"
            )


class Bounds(NamedTuple):
    """Lower bound, exact homogeneous value, and local upper bound."""

    psep_lb: float
    psep_h: float
    plc_ub: float


def _check_r(r: int, d: int) -> None:
    if not 1 <= r <= d - 1:
        raise ValueError(f"r={r} out of range [1, {d - 1}]")


def sep_prob_mes_rank(d: int, r: int) -> float:
    """Separation probability of the maximally entangled state: (r+1)/(d+1)."""
    _check_r(r, d)
    return (r + 1) / (d + 1)


def sep_prob_mes_limited(d: int, r: int, E: float) -> float:
    """Maximally entangled separation probability against tail measure <= E.

    Closed form ([sqrt((d-r)E) + sqrt(r(1-E))]^2 + 1)/(d+1); reduces to
    (r+1)/(d+1) at E = 0 and tends to 1 as E approaches (d-r)/d.
    """
    _check_r(r, d)
    if not 0 <= E < (d - r) / d:
        raise InfeasibleError(f"E={E} out of range [0, {(d - r) / d})")
    return float((math.sqrt((d - r) * E) + math.sqrt(r * (1.0 - E))) ** 2 + 1.0) / (d + 1)


def sep_prob_mub(spectrum, r: int, E: float = 0.0) -> float:
    """Separation probability of the two-test unbiased-bases strategy.

    Equals (f + 1)/2 where f is the limited-tail fidelity; the strategy's
    gap of 1/2 makes the pass-probability bound tight.
    """
    s = as_spectrum(spectrum)
    _check_r(r, s.d)
    if E >= e_r(s, r):
        raise InfeasibleError(f"E={E} reaches the target tail measure")
    return (fidelity_limited(s, r, E) + 1.0) / 2.0


def bounds_rank(spectrum, r: int) -> Bounds:
    """Sandwich for the Schmidt-number-r adversary.

    psep_lb = 1 - e_r bounds every separable strategy from below, psep_h
    is the exact optimum over homogeneous separable strategies, and plc_ub
    is achieved by the homogeneous local strategy; the three are ordered
    and plc_ub <= 2 psep_lb/(1+s0) <= ... keeps the sandwich tight.
    """
    s = as_spectrum(spectrum)
    tail = e_r(s, r)
    root = math.sqrt(s.s0 * s.s1)
    return Bounds(
        psep_lb=1.0 - tail,
        psep_h=1.0 - tail / (1.0 + root),
        plc_ub=1.0 - 2.0 * tail / (2.0 + s.s0 + s.s1),
    )


def bounds_limited(spectrum, r: int, E: float) -> Bounds:
    """Sandwich for the limited-tail adversary; reduces to bounds_rank at E=0."""
    s = as_spectrum(spectrum)
    if E >= e_r(s, r):
        raise InfeasibleError(f"E={E} reaches the target tail measure")
    f = fidelity_limited(s, r, E)
    root = math.sqrt(s.s0 * s.s1)
    return Bounds(
        psep_lb=f,
        psep_h=(f + root) / (1.0 + root),
        plc_ub=(2.0 * f + s.s0 + s.s1) / (2.0 + s.s0 + s.s1),
    )


def tests_required(P: float, delta: float) -> int:
    """Minimal N with P^N <= delta, i.e. ceil(ln delta / ln P).

    The boundary is handled exactly in float arithmetic: the returned N
    satisfies P^N <= delta < P^(N-1). P within 1e-12 of 1 is rejected;
    the caller must shrink the adversary set.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < P < 1.0 - P_ONE_GUARD:
        raise InfeasibleError(f"separation probability {P} admits no finite test count")
    n = max(1, math.ceil(math.log(delta) / math.log(P)))
    while P**n > delta:
        n += 1
    while n > 1 and P ** (n - 1) <= delta:
        n -= 1
    return n


def adversarial_state(spectrum, r: int, E: float = 0.0) -> PureState:
    """Worst-case state with tail measure exactly E for the given target.

    Rescales the target's head coefficients by (1-E)/(1-E') and the tail
    by E/E'; the result attains the limited-tail fidelity bound.
    """
    s = as_spectrum(spectrum)
    _check_r(r, s.d)
    e_prime = e_r(s, r)
    if not 0 <= E < e_prime:
        raise InfeasibleError(f"E={E} out of range [0, {e_prime})")
    vals = s.values.copy()
    head = vals[:r] * (1.0 - E) / (1.0 - e_prime)
    tail = vals[r:] * (E / e_prime)
    return target_state(np.concatenate([head, tail]), s.d)


def pass_prob(op: HermitianOperator, sigma) -> float:
    """Single-test pass probability tr(Omega sigma)."""
    if isinstance(sigma, PureState):
        rho = sigma.density()
    elif isinstance(sigma, HermitianOperator):
        rho = sigma.entries
    else:
        rho = np.asarray(sigma, dtype=complex)
    if rho.shape != (op.dim, op.dim):
        raise ValueError("state dimension does not match operator")
    return float(np.real(np.trace(op.entries @ rho)))


@dataclass(frozen=True)
class CertificationPlan:
    """Target spectrum, adversary set, strategy, and resulting test count."""

    spectrum: tuple
    adversary: AdversarySet
    delta: float
    strategy_id: str
    separation_probability: float
    tests_required: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "spectrum": list(self.spectrum),
                "adversary": {"kind": self.adversary.kind, "r": self.adversary.r, "E": self.adversary.E},
                "delta": self.delta,
                "strategy": self.strategy_id,
                "separation_probability": self.separation_probability,
                "tests_required": self.tests_required,
            }
        )

    def to_csv_row(self) -> str:
        d = len(self.spectrum)
        E = 0.0 if self.adversary.E is None else self.adversary.E
        return (
            f"{d},{self.adversary.r},{E!r},{self.strategy_id},"
            f"{self.separation_probability!r},{self.tests_required}"
        )


def _is_uniform(spectrum) -> bool:
    s = as_spectrum(spectrum)
    return bool(np.max(np.abs(s.values - 1.0 / s.d)) < 1e-12)


def build_plan(spectrum, r: int, delta: float, strategy: str, E: float | None = None) -> CertificationPlan:
    """Assemble a certification plan for the given strategy.

    Strategies: ``opt`` (maximally entangled targets only), ``mub`` (two
    unbiased tests), ``seph`` (optimal homogeneous separable), ``lch``
    (homogeneous local).
    """
    s = as_spectrum(spectrum)
    adversary = AdversarySet(r=r, E=E)
    adversary.validate_against(s)
    if strategy not in STRATEGY_IDS:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGY_IDS}")
    e_val = 0.0 if E is None else E
    if strategy == "opt":
        if not _is_uniform(s):
            raise ValueError("the 'opt' strategy applies to maximally entangled targets only")
        P = sep_prob_mes_limited(s.d, r, e_val) if e_val > 0 else sep_prob_mes_rank(s.d, r)
    elif strategy == "mub":
        P = sep_prob_mub(s, r, e_val)
    elif strategy == "seph":
        P = bounds_limited(s, r, e_val).psep_h if e_val > 0 else bounds_rank(s, r).psep_h
    else:  # lch
        P = bounds_limited(s, r, e_val).plc_ub if e_val > 0 else bounds_rank(s, r).plc_ub
    n = tests_required(P, delta)
    return CertificationPlan(
        spectrum=tuple(float(x) for x in s.values),
        adversary=adversary,
        delta=float(delta),
        strategy_id=strategy,
        separation_probability=float(P),
        tests_required=n,
    )
