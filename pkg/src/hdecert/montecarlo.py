"""Haar-random ensembles and stochastic simulation of the test protocol.

Sampling is reproducible and scheduling independent: sample index i always
draws from the stream spawned as (seed, i), so chunked or threaded
evaluation returns bit-identical statistics.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .operators import Strategy
from .spectra import PureState

__all__ = [
    "EnsembleStats",
    "ProtocolTrace",
    "haar_state",
    "ensemble_stats",
    "tail_check",
    "simulate_protocol",
    "sample_rng",
    "HIST_BINS",
    "DEFAULT_EPSILONS",
    "HIST_QUANTITIES",
]

HIST_BINS = 60
DEFAULT_EPSILONS = (0.0, 0.05, 0.1, 0.2, 0.3)
HIST_QUANTITIES = ("psep_lb", "psep_h", "plc_ub")

_CHUNK = 256


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index`` under a master seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def haar_state(d_a: int, d_b: int, rng: np.random.Generator) -> PureState:
    """Haar-random bipartite pure state.

    Independent standard complex Gaussian entries normalized to unit
    Frobenius norm; the distribution is invariant under local (and
    global) unitaries.
    """
    z = rng.standard_normal((d_a, d_b)) + 1j * rng.standard_normal((d_a, d_b))
    return PureState(z / np.linalg.norm(z))


@dataclass(frozen=True)
class EnsembleStats:
    """Separation-probability statistics over a Haar ensemble."""

    d_a: int
    d_b: int
    r: int
    samples: int
    seed: int
    mean_psep_lb: float
    mean_psep_h: float
    mean_plc_ub: float
    mean_u_r: float
    mean_s0: float
    bin_edges: np.ndarray
    histograms: dict
    tail_fractions: dict

    @property
    def mes_value(self) -> float:
        """Separation probability of the maximally entangled state, (r+1)/(d+1)."""
        d = min(self.d_a, self.d_b)
        return (self.r + 1) / (d + 1)


def _bound_arrays(spectra: np.ndarray, r: int) -> dict:
    """Vectorized sandwich quantities from rows of sorted spectra."""
    tail = spectra[:, r:].sum(axis=1)
    s0 = spectra[:, 0]
    s1 = spectra[:, 1] if spectra.shape[1] > 1 else np.zeros_like(s0)
    root = np.sqrt(s0 * s1)
    return {
        "psep_lb": 1.0 - tail,
        "psep_h": 1.0 - tail / (1.0 + root),
        "plc_ub": 1.0 - 2.0 * tail / (2.0 + s0 + s1),
        "u_r": 1.0 - tail / (1.0 + s0),
        "s0": s0,
    }


def _chunk_spectra(d_a: int, d_b: int, seed: int, start: int, stop: int) -> np.ndarray:
    mats = np.empty((stop - start, d_a, d_b), dtype=complex)
    for i in range(start, stop):
        rng = sample_rng(seed, i)
        z = rng.standard_normal((d_a, d_b)) + 1j * rng.standard_normal((d_a, d_b))
        mats[i - start] = z / np.linalg.norm(z)
    sv = np.linalg.svd(mats, compute_uv=False)
    s = sv**2
    return s / s.sum(axis=1, keepdims=True)


def _all_spectra(d_a: int, d_b: int, samples: int, seed: int, threads: int) -> np.ndarray:
    ranges = [(start, min(start + _CHUNK, samples)) for start in range(0, samples, _CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda ab: _chunk_spectra(d_a, d_b, seed, *ab), ranges))
    else:
        chunks = [_chunk_spectra(d_a, d_b, seed, *ab) for ab in ranges]
    return np.concatenate(chunks, axis=0)


def ensemble_stats(
    d: int,
    r: int,
    samples: int = 10_000,
    seed: int = 0,
    d_b: int | None = None,
    epsilons=DEFAULT_EPSILONS,
    threads: int = 1,
) -> EnsembleStats:
    """Separation-probability statistics over Haar-random pure states.

    Computes the sandwich bounds per sample, their means, 60-bin
    histograms over [0, 1], and the fraction of samples whose local upper
    bound exceeds 4(r+1)/(d+1) + epsilon for each requested epsilon.
    """
    if d_b is None:
        d_b = d
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if not 1 <= r <= min(d, d_b) - 1:
        raise ValueError(f"r={r} out of range [1, {min(d, d_b) - 1}]")
    spectra = _all_spectra(d, d_b, samples, seed, threads)
    arrays = _bound_arrays(spectra, r)

    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    histograms = {
        name: np.histogram(arrays[name], bins=edges)[0] for name in HIST_QUANTITIES
    }
    threshold = 4.0 * (r + 1) / (min(d, d_b) + 1)
    tail_fractions = {
        float(eps): float(np.mean(arrays["plc_ub"] >= threshold + eps)) for eps in epsilons
    }
    return EnsembleStats(
        d_a=d,
        d_b=d_b,
        r=r,
        samples=samples,
        seed=seed,
        mean_psep_lb=float(arrays["psep_lb"].mean()),
        mean_psep_h=float(arrays["psep_h"].mean()),
        mean_plc_ub=float(arrays["plc_ub"].mean()),
        mean_u_r=float(arrays["u_r"].mean()),
        mean_s0=float(arrays["s0"].mean()),
        bin_edges=edges,
        histograms=histograms,
        tail_fractions=tail_fractions,
    )


def tail_check(d: int, r: int, epsilons, samples: int = 10_000, seed: int = 0) -> dict:
    """Empirical concentration tail against the 2 exp(-D eps^2 / 50 pi) bound.

    Returns {eps: (empirical_fraction, bound)}; the bound is loose at desk
    scale, so the empirical fraction should sit far below it.
    """
    stats = ensemble_stats(d, r, samples=samples, seed=seed, epsilons=tuple(epsilons))
    big_d = d * d
    out = {}
    for eps in epsilons:
        bound = 2.0 * math.exp(-big_d * eps**2 / (50.0 * math.pi))
        out[float(eps)] = (stats.tail_fractions[float(eps)], bound)
    return out


@dataclass(frozen=True)
class ProtocolTrace:
    """Outcome record of a simulated certification run (pass = 1)."""

    outcomes: np.ndarray
    n_tests: int
    strategy_id: str
    true_state: str
    seed: int | None

    def __post_init__(self):
        out = np.asarray(self.outcomes, dtype=np.uint8)
        if out.size != self.n_tests:
            raise ValueError("trace length does not match n_tests")
        out.setflags(write=False)
        object.__setattr__(self, "outcomes", out)

    @property
    def all_passed(self) -> bool:
        return bool(self.outcomes.all())

    @property
    def pass_rate(self) -> float:
        return float(self.outcomes.mean())


def simulate_protocol(
    strategy: Strategy,
    true_state,
    n: int,
    rng: np.random.Generator | int,
    strategy_id: str = "strategy",
    state_label: str = "state",
) -> ProtocolTrace:
    """Simulate n certification rounds against a fixed produced state.

    Each round draws test l with probability p_l and passes with
    probability tr(Pi_l sigma).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    gen = np.random.default_rng(rng) if seed is not None else rng
    if isinstance(true_state, PureState):
        rho = true_state.density()
    else:
        rho = np.asarray(true_state, dtype=complex)
    weights = strategy.weights
    pass_probs = np.array(
        [float(np.real(np.trace(op.entries @ rho))) for _, op in strategy.tests]
    )
    pass_probs = np.clip(pass_probs, 0.0, 1.0)
    picks = gen.choice(len(weights), size=n, p=weights / weights.sum())
    outcomes = (gen.random(n) < pass_probs[picks]).astype(np.uint8)
    return ProtocolTrace(
        outcomes=outcomes,
        n_tests=n,
        strategy_id=strategy_id,
        true_state=state_label,
        seed=seed,
    )
