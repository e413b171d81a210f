"""Schmidt-spectrum algebra for bipartite pure states.

Everything downstream (verification operators, separation probabilities,
certification plans) is a function of the Schmidt spectrum alone, so this
module owns the two canonical value types, :class:`SchmidtSpectrum` and
:class:`PureState`, together with the closed-form quantities attached to
them: the tail-sum entanglement measure, majorization, maximum overlaps,
fidelity formulas, Lipschitz constants, and the LOCC conversion
probability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SchmidtSpectrum",
    "PureState",
    "schmidt_spectrum",
    "e_r",
    "majorizes",
    "max_overlap",
    "fidelity_rank",
    "fidelity_limited",
    "lipschitz_const",
    "vidal_probability",
    "as_spectrum",
]

# Inputs whose normalization is off by at most this much are silently
# renormalized (SVD noise must not poison the closed forms downstream);
# larger deviations are rejected.
RENORM_TOL = 1e-9

# Default absolute tolerance for closed-form equality checks.
ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Nonincreasing probability vector of squared Schmidt coefficients.

    Values are sorted in nonincreasing order and renormalized to unit sum
    on construction. Sums off by more than ``RENORM_TOL`` raise
    ``ValueError``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("spectrum must contain at least one value")
        if np.any(v < -RENORM_TOL):
            raise ValueError("spectrum values must be nonnegative")
        v = np.clip(v, 0.0, None)
        total = float(v.sum())
        if abs(total - 1.0) > RENORM_TOL:
            raise ValueError(f"spectrum sums to {total!r}, expected 1 within {RENORM_TOL}")
        v = np.sort(v)[::-1] / total
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, d: int) -> "SchmidtSpectrum":
        """Spectrum of a maximally entangled state of local dimension d."""
        if d < 1:
            raise ValueError("d must be positive")
        return cls(np.full(d, 1.0 / d))

    @property
    def d(self) -> int:
        return self.values.size

    @property
    def s0(self) -> float:
        return float(self.values[0])

    @property
    def s1(self) -> float:
        """Second-largest coefficient; 0 for a length-1 spectrum."""
        return float(self.values[1]) if self.d > 1 else 0.0

    def padded(self, d: int) -> "SchmidtSpectrum":
        """Zero-pad to length d (closed forms are dimension independent)."""
        if d < self.d:
            raise ValueError("cannot pad to a shorter length")
        return SchmidtSpectrum(np.concatenate([self.values, np.zeros(d - self.d)]))

    def to_json(self) -> str:
        return json.dumps(list(self.values))

    @classmethod
    def from_json(cls, text: str) -> "SchmidtSpectrum":
        return cls(np.asarray(json.loads(text), dtype=float))

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"SchmidtSpectrum({np.array2string(self.values, precision=6)})"


def as_spectrum(spectrum) -> SchmidtSpectrum:
    """Coerce an array-like of probabilities into a SchmidtSpectrum."""
    if isinstance(spectrum, SchmidtSpectrum):
        return spectrum
    return SchmidtSpectrum(np.asarray(spectrum, dtype=float))


@dataclass(frozen=True, eq=False)
class PureState:
    """Bipartite pure state stored as its coefficient matrix.

    ``coeffs[i, k]`` is the amplitude on ``|i>|k>``. The convention
    d_A <= d_B is enforced by transposing on construction, which swaps the
    roles of the two parties but leaves every spectrum-derived quantity
    unchanged.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.size == 0:
            raise ValueError("coeffs must be a nonempty 2-D matrix")
        if c.shape[0] > c.shape[1]:
            c = c.T
        norm = float(np.linalg.norm(c))
        if abs(norm - 1.0) > RENORM_TOL:
            raise ValueError(f"coefficient matrix has norm {norm!r}, expected 1 within {RENORM_TOL}")
        c = c / norm
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def d_a(self) -> int:
        return self.coeffs.shape[0]

    @property
    def d_b(self) -> int:
        return self.coeffs.shape[1]

    @property
    def ket(self) -> np.ndarray:
        """State vector in the computational product basis, row-major."""
        return self.coeffs.ravel()

    def density(self) -> np.ndarray:
        k = self.ket
        return np.outer(k, k.conj())

    def overlap(self, other: "PureState") -> complex:
        if self.coeffs.shape != other.coeffs.shape:
            raise ValueError("states live on different dimensions")
        return complex(np.vdot(self.ket, other.ket))

    def schmidt_rank(self, tol: float = 1e-12) -> int:
        return int(np.linalg.matrix_rank(self.coeffs, tol=tol))

    def to_json(self) -> str:
        return json.dumps(
            {
                "d_a": self.d_a,
                "d_b": self.d_b,
                "re": self.coeffs.real.tolist(),
                "im": self.coeffs.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        obj = json.loads(text)
        c = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        if c.shape != (obj["d_a"], obj["d_b"]):
            raise ValueError("matrix shape does not match d_a, d_b")
        return cls(c)

    def __repr__(self) -> str:
        return f"PureState(d_a={self.d_a}, d_b={self.d_b})"


def schmidt_spectrum(state: PureState) -> SchmidtSpectrum:
    """Schmidt spectrum of a bipartite pure state.

    Returns the squared singular values of the coefficient matrix, sorted
    nonincreasing and renormalized to unit sum.
    """
    try:
        sv = np.linalg.svd(state.coeffs, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - ill-conditioned input
        raise np.linalg.LinAlgError(f"SVD failed on state coefficients: {exc}") from exc
    s = sv**2
    return SchmidtSpectrum(s / s.sum())


def _check_r(r: int, d: int) -> None:
    if not 1 <= r <= d - 1:
        raise ValueError(f"r={r} out of range [1, {d - 1}]")


def e_r(spectrum, r: int) -> float:
    """Sum of the d-r smallest Schmidt coefficients.

    Vanishes iff the Schmidt rank is at most r and is bounded above by
    (d-r)/d, with equality exactly for the maximally entangled spectrum.
    """
    s = as_spectrum(spectrum)
    _check_r(r, s.d)
    return float(s.values[r:].sum())


def majorizes(x, y, tol: float = 1e-12) -> bool:
    """True iff x majorizes y (every prefix sum of sorted x dominates y's).

    Both vectors must have equal length and equal total sum within 1e-10.
    """
    xv = np.sort(np.asarray(x, dtype=float).ravel())[::-1]
    yv = np.sort(np.asarray(y, dtype=float).ravel())[::-1]
    if xv.size != yv.size:
        raise ValueError("majorization requires equal-length vectors")
    if abs(xv.sum() - yv.sum()) > 1e-10:
        raise ValueError("majorization requires equal total sums")
    return bool(np.all(np.cumsum(xv) >= np.cumsum(yv) - tol))


def max_overlap(a, b) -> float:
    """Maximum overlap |<Psi|Upsilon>| over states with the given spectra.

    Equals sum_j sqrt(s_j t_j) with the shorter spectrum zero-padded;
    reaches 1 iff the spectra coincide.
    """
    sa = as_spectrum(a)
    sb = as_spectrum(b)
    d = max(sa.d, sb.d)
    va = sa.padded(d).values
    vb = sb.padded(d).values
    return float(np.sqrt(va * vb).sum())


def fidelity_rank(spectrum, r: int) -> float:
    """Maximum fidelity with states of Schmidt number at most r: 1 - e_r."""
    return 1.0 - e_r(spectrum, r)


def fidelity_limited(spectrum, r: int, E: float) -> float:
    """Maximum fidelity with states whose tail measure is at most E.

    For E below the state's own tail value E' this is
    [sqrt(E'E) + sqrt((1-E')(1-E))]^2; beyond E' the set contains the
    state itself and the fidelity saturates at 1. Nondecreasing and
    concave in E.
    """
    if E < 0:
        raise ValueError("E must be nonnegative")
    e_prime = e_r(spectrum, r)
    if E >= e_prime:
        return 1.0
    return float((np.sqrt(e_prime * E) + np.sqrt((1.0 - e_prime) * (1.0 - E))) ** 2)


def lipschitz_const(r: int, d: int) -> float:
    """Lipschitz constant of the tail measure e_r on unit state vectors."""
    _check_r(r, d)
    if r <= d / 2:
        return 1.0
    return float(2.0 * np.sqrt(r * (d - r)) / d)


def vidal_probability(source, target, zero_tol: float = 1e-12) -> float:
    """Maximum LOCC conversion probability from source to target spectrum.

    Evaluates min_r e_r(source)/e_r(target) over all valid r after
    zero-padding to a common length. Terms with e_r(target) = 0 are
    excluded: they contribute +inf when e_r(source) > 0 and are skipped
    when both vanish. Returns 1 when every term is excluded, capped at 1
    otherwise (conversion is deterministic iff source is majorized by
    target).
    """
    sa = as_spectrum(source)
    sb = as_spectrum(target)
    d = max(sa.d, sb.d)
    va = sa.padded(d).values
    vb = sb.padded(d).values
    ratios = []
    for r in range(1, d):
        es = float(va[r:].sum())
        et = float(vb[r:].sum())
        if et <= zero_tol:
            continue  # +inf when es > 0, vacuous when es == 0
        ratios.append(es / et)
    if not ratios:
        return 1.0
    return min(1.0, min(ratios))
