"""Verification operators, test decompositions, spectral gaps, and PPT checks.

All constructors here produce operators Omega with 0 <= Omega <= 1 that fix
a target bipartite pure state, Omega|Psi> = |Psi>. The second-largest
eigenvalue beta(Omega) controls how fast repeated tests separate the target
from everything else; nu = 1 - beta is the spectral gap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .spectra import PureState, SchmidtSpectrum, as_spectrum

__all__ = [
    "HermitianOperator",
    "Strategy",
    "SpectralGap",
    "target_state",
    "omega_sep",
    "omega_sep_h",
    "omega_lc_h",
    "omega_mub",
    "omega_opt",
    "two_design_strategy",
    "mub_bases",
    "spectral_gap",
    "partial_transpose",
    "is_ppt",
]

HERM_TOL = 1e-10
EIG_TOL = 1e-9
FIX_TOL = 1e-9
PPT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix, checked entrywise on construction."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > HERM_TOL:
            raise ValueError(f"matrix deviates from Hermitian by {dev!r}")
        m = (m + m.conj().T) / 2.0
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues in nonincreasing order."""
        return np.linalg.eigvalsh(self.entries)[::-1]

    def is_verification_operator(self, target: PureState | None = None, atol: float = EIG_TOL) -> bool:
        """Check 0 <= Omega <= 1 and, if given, Omega|Psi> = |Psi>."""
        ev = self.eigenvalues()
        if ev[-1] < -atol or ev[0] > 1.0 + atol:
            return False
        if target is not None:
            k = target.ket
            if k.size != self.dim:
                return False
            if float(np.linalg.norm(self.entries @ k - k)) > FIX_TOL:
                return False
        return True

    def expectation(self, vec: np.ndarray) -> float:
        v = np.asarray(vec, dtype=complex).ravel()
        return float(np.real(np.vdot(v, self.entries @ v)))

    def to_json(self) -> str:
        return json.dumps(
            {"dim": self.dim, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "HermitianOperator":
        obj = json.loads(text)
        m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        if m.shape != (obj["dim"], obj["dim"]):
            raise ValueError("matrix shape does not match dim")
        return cls(m)

    def to_bytes(self) -> bytes:
        """Row-major little-endian float64 (re, im) pairs."""
        return np.ascontiguousarray(self.entries, dtype="<c16").tobytes()

    @classmethod
    def from_bytes(cls, dim: int, buf: bytes) -> "HermitianOperator":
        m = np.frombuffer(buf, dtype="<c16").reshape(dim, dim)
        return cls(m)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


class SpectralGap(NamedTuple):
    """Second-largest eigenvalue beta and spectral gap nu = 1 - beta."""

    beta: float
    nu: float


@dataclass(frozen=True, eq=False)
class Strategy:
    """Weighted list of tests realizing a verification operator.

    Every test must fix the target and have eigenvalues in [0, 1]. Tests
    built from orthonormal families are projectors and are additionally
    checked for idempotency; set ``projective=False`` for operator-valued
    tests that fix the target without being projectors.
    """

    tests: tuple
    target: PureState
    projective: bool = True
    _operator: HermitianOperator = field(init=False, repr=False, default=None)

    def __post_init__(self):
        tests = tuple((float(w), op) for w, op in self.tests)
        if not tests:
            raise ValueError("strategy needs at least one test")
        weights = np.array([w for w, _ in tests])
        if np.any(weights < 0):
            raise ValueError("test weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("test weights must sum to 1")
        k = self.target.ket
        total = np.zeros((k.size, k.size), dtype=complex)
        for w, op in tests:
            if op.dim != k.size:
                raise ValueError("test dimension does not match target")
            if float(np.linalg.norm(op.entries @ k - k)) > FIX_TOL:
                raise ValueError("test does not fix the target state")
            if not op.is_verification_operator():
                raise ValueError("test eigenvalues leave [0, 1]")
            if self.projective:
                dev = float(np.max(np.abs(op.entries @ op.entries - op.entries)))
                if dev > EIG_TOL:
                    raise ValueError(f"test deviates from a projector by {dev!r}")
            total += w * op.entries
        object.__setattr__(self, "tests", tests)
        object.__setattr__(self, "_operator", HermitianOperator(total))

    @property
    def operator(self) -> HermitianOperator:
        return self._operator

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.tests])

    def gap(self) -> SpectralGap:
        return spectral_gap(self.operator, self.target)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.operator.dim,
                "projective": self.projective,
                "target": json.loads(self.target.to_json()),
                "tests": [
                    {"weight": w, "re": op.entries.real.tolist(), "im": op.entries.imag.tolist()}
                    for w, op in self.tests
                ],
            }
        )


def target_state(spectrum, d_b: int | None = None) -> PureState:
    """Canonical target sum_j sqrt(s_j)|jj>, zero-padded to d x d_b."""
    s = as_spectrum(spectrum)
    d = s.d
    if d_b is None:
        d_b = d
    if d_b < d:
        raise ValueError(f"d_b={d_b} must be at least the spectrum length {d}")
    c = np.zeros((d, d_b), dtype=complex)
    c[np.arange(d), np.arange(d)] = np.sqrt(s.values)
    return PureState(c)


def _homogeneous(psi: np.ndarray, beta: float) -> HermitianOperator:
    d2 = psi.size
    proj = np.outer(psi, psi.conj())
    return HermitianOperator(proj + beta * (np.eye(d2) - proj))


def omega_sep(spectrum) -> HermitianOperator:
    """Separable strategy |Psi><Psi| + sum_{j!=k} sqrt(s_j s_k)|jk><jk|.

    Acts on d x d (square construction); its second-largest eigenvalue is
    sqrt(s0 s1).
    """
    s = as_spectrum(spectrum)
    d = s.d
    psi = target_state(s, d).ket
    m = np.outer(psi, psi.conj())
    root = np.sqrt(s.values)
    cross = np.outer(root, root)  # sqrt(s_j s_k)
    diag = np.zeros(d * d)
    for j in range(d):
        for k in range(d):
            if j != k:
                diag[j * d + k] = cross[j, k]
    return HermitianOperator(m + np.diag(diag))


def omega_sep_h(spectrum) -> HermitianOperator:
    """Homogeneous separable strategy with beta = sqrt(s0 s1)/(1 + sqrt(s0 s1))."""
    s = as_spectrum(spectrum)
    root = np.sqrt(s.s0 * s.s1)
    beta = root / (1.0 + root)
    return _homogeneous(target_state(s, s.d).ket, beta)


def omega_lc_h(spectrum) -> HermitianOperator:
    """Homogeneous local strategy with beta = (s0 + s1)/(2 + s0 + s1)."""
    s = as_spectrum(spectrum)
    beta = (s.s0 + s.s1) / (2.0 + s.s0 + s.s1)
    return _homogeneous(target_state(s, s.d).ket, beta)


def omega_opt(d: int) -> HermitianOperator:
    """Optimal strategy for the maximally entangled state: beta = 1/(d+1)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    psi = target_state(SchmidtSpectrum.uniform(d), d).ket
    return _homogeneous(psi, 1.0 / (d + 1))


def _fourier_basis(d: int) -> np.ndarray:
    """Columns u_j with u_j[k] = omega^{jk}/sqrt(d)."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d).T / np.sqrt(d)


def omega_mub(spectrum) -> Strategy:
    """Two-test strategy from a pair of mutually unbiased local bases.

    The first test projects onto span{|jj>}; the second uses the Fourier
    basis on one side and its image under M = sqrt(d) diag(sqrt(s_j)) on
    the conjugated vectors on the other. Both tests fix the target and the
    resulting operator has beta = nu = 1/2.
    """
    s = as_spectrum(spectrum)
    d = s.d
    target = target_state(s, d)

    pi1 = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        idx = j * d + j
        pi1[idx, idx] = 1.0

    u = _fourier_basis(d)
    m = np.sqrt(d) * np.diag(np.sqrt(s.values))
    pi2 = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        v_j = m @ u[:, j].conj()
        w = np.kron(u[:, j], v_j)
        pi2 += np.outer(w, w.conj())

    tests = ((0.5, HermitianOperator(pi1)), (0.5, HermitianOperator(pi2)))
    return Strategy(tests=tests, target=target)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def mub_bases(d: int) -> list[np.ndarray]:
    """Complete set of d+1 mutually unbiased bases for prime d.

    Each basis is returned as a d x d array with orthonormal columns. For
    d = 2 the three bases are the computational, +/-, and circular bases;
    for odd primes the computational basis is joined by the d bases with
    vectors omega^{a k^2 + j k}/sqrt(d) (eigenbases of the shift-phase
    operators), which is unbiased because quadratic Gauss sums have
    modulus sqrt(d).
    """
    if not _is_prime(d):
        raise ValueError(f"complete MUB construction requires prime d, got {d}")
    comp = np.eye(d, dtype=complex)
    if d == 2:
        plus = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        circ = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
        return [comp, plus, circ]
    k = np.arange(d)
    bases = [comp]
    for a in range(d):
        cols = np.empty((d, d), dtype=complex)
        for j in range(d):
            phase = (a * k * k + j * k) % d
            cols[:, j] = np.exp(2j * np.pi * phase / d) / np.sqrt(d)
        bases.append(cols)
    return bases


def two_design_strategy(d: int) -> Strategy:
    """Conjugate-basis tests from a complete MUB set, one per basis.

    The d+1 tests Pi(B) = sum_{psi in B} |psi><psi| (x) |psi*><psi*| with
    uniform weights average to the optimal maximally entangled strategy;
    requires prime d.
    """
    bases = mub_bases(d)
    target = target_state(SchmidtSpectrum.uniform(d), d)
    weight = 1.0 / len(bases)
    tests = []
    for basis in bases:
        pi = np.zeros((d * d, d * d), dtype=complex)
        for j in range(d):
            psi = basis[:, j]
            w = np.kron(psi, psi.conj())
            pi += np.outer(w, w.conj())
        tests.append((weight, HermitianOperator(pi)))
    return Strategy(tests=tuple(tests), target=target)


def spectral_gap(op: HermitianOperator, target: PureState) -> SpectralGap:
    """Second-largest eigenvalue and spectral gap of a verification operator.

    Raises if the operator does not fix the target, which signals an
    invalid verification operator rather than a numerical issue.
    """
    k = target.ket
    if k.size != op.dim:
        raise ValueError("target dimension does not match operator")
    dev = float(np.linalg.norm(op.entries @ k - k))
    if dev > 1e-8:
        raise ValueError(f"operator does not fix the target (residual {dev!r})")
    ev = op.eigenvalues()
    beta = float(ev[1]) if ev.size > 1 else 0.0
    return SpectralGap(beta=beta, nu=1.0 - beta)


def partial_transpose(op: HermitianOperator, dims: tuple[int, int]) -> HermitianOperator:
    """Partial transpose on the second party: (jk),(lm) -> (jm),(lk)."""
    d_a, d_b = dims
    if d_a * d_b != op.dim:
        raise ValueError(f"dims {dims} incompatible with operator dimension {op.dim}")
    w = op.entries.reshape(d_a, d_b, d_a, d_b)
    return HermitianOperator(w.transpose(0, 3, 2, 1).reshape(op.dim, op.dim))


def is_ppt(op: HermitianOperator, dims: tuple[int, int]) -> bool:
    """True iff the partial transpose has no eigenvalue below -1e-9."""
    ev = partial_transpose(op, dims).eigenvalues()
    return bool(ev[-1] >= -PPT_TOL)
