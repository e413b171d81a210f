"""Brute-force seesaw maximization of tr(Omega sigma) over constrained states.

These optimizers are deliberately independent of the closed forms they
validate: product states and bounded-Schmidt-rank states are handled by
alternating exact subspace maximizations (each step solves a small
Hermitian eigenproblem, so the objective never decreases), and the
limited-tail set by alternating basis updates with an exact constrained
spectrum solve. All results are certified lower bounds on the true
maximum; multi-restart with per-restart seeded streams keeps runs
deterministic regardless of scheduling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .operators import HermitianOperator
from .spectra import PureState, schmidt_spectrum

__all__ = [
    "OracleConfig",
    "OracleResult",
    "max_product",
    "max_rank_r",
    "max_limited",
    "max_product_grid_2q",
]


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 32
    grid_points: int = 64
    max_iterations: int = 300
    convergence_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")


@dataclass(frozen=True)
class OracleResult:
    """Best objective found; a lower bound on the true maximum."""

    value: float
    witness: PureState
    converged: bool
    iterations: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "value": self.value,
                "converged": self.converged,
                "iterations": self.iterations,
                "witness_spectrum": list(schmidt_spectrum(self.witness).values),
            }
        )


def _restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _assert_ascent(prev: float, new: float) -> None:
    # Exact subspace maximization can only gain; anything beyond
    # eigensolver noise indicates a bug.
    if new < prev - 1e-10:
        raise RuntimeError(f"seesaw objective decreased from {prev!r} to {new!r}")


def _contract_bob(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Alice-side matrix of tr[Omega (rho_A x |b><b|)]."""
    return np.einsum("ikjl,k,l->ij", w, b.conj(), b)


def _contract_alice(w: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.einsum("ikjl,i,j->kl", w, a.conj(), a)


def _top_eigvec(m: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eigh(m)
    return float(vals[-1]), vecs[:, -1]


def _grid_product_scan(w: np.ndarray, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Best real product pair on an angle grid (two-qubit warm start)."""
    angles = np.linspace(0.0, np.pi / 2, points)
    vecs = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (points, 2)
    best = (-np.inf, None, None)
    for a in vecs:
        m = _contract_bob(w, a.astype(complex))
        vals = np.einsum("ni,ij,nj->n", vecs.conj(), m, vecs).real
        k = int(np.argmax(vals))
        if vals[k] > best[0]:
            best = (float(vals[k]), a.astype(complex), vecs[k].astype(complex))
    return best[1], best[2]


def max_product(op: HermitianOperator, dims: tuple[int, int], config: OracleConfig | None = None) -> OracleResult:
    """Maximize tr(Omega sigma) over product states |a><a| (x) |b><b|.

    Seesaw alternation: with Bob fixed, Alice's optimum is the top
    eigenvector of the partial contraction, and vice versa. Convexity of
    the separable set makes pure product states sufficient, so the best
    value over restarts is a lower bound on the separable maximum.
    """
    config = config or OracleConfig()
    d_a, d_b = dims
    if d_a * d_b != op.dim:
        raise ValueError(f"dims {dims} incompatible with operator dimension {op.dim}")
    w = op.entries.reshape(d_a, d_b, d_a, d_b)

    warm: tuple[np.ndarray, np.ndarray] | None = None
    if d_a == 2 and d_b == 2:
        # Product optima of the symmetric two-qubit family are real, so a
        # coarse angle grid lands in the right basin.
        warm = _grid_product_scan(w, config.grid_points)

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    best_converged = False
    best_iters = 0
    for restart in range(config.restarts):
        rng = _restart_rng(config.seed, restart)
        if restart == 0 and warm is not None:
            a, b = warm
        else:
            a, b = _random_unit(rng, d_a), _random_unit(rng, d_b)
        value = -np.inf
        converged = False
        iters = 0
        for iters in range(1, config.max_iterations + 1):
            val_a, a = _top_eigvec(_contract_bob(w, b))
            _assert_ascent(value, val_a)
            val_b, b = _top_eigvec(_contract_alice(w, a))
            _assert_ascent(val_a, val_b)
            gain = val_b - value
            value = val_b
            if gain < config.convergence_tol:
                converged = True
                break
        if best is None or value > best[0]:
            best = (value, a, b)
            best_converged = converged
            best_iters = iters
    value, a, b = best
    witness = PureState(np.outer(a, b))
    return OracleResult(value=value, witness=witness, converged=best_converged, iterations=best_iters)


def _project_subspace_bob(w_mat: np.ndarray, d_a: int, d_b: int, v: np.ndarray) -> np.ndarray:
    """Compress Omega onto C^{d_a} (x) span(V); returns (d_a*r) square matrix."""
    emb = np.kron(np.eye(d_a), v)  # (d_a*d_b, d_a*r)
    return emb.conj().T @ w_mat @ emb


def _project_subspace_alice(w_mat: np.ndarray, d_a: int, d_b: int, u: np.ndarray) -> np.ndarray:
    emb = np.kron(u, np.eye(d_b))
    return emb.conj().T @ w_mat @ emb


def max_rank_r(
    op: HermitianOperator, dims: tuple[int, int], r: int, config: OracleConfig | None = None
) -> OracleResult:
    """Maximize tr(Omega sigma) over pure states of Schmidt rank at most r.

    The coefficient matrix is constrained to an alternating pair of r-dim
    local subspaces; each half-step maximizes exactly over one subspace
    (top eigenvector of the compressed operator), and the new subspace
    always contains the previous iterate, so the ascent is monotone.
    """
    config = config or OracleConfig()
    d_a, d_b = dims
    if d_a * d_b != op.dim:
        raise ValueError(f"dims {dims} incompatible with operator dimension {op.dim}")
    if r < 1:
        raise ValueError("r must be at least 1")
    if r == 1:
        return max_product(op, dims, config)
    if r >= min(d_a, d_b):
        # Unconstrained: the maximum is the top eigenvalue.
        val, vec = _top_eigvec(op.entries)
        return OracleResult(
            value=val, witness=PureState(vec.reshape(d_a, d_b)), converged=True, iterations=1
        )

    w_mat = op.entries
    best: tuple[float, np.ndarray] | None = None
    best_converged = False
    best_iters = 0
    for restart in range(config.restarts):
        rng = _restart_rng(config.seed, restart)
        g = rng.standard_normal((d_b, r)) + 1j * rng.standard_normal((d_b, r))
        v, _ = np.linalg.qr(g)
        value = -np.inf
        coeffs = None
        converged = False
        iters = 0
        for iters in range(1, config.max_iterations + 1):
            val, chi = _top_eigvec(_project_subspace_bob(w_mat, d_a, d_b, v))
            _assert_ascent(value, val)
            coeffs = chi.reshape(d_a, r) @ v.T
            u_full, _, _ = np.linalg.svd(coeffs, full_matrices=False)
            u = u_full[:, :r]
            val2, chi2 = _top_eigvec(_project_subspace_alice(w_mat, d_a, d_b, u))
            _assert_ascent(val, val2)
            coeffs = u @ chi2.reshape(r, d_b)
            _, _, vt = np.linalg.svd(coeffs, full_matrices=False)
            v = vt.conj().T[:, :r]
            gain = val2 - value
            value = val2
            if gain < config.convergence_tol:
                converged = True
                break
        if best is None or value > best[0]:
            best = (value, coeffs)
            best_converged = converged
            best_iters = iters
    value, coeffs = best
    return OracleResult(
        value=value, witness=PureState(coeffs), converged=best_converged, iterations=best_iters
    )


def _constrained_spectrum(g: np.ndarray, r: int, E: float) -> tuple[float, np.ndarray]:
    """Maximize x^dag G x on the unit sphere with tail mass sum_{j>=r} |x_j|^2 <= E.

    Single-constraint sphere problem: solved exactly through the
    multiplier mu in max eig(G - mu T), bisected until the top
    eigenvector's tail mass meets E.
    """
    d = g.shape[0]
    tail = np.zeros(d)
    tail[r:] = 1.0
    t_mat = np.diag(tail)

    def top(mu: float) -> tuple[float, np.ndarray, float]:
        val, vec = _top_eigvec(g - mu * t_mat)
        mass = float(np.sum(np.abs(vec[r:]) ** 2))
        return val, vec, mass

    _, vec0, mass0 = top(0.0)
    if mass0 <= E + 1e-12:
        return float(np.real(np.vdot(vec0, g @ vec0))), vec0
    lo, hi = 0.0, 1.0
    _, _, mass_hi = top(hi)
    while mass_hi > E and hi < 1e6:
        hi *= 2.0
        _, _, mass_hi = top(hi)
    best_val, best_vec = -np.inf, None
    for _ in range(200):
        mid = (lo + hi) / 2.0
        _, vec, mass = top(mid)
        if mass <= E:
            hi = mid
            val = float(np.real(np.vdot(vec, g @ vec)))
            if val > best_val:
                best_val, best_vec = val, vec
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    if best_vec is None:
        # Degenerate multiplier path: fall back to the zero-tail head
        # block, which is always feasible.
        _, head = _top_eigvec(g[:r, :r])
        best_vec = np.zeros(d, dtype=complex)
        best_vec[:r] = head
        best_val = float(np.real(np.vdot(best_vec, g @ best_vec)))
    return best_val, best_vec


def _tail_projected(values: np.ndarray, r: int, E: float) -> np.ndarray:
    """Scale the tail of a sorted spectrum to mass E, head to 1 - E."""
    tail_mass = float(values[r:].sum())
    if tail_mass <= E:
        return values
    out = values.copy()
    out[:r] *= (1.0 - E) / (1.0 - tail_mass)
    out[r:] *= E / tail_mass
    return out


def max_limited(
    op: HermitianOperator, dims: tuple[int, int], r: int, E: float, config: OracleConfig | None = None
) -> OracleResult:
    """Maximize tr(Omega sigma) over pure states with tail measure e_r <= E.

    Alternates a basis update (one power step through Omega, then an SVD
    of the iterate) with an exact constrained spectrum solve in the
    current local bases. The first restart starts from the top eigenvector
    of Omega with its spectrum tail projected onto mass E, which is the
    known optimum whenever Omega is homogeneous.
    """
    config = config or OracleConfig()
    d_a, d_b = dims
    if d_a * d_b != op.dim:
        raise ValueError(f"dims {dims} incompatible with operator dimension {op.dim}")
    d = min(d_a, d_b)
    if not 1 <= r <= d - 1:
        raise ValueError(f"r={r} out of range [1, {d - 1}]")
    if E < 0:
        raise ValueError("E must be nonnegative")
    if E <= 1e-14:
        # The zero-tail set is exactly the rank-r set.
        return max_rank_r(op, dims, r, config)

    w_mat = op.entries

    def analytic_init() -> np.ndarray:
        _, vec = _top_eigvec(w_mat)
        u, sv, vt = np.linalg.svd(vec.reshape(d_a, d_b), full_matrices=False)
        vals = _tail_projected(sv**2 / np.sum(sv**2), r, E)
        return (u * np.sqrt(vals)) @ vt

    best: tuple[float, np.ndarray] | None = None
    best_converged = False
    best_iters = 0
    for restart in range(config.restarts):
        rng = _restart_rng(config.seed, restart)
        if restart == 0:
            coeffs = analytic_init()
        else:
            coeffs = _random_unit(rng, d_a * d_b).reshape(d_a, d_b)
        value = -np.inf
        feasible = None
        converged = False
        iters = 0
        for iters in range(1, config.max_iterations + 1):
            u, sv, vt = np.linalg.svd(coeffs, full_matrices=False)
            basis = np.stack([np.kron(u[:, j], vt[j, :]) for j in range(sv.size)], axis=1)
            g = basis.conj().T @ w_mat @ basis
            g = (g + g.conj().T) / 2.0
            val, x = _constrained_spectrum(g, r, E)
            if val <= value + config.convergence_tol:
                converged = True
                break
            value = val
            feasible = (basis @ x).reshape(d_a, d_b)
            # Power step: rotate toward the top eigenvector; the next
            # constrained solve restores feasibility.
            pushed = w_mat @ feasible.ravel()
            norm = float(np.linalg.norm(pushed))
            coeffs = pushed.reshape(d_a, d_b) / norm if norm > 0 else feasible
        if best is None or value > best[0]:
            best = (value, feasible)
            best_converged = converged
            best_iters = iters
    value, coeffs = best
    return OracleResult(
        value=value, witness=PureState(coeffs), converged=best_converged, iterations=best_iters
    )


def max_product_grid_2q(
    op: HermitianOperator,
    a_points: int = 200,
    b_points: int = 200,
    phase_points: int = 16,
    refine: bool = True,
) -> float:
    """Dense-grid maximum of tr[Omega rho_a,x1 (x) rho_b,x2] over two qubits.

    Scans the full four-parameter family cos(a)|0> + sin(a) e^{i x1}|1>
    on each side, then polishes the best grid point with a local
    simplex search. Deliberately free of any structural shortcut so it
    can serve as an independent cross-check of the closed forms.
    """
    if op.dim != 4:
        raise ValueError("grid oracle is specific to two qubits")
    w = op.entries

    a_grid = np.linspace(0.0, np.pi / 2, a_points)
    b_grid = np.linspace(0.0, np.pi / 2, b_points)
    x_grid = np.linspace(0.0, 2 * np.pi, phase_points, endpoint=False)

    bb, xx2 = np.meshgrid(b_grid, x_grid, indexing="ij")
    vb = np.stack([np.cos(bb).ravel(), np.sin(bb).ravel() * np.exp(1j * xx2.ravel())], axis=1)

    best_val = -np.inf
    best = (0.0, 0.0, 0.0, 0.0)
    for a in a_grid:
        for x1 in x_grid:
            va = np.array([np.cos(a), np.sin(a) * np.exp(1j * x1)])
            m = np.einsum("ikjl,i,j->kl", w.reshape(2, 2, 2, 2), va.conj(), va)
            vals = np.einsum("nk,kl,nl->n", vb.conj(), m, vb).real
            k = int(np.argmax(vals))
            if vals[k] > best_val:
                best_val = float(vals[k])
                best = (a, x1, b_grid[k // phase_points], x_grid[k % phase_points])

    if not refine:
        return best_val

    from scipy.optimize import minimize

    def negative(params):
        a, x1, b, x2 = params
        va = np.array([np.cos(a), np.sin(a) * np.exp(1j * x1)])
        vb1 = np.array([np.cos(b), np.sin(b) * np.exp(1j * x2)])
        state = np.kron(va, vb1)
        return -float(np.real(np.vdot(state, w @ state)))

    res = minimize(negative, x0=np.array(best), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return max(best_val, -float(res.fun))
