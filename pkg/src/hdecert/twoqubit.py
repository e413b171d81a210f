"""Complete two-qubit entanglement-certification analysis.

For the target cos(theta)|00> + sin(theta)|11> the optimal separable
strategies form a one-parameter family Omega(theta, p) interpolating
between a diagonal-padding endpoint (p = 0) and the homogeneous endpoint
(p = 1). This module provides that family, its worst-case product-state
pass probability P(theta, p) in closed form, the threshold angles where
the optimal mixing weight leaves the endpoints, and the five-test
local-measurement construction that realizes Omega(theta, p) for p above
an LOCC threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect, brentq, minimize_scalar

from .operators import HermitianOperator, Strategy
from .spectra import PureState

__all__ = [
    "TwoQubitTarget",
    "ThetaFunctions",
    "omega_family",
    "q_theta",
    "a_star",
    "p_closed",
    "dp_dp",
    "theta_star",
    "p_star",
    "sep_prob_two_qubit",
    "tilde_p",
    "p2_star",
    "p3_star",
    "theta2_star",
    "theta3_star",
    "p_strategy_curve",
    "theta_functions",
    "wang_hayashi",
    "wh_parameters",
    "ppt_eigenvalues",
    "sweep_rows",
    "SWEEP_COLUMNS",
    "STRATEGY_VARIANTS",
]

# Below this angle the target degenerates to a product state and
# certification is ill-posed.
THETA_MIN = 1e-6
_QUARTER_PI = math.pi / 4

STRATEGY_VARIANTS = ("pstar", "p2star", "p3star", "omega1", "omega0")

SWEEP_COLUMNS = (
    "theta",
    "q",
    "p_star",
    "tilde_p",
    "p2_star",
    "p3_star",
    "P_sep",
    "P_p2",
    "P_p3",
    "P_omega1",
    "P_omega0",
)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not THETA_MIN <= theta <= _QUARTER_PI + 1e-12:
        raise ValueError(f"theta={theta} out of range [{THETA_MIN}, pi/4]")
    return min(theta, _QUARTER_PI)


def _check_p(p: float) -> float:
    p = float(p)
    if not -1e-12 <= p <= 1.0 + 1e-12:
        raise ValueError(f"p={p} out of range [0, 1]")
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class TwoQubitTarget:
    """Target cos(theta)|00> + sin(theta)|11> with theta in (0, pi/4]."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _check_theta(self.theta))

    @property
    def state(self) -> PureState:
        c = np.zeros((2, 2), dtype=complex)
        c[0, 0] = math.cos(self.theta)
        c[1, 1] = math.sin(self.theta)
        return PureState(c)

    @property
    def concurrence(self) -> float:
        return 2.0 * math.sin(self.theta) * math.cos(self.theta)


@dataclass(frozen=True)
class ThetaFunctions:
    """The angle functions entering the closed-form analysis at (theta, p)."""

    kappa: float
    q: float
    h: float | None
    a_star: float
    p_star: float
    tilde_p: float


def kappa(theta: float) -> float:
    """kappa = cos(theta) sin(theta), half the concurrence."""
    theta = _check_theta(theta)
    return math.cos(theta) * math.sin(theta)


def omega_family(theta: float, p: float) -> HermitianOperator:
    """Interpolated separable strategy p*Omega1 + (1-p)*Omega0.

    Omega0 pads the target projector with cos sin on |01>, |10|; Omega1 is
    the homogeneous strategy with beta = kappa/(1+kappa). Both the result
    and its complement are PPT for every p.
    """
    theta = _check_theta(theta)
    p = _check_p(p)
    k = kappa(theta)
    lam2 = p * k / (1.0 + k)
    lam3 = k * (1.0 - lam2)
    return _symmetric_operator(theta, lam2, lam3)


def _symmetric_operator(theta: float, lam2: float, lam3: float) -> HermitianOperator:
    c, s = math.cos(theta), math.sin(theta)
    psi = np.array([c, 0.0, 0.0, s], dtype=complex)
    perp = np.array([s, 0.0, 0.0, -c], dtype=complex)
    m = np.outer(psi, psi) + lam2 * np.outer(perp, perp)
    m[1, 1] += lam3
    m[2, 2] += lam3
    return HermitianOperator(m)


def ppt_eigenvalues(theta: float, p: float) -> np.ndarray:
    """Closed-form eigenvalues of the partial transpose of omega_family.

    Returns {cos^2 + lam2 sin^2, sin^2 + lam2 cos^2, lam3 +- (1-lam2) k}
    sorted ascending, with lam2 = p k/(1+k) and lam3 = k (1-lam2). The
    smallest one vanishes identically along the family, which is exactly
    the separability boundary.
    """
    theta = _check_theta(theta)
    p = _check_p(p)
    k = kappa(theta)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    lam2 = p * k / (1.0 + k)
    lam3 = k * (1.0 - lam2)
    vals = np.array(
        [
            c2 + lam2 * s2,
            s2 + lam2 * c2,
            lam3 + (1.0 - lam2) * k,
            lam3 - (1.0 - lam2) * k,
        ]
    )
    return np.sort(vals)


def q_theta(theta: float) -> float:
    """Mixing weight above which the worst-case product state sits at a = 0.

    Vanishes for theta <= arctan(1/2) and increases to 1 at pi/4.
    """
    theta = _check_theta(theta)
    k = kappa(theta)
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    val = (1.0 + k) * (2.0 * k - c2) / (k * (2.0 * k + s2))
    return max(val, 0.0)


def _h_theta_p(theta: float, p: float) -> float:
    k = kappa(theta)
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    num = (1.0 + k) * (2.0 * k - c2) - p * k * (2.0 * k + s2)
    den = (1.0 + k) * (2.0 * k - s2) - p * k * (2.0 * k + c2)
    return num / den


def a_star(theta: float, p: float) -> float:
    """Maximizing product-state angle: 0 for p >= q, arctan sqrt(h) below."""
    theta = _check_theta(theta)
    p = _check_p(p)
    if p >= q_theta(theta):
        return 0.0
    return math.atan(math.sqrt(_h_theta_p(theta, p)))


def _trace_symmetric_product(theta: float, p: float, a: float) -> float:
    """tr[Omega(theta, p) rho_a (x) rho_a] for the real product state at angle a."""
    c, s = math.cos(theta), math.sin(theta)
    k = c * s
    ca2, sa2 = math.cos(a) ** 2, math.sin(a) ** 2
    base = (c * ca2 + s * sa2) ** 2 + 2.0 * k * ca2 * sa2
    gain = (s * ca2 - c * sa2) ** 2 - 2.0 * k * ca2 * sa2
    return base + p * k / (1.0 + k) * gain


def p_closed(theta: float, p: float) -> float:
    """Worst-case single-test pass probability of omega_family over product states.

    Closed form: (9-p)/12 at theta = pi/4; for p >= q(theta) the maximum
    sits at |00> giving cos^2 + p cos sin^3/(1+cos sin); below q it is
    attained at the interior angle a*(theta, p).
    """
    theta = _check_theta(theta)
    p = _check_p(p)
    if _QUARTER_PI - theta < 1e-12:
        return (9.0 - p) / 12.0
    c, s = math.cos(theta), math.sin(theta)
    k = c * s
    if p >= q_theta(theta):
        return c * c + p * c * s**3 / (1.0 + k)
    return _trace_symmetric_product(theta, p, a_star(theta, p))


def dp_dp(theta: float, p: float) -> float:
    """Analytic partial derivative of p_closed in p.

    At the interior maximizer the envelope theorem reduces the derivative
    to the p-coefficient of the trace evaluated at a*(theta, p).
    """
    theta = _check_theta(theta)
    p = _check_p(p)
    c, s = math.cos(theta), math.sin(theta)
    k = c * s
    a = a_star(theta, p)
    ca2, sa2 = math.cos(a) ** 2, math.sin(a) ** 2
    gain = (s * ca2 - c * sa2) ** 2 - 2.0 * k * ca2 * sa2
    return k / (1.0 + k) * gain


@lru_cache(maxsize=1)
def theta_star() -> float:
    """Angle above which the optimal mixing weight leaves 0.

    Unique root of 17 - 9 cos 4t - 25 sin 2t + 3 sin 6t on [0, pi/4],
    located by bisection to 1e-13; approximately 0.51095.
    """

    def f(t: float) -> float:
        return 17.0 - 9.0 * math.cos(4 * t) - 25.0 * math.sin(2 * t) + 3.0 * math.sin(6 * t)

    return float(bisect(f, 0.0, _QUARTER_PI, xtol=1e-13))


def p_star(theta: float) -> float:
    """Optimal mixing weight minimizing p_closed over p in [0, 1].

    Zero up to theta_star, one at pi/4; in between it is the unique zero
    of the analytic derivative on (0, q(theta)), found by bracketed
    root-finding with a golden-section fallback near the branch points.
    """
    theta = _check_theta(theta)
    if theta <= theta_star():
        return 0.0
    if _QUARTER_PI - theta < 1e-12:
        return 1.0
    q = q_theta(theta)
    if dp_dp(theta, 0.0) >= 0.0:
        return 0.0
    try:
        return float(brentq(lambda p: dp_dp(theta, p), 0.0, q, xtol=1e-14))
    except ValueError:
        res = minimize_scalar(lambda p: p_closed(theta, p), bounds=(0.0, q), method="bounded",
                              options={"xatol": 1e-12})
        return float(res.x)


def sep_prob_two_qubit(theta: float) -> float:
    """Optimal separable separation probability for the two-qubit target.

    cos^2(theta) up to arctan(1/2), then 3 cos^2 sin^2/(4 cos sin - 1) up
    to theta_star, the minimized family value in between, and exactly 2/3
    at pi/4.
    """
    theta = _check_theta(theta)
    c, s = math.cos(theta), math.sin(theta)
    if theta <= math.atan(0.5):
        return c * c
    if theta <= theta_star():
        return 3.0 * c * c * s * s / (4.0 * c * s - 1.0)
    if _QUARTER_PI - theta < 1e-12:
        return 2.0 / 3.0
    return p_closed(theta, p_star(theta))


def tilde_p(theta: float) -> float:
    """LOCC threshold weight 1 - tan/(cos^2 + cos sin).

    Strictly decreasing in theta with value 0 at pi/4; the family is known
    to be LOCC-realizable for p at or above this weight.
    """
    theta = _check_theta(theta)
    c, s = math.cos(theta), math.sin(theta)
    return 1.0 - math.tan(theta) / (c * c + c * s)


@lru_cache(maxsize=1)
def theta2_star() -> float:
    """Angle where the LOCC threshold weight meets q: arctan((sqrt 5 - 1)/2)."""
    return math.atan((math.sqrt(5.0) - 1.0) / 2.0)


def p2_star(theta: float) -> float:
    """Smaller of the two LOCC-feasible weights: max(tilde_p, q)."""
    return max(tilde_p(theta), q_theta(theta))


def p3_star(theta: float) -> float:
    """LOCC-feasible weight closest to optimal: max(tilde_p, p_star)."""
    return max(tilde_p(theta), p_star(theta))


@lru_cache(maxsize=1)
def theta3_star() -> float:
    """Smallest angle where the optimal weight is itself LOCC-feasible.

    Located by bisection on tilde_p - p_star over (theta_star, pi/4);
    approximately 0.59079, i.e. concurrence about 0.92521.
    """

    def gap(t: float) -> float:
        return tilde_p(t) - p_star(t)

    lo = theta_star() + 1e-9
    hi = _QUARTER_PI - 1e-12
    return float(bisect(gap, lo, hi, xtol=1e-12))


def theta_functions(theta: float, p: float = 0.0) -> ThetaFunctions:
    """Bundle of the analysis functions evaluated at (theta, p)."""
    theta = _check_theta(theta)
    p = _check_p(p)
    q = q_theta(theta)
    return ThetaFunctions(
        kappa=kappa(theta),
        q=q,
        h=_h_theta_p(theta, p) if p < q else None,
        a_star=a_star(theta, p),
        p_star=p_star(theta),
        tilde_p=tilde_p(theta),
    )


def p_strategy_curve(theta: float, variant: str) -> float:
    """Separation probability of one of the named strategy curves.

    Variants: ``pstar`` (optimal separable), ``p3star``/``p2star`` (LOCC
    curves, ordered P(pstar) <= P(p3star) <= P(p2star) <= P(omega1)),
    ``omega1``/``omega0`` (family endpoints).
    """
    theta = _check_theta(theta)
    if variant == "pstar":
        return sep_prob_two_qubit(theta)
    if variant == "p2star":
        return p_closed(theta, p2_star(theta))
    if variant == "p3star":
        return p_closed(theta, p3_star(theta))
    if variant == "omega1":
        return p_closed(theta, 1.0)
    if variant == "omega0":
        return p_closed(theta, 0.0)
    raise ValueError(f"unknown variant {variant!r}; choose from {STRATEGY_VARIANTS}")


def wh_parameters(theta: float, p: float) -> tuple[float, float]:
    """Map a family weight p >= tilde_p(theta) to the five-test parameters.

    Returns (eta, p') with eta = 1 - tan(theta); p' lands in
    [0, sin^2/(1 + cos sin)] <= 1/3 exactly when p >= tilde_p(theta).
    """
    theta = _check_theta(theta)
    p = _check_p(p)
    c, s = math.cos(theta), math.sin(theta)
    k = c * s
    eta = 1.0 - math.tan(theta)
    p_prime = k * ((c * c + k) / (1.0 + k) * p + math.tan(theta) - 1.0)
    return eta, p_prime


def wang_hayashi(theta: float, eta: float, p_prime: float) -> Strategy:
    """Five-test local strategy for the two-qubit target.

    Four one-way tests (two per communication direction) with weight
    (1-p')/4 each plus the computational correlation test with weight p'.
    With eta = 1 - tan(theta) and the linear weight map of
    :func:`wh_parameters` the resulting operator equals
    omega_family(theta, p) entrywise for p >= tilde_p(theta).
    """
    theta = _check_theta(theta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta={eta} out of range [0, 1]")
    if not -1e-12 <= p_prime <= 1.0:
        raise ValueError(f"p_prime={p_prime} out of range [0, 1]")
    p_prime = max(p_prime, 0.0)
    c, s = math.cos(theta), math.sin(theta)

    ket0 = np.array([1.0, 0.0], dtype=complex)
    ket1 = np.array([0.0, 1.0], dtype=complex)
    plus = (ket0 + ket1) / math.sqrt(2.0)
    minus = (ket0 - ket1) / math.sqrt(2.0)
    circ_p = (ket0 + 1j * ket1) / math.sqrt(2.0)
    circ_m = (ket0 - 1j * ket1) / math.sqrt(2.0)
    scale = math.sqrt(1.0 - eta * c * c)
    psi_p = ((1.0 - eta) * c * ket0 + s * ket1) / scale
    psi_m = ((1.0 - eta) * c * ket0 - s * ket1) / scale
    phi_p = ((1.0 - eta) * c * ket0 + 1j * s * ket1) / scale
    phi_m = ((1.0 - eta) * c * ket0 - 1j * s * ket1) / scale

    def proj(v: np.ndarray) -> np.ndarray:
        return np.outer(v, v.conj())

    p00 = np.kron(proj(ket0), proj(ket0))
    # psi/phi are subnormalized on purpose; their projectors carry weight
    # (1 - eta cos^2)^{-1} * |amplitudes|^2 < 1. In the circular tests the
    # +i branch must face the conjugate circular vector, otherwise the
    # target would not pass.
    t1_ab = eta * p00 + np.kron(proj(psi_p), proj(plus)) + np.kron(proj(psi_m), proj(minus))
    t2_ab = eta * p00 + np.kron(proj(phi_p), proj(circ_m)) + np.kron(proj(phi_m), proj(circ_p))
    t1_ba = eta * p00 + np.kron(proj(plus), proj(psi_p)) + np.kron(proj(minus), proj(psi_m))
    t2_ba = eta * p00 + np.kron(proj(circ_p), proj(phi_m)) + np.kron(proj(circ_m), proj(phi_p))
    t3 = np.kron(proj(ket0), proj(ket0)) + np.kron(proj(ket1), proj(ket1))

    target = TwoQubitTarget(theta).state
    w = (1.0 - p_prime) / 4.0
    tests = tuple(
        (weight, HermitianOperator(m))
        for weight, m in [(w, t1_ab), (w, t2_ab), (w, t1_ba), (w, t2_ba), (p_prime, t3)]
    )
    return Strategy(tests=tests, target=target, projective=False)


def sweep_rows(thetas) -> list[tuple[float, ...]]:
    """Rows of the strategy sweep (columns in SWEEP_COLUMNS) over a theta grid."""
    rows = []
    for theta in np.asarray(thetas, dtype=float):
        t = _check_theta(theta)
        ps = p_star(t)
        rows.append(
            (
                t,
                q_theta(t),
                ps,
                tilde_p(t),
                p2_star(t),
                p3_star(t),
                p_closed(t, ps),
                p_closed(t, p2_star(t)),
                p_closed(t, p3_star(t)),
                p_closed(t, 1.0),
                p_closed(t, 0.0),
            )
        )
    return rows
