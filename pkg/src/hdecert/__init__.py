"""Certification of high-dimensional entanglement in bipartite pure states.

Closed-form separation probabilities and sample costs, the verification
strategies they belong to, brute-force oracles validating every formula at
small dimension, and Haar-ensemble Monte Carlo.
"""

__version__ = "0.1.0"

from .montecarlo import EnsembleStats, ProtocolTrace, ensemble_stats, haar_state, simulate_protocol, tail_check
from .operators import (
    HermitianOperator,
    SpectralGap,
    Strategy,
    is_ppt,
    mub_bases,
    omega_lc_h,
    omega_mub,
    omega_opt,
    omega_sep,
    omega_sep_h,
    partial_transpose,
    spectral_gap,
    target_state,
    two_design_strategy,
)
from .oracle import OracleConfig, OracleResult, max_limited, max_product, max_product_grid_2q, max_rank_r
from .separation import (
    AdversarySet,
    Bounds,
    CertificationPlan,
    InfeasibleError,
    adversarial_state,
    bounds_limited,
    bounds_rank,
    build_plan,
    pass_prob,
    sep_prob_mes_limited,
    sep_prob_mes_rank,
    sep_prob_mub,
    tests_required,
)
from .spectra import (
    PureState,
    SchmidtSpectrum,
    e_r,
    fidelity_limited,
    fidelity_rank,
    lipschitz_const,
    majorizes,
    max_overlap,
    schmidt_spectrum,
    vidal_probability,
)
from .twoqubit import (
    ThetaFunctions,
    TwoQubitTarget,
    omega_family,
    p2_star,
    p3_star,
    p_closed,
    p_star,
    p_strategy_curve,
    q_theta,
    sep_prob_two_qubit,
    theta2_star,
    theta3_star,
    theta_star,
    tilde_p,
    wang_hayashi,
)
