"""Closed-form separation probabilities, bounds, adversaries, and planning."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from hdecert.operators import HermitianOperator, omega_mub, omega_opt, omega_sep_h, spectral_gap, target_state
from hdecert.separation import (
    AdversarySet,
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
from hdecert.spectra import SchmidtSpectrum, e_r, fidelity_limited, majorizes, schmidt_spectrum

from conftest import mixed_toward_uniform, random_spectrum


# ---------------------------------------------------------------------------
# maximally entangled closed forms


def test_sep_prob_mes_rank_values():
    assert sep_prob_mes_rank(4, 1) == pytest.approx(0.4, abs=1e-15)
    assert sep_prob_mes_rank(4, 3) == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ValueError):
        sep_prob_mes_rank(4, 4)


def test_sep_prob_mes_rank_is_exact_rational():
    for d in range(2, 101):
        for r in range(1, d):
            assert sep_prob_mes_rank(d, r) == float(Fraction(r + 1, d + 1))


def test_sep_prob_mes_limited_boundaries():
    assert sep_prob_mes_limited(4, 1, 0.0) == sep_prob_mes_rank(4, 1)
    e_max = 3 / 4
    assert sep_prob_mes_limited(4, 1, e_max * (1 - 1e-12)) == pytest.approx(1.0, abs=1e-5)
    assert sep_prob_mes_limited(4, 1, 0.25) == pytest.approx(0.8, abs=1e-12)
    with pytest.raises(InfeasibleError):
        sep_prob_mes_limited(4, 1, 0.75)


def test_sep_prob_mes_limited_monotone_concave():
    grid = np.linspace(0.0, 0.74, 50)
    vals = np.array([sep_prob_mes_limited(4, 1, float(E)) for E in grid])
    assert np.all(np.diff(vals) >= -1e-12)
    mids = (vals[:-2] + vals[2:]) / 2
    assert np.all(vals[1:-1] >= mids - 1e-12)


# ---------------------------------------------------------------------------
# MUB strategy probability


def test_sep_prob_mub_uniform():
    for d in (2, 4, 9):
        for r in range(1, d):
            assert sep_prob_mub(SchmidtSpectrum.uniform(d), r) == pytest.approx((r + d) / (2 * d), abs=1e-12)


def test_sep_prob_mub_qutrit():
    assert sep_prob_mub([2 / 5, 2 / 5, 1 / 5], 2) == pytest.approx(0.9, abs=1e-12)


def test_sep_prob_mub_saturates_near_e_prime():
    s = [0.5, 0.3, 0.2]
    e_prime = e_r(s, 2)
    assert sep_prob_mub(s, 2, e_prime * (1 - 1e-12)) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InfeasibleError):
        sep_prob_mub(s, 2, e_prime)


def test_sep_prob_mub_equals_lb_midpoint(rng):
    # (psep_lb + 1)/2 exactly
    for _ in range(50):
        d = int(rng.integers(2, 7))
        s = SchmidtSpectrum(random_spectrum(rng, d))
        r = int(rng.integers(1, d))
        assert sep_prob_mub(s, r) == pytest.approx((bounds_rank(s, r).psep_lb + 1) / 2, abs=1e-15)


# ---------------------------------------------------------------------------
# bound sandwiches


def test_bounds_rank_qutrit_counterexample():
    # Homogeneous-separable value is not monotone under majorization.
    psi1 = [2 / 5, 2 / 5, 1 / 5]
    psi2 = [3 / 5, 1 / 5, 1 / 5]
    assert majorizes(psi2, psi1)
    h1 = bounds_rank(psi1, 2).psep_h
    h2 = bounds_rank(psi2, 2).psep_h
    assert h1 == pytest.approx(6 / 7, abs=1e-12)
    assert h2 == pytest.approx((4 + math.sqrt(3)) / (5 + math.sqrt(3)), abs=1e-12)
    assert h2 < h1


def test_bounds_rank_uniform_collapses():
    for d in (2, 3, 5):
        for r in range(1, d):
            b = bounds_rank(SchmidtSpectrum.uniform(d), r)
            want = (r + 1) / (d + 1)
            assert b.psep_lb == pytest.approx(r / d, abs=1e-12)
            assert b.psep_h == pytest.approx(want, abs=1e-12)
            assert b.plc_ub == pytest.approx(want, abs=1e-12)


def test_bounds_rank_out_of_range():
    with pytest.raises(ValueError):
        bounds_rank([0.5, 0.5], 2)


def test_bounds_limited_reduces_and_saturates():
    s = [0.5, 0.3, 0.2]
    b0 = bounds_limited(s, 2, 0.0)
    br = bounds_rank(s, 2)
    assert b0 == pytest.approx(br, abs=1e-15)
    b1 = bounds_limited(s, 2, e_r(s, 2) * (1 - 1e-13))
    assert b1.psep_lb == pytest.approx(1.0, abs=1e-6)
    assert b1.plc_ub == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InfeasibleError):
        bounds_limited(s, 2, e_r(s, 2))


def test_bounds_limited_two_qubit_closed_form():
    # psep_h = (cos^2(theta - theta_E) + cos sin)/(1 + cos sin)
    for theta in (0.3, 0.5, 0.7):
        for theta_e in (0.05, 0.15):
            s = [math.cos(theta) ** 2, math.sin(theta) ** 2]
            E = math.sin(theta_e) ** 2
            got = bounds_limited(s, 1, E).psep_h
            k = math.cos(theta) * math.sin(theta)
            want = (math.cos(theta - theta_e) ** 2 + k) / (1 + k)
            assert got == pytest.approx(want, abs=1e-12)


def test_bounds_sandwich_random(rng):
    for _ in range(500):
        d = int(rng.integers(2, 9))
        s = SchmidtSpectrum(random_spectrum(rng, d))
        r = int(rng.integers(1, d))
        b = bounds_rank(s, r)
        assert b.psep_lb <= b.psep_h + 1e-10
        assert b.psep_h <= b.plc_ub + 1e-10
        assert b.plc_ub <= 2 * b.psep_lb / (1 + s.s0) + 1e-10
        assert b.plc_ub <= 3 * b.psep_h / (2 + s.s0) + 1e-10
        # every bound dominated from below by the maximally entangled value
        assert b.psep_lb >= (r + 1) / (d + 1) - 1e-10 or b.psep_lb >= r / d - 1e-12
        assert b.psep_h >= (r + 1) / (d + 1) - 1e-10
        assert b.plc_ub >= (r + 1) / (d + 1) - 1e-10


def test_bounds_padding_invariance(rng):
    # closed forms depend only on the nonzero coefficients
    for _ in range(50):
        s = SchmidtSpectrum(random_spectrum(rng, 4))
        r = int(rng.integers(1, 4))
        b = bounds_rank(s, r)
        bp = bounds_rank(s.padded(9), r)
        assert b == pytest.approx(bp, abs=1e-14)
        E = e_r(s, r) / 2
        assert bounds_limited(s, r, E) == pytest.approx(bounds_limited(s.padded(9), r, E), abs=1e-14)


def test_bounds_majorization_monotonicity(rng):
    # psep_lb and plc_ub inherit Schur convexity from the tail measure.
    for _ in range(200):
        d = int(rng.integers(2, 7))
        y = SchmidtSpectrum(random_spectrum(rng, d))
        x = SchmidtSpectrum(mixed_toward_uniform(rng, y.values))
        for r in range(1, d):
            bx, by = bounds_rank(x, r), bounds_rank(y, r)
            assert bx.psep_lb <= by.psep_lb + 1e-12
            # plc_ub is not a pure tail function; monotonicity holds through
            # the LB relation plc_ub <= 2 psep_lb/(1+s0)
            assert bx.psep_lb <= bx.plc_ub <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# test counts


def test_tests_required_spot_values():
    assert tests_required(0.2, 0.01) == 3
    assert tests_required(0.625, 0.01) == 10


def test_tests_required_single_test_regime():
    assert tests_required(0.005, 0.01) == 1


def test_tests_required_boundary_exactness():
    for P in (0.1, 0.2, 0.5, 0.625, 0.9, 0.99):
        for delta in (0.2, 0.05, 0.01, 0.001):
            n = tests_required(P, delta)
            assert P**n <= delta
            assert n == 1 or P ** (n - 1) > delta


def test_tests_required_guards():
    with pytest.raises(InfeasibleError):
        tests_required(1.0, 0.01)
    with pytest.raises(InfeasibleError):
        tests_required(1.0 - 1e-13, 0.01)
    with pytest.raises(ValueError):
        tests_required(0.5, 0.0)
    with pytest.raises(ValueError):
        tests_required(0.5, 1.0)


def test_fig2_staircases_monotone():
    for r in (1, 2, 5):
        prev_opt = prev_mub = None
        for d in range(max(2, r + 1), 101):
            n_opt = tests_required(sep_prob_mes_rank(d, r), 0.01)
            n_mub = tests_required(sep_prob_mub(SchmidtSpectrum.uniform(d), r), 0.01)
            if prev_opt is not None:
                assert n_opt <= prev_opt
                assert n_mub <= prev_mub
            prev_opt, prev_mub = n_opt, n_mub


# ---------------------------------------------------------------------------
# adversarial states


def test_adversarial_state_truncation():
    s = SchmidtSpectrum([0.5, 0.3, 0.2])
    adv = adversarial_state(s, 2, 0.0)
    spec = schmidt_spectrum(adv)
    np.testing.assert_allclose(spec.values, [0.625, 0.375, 0.0], atol=1e-12)
    tgt = target_state(s, 3)
    overlap = abs(tgt.overlap(adv)) ** 2
    assert overlap == pytest.approx(1 - e_r(s, 2), abs=1e-12)


def test_adversarial_state_exact_tail_and_fidelity(rng):
    for _ in range(50):
        d = int(rng.integers(2, 6))
        s = SchmidtSpectrum(random_spectrum(rng, d))
        r = int(rng.integers(1, d))
        e_prime = e_r(s, r)
        if e_prime < 1e-9:
            continue
        E = float(rng.uniform(0, e_prime * 0.99))
        adv = adversarial_state(s, r, E)
        assert e_r(schmidt_spectrum(adv), r) == pytest.approx(E, abs=1e-12)
        overlap = abs(target_state(s, d).overlap(adv)) ** 2
        assert overlap == pytest.approx(fidelity_limited(s, r, E), abs=1e-12)


def test_adversarial_state_near_boundary_overlap():
    s = SchmidtSpectrum([0.5, 0.3, 0.2])
    e_prime = e_r(s, 2)
    adv = adversarial_state(s, 2, e_prime - 1e-9)
    overlap = abs(target_state(s, 3).overlap(adv)) ** 2
    assert overlap == pytest.approx(1.0, abs=1e-6)


def test_adversarial_state_attains_mub_probability(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        s = SchmidtSpectrum(random_spectrum(rng, d))
        r = int(rng.integers(1, d))
        E = float(rng.uniform(0, e_r(s, r) * 0.9))
        strat = omega_mub(s)
        adv = adversarial_state(s, r, E)
        got = pass_prob(strat.operator, adv)
        want = (fidelity_limited(s, r, E) + 1) / 2
        assert got == pytest.approx(want, abs=1e-9)


def test_adversarial_state_rejects_bad_e():
    with pytest.raises(InfeasibleError):
        adversarial_state([0.5, 0.5], 1, 0.5)


# ---------------------------------------------------------------------------
# pass probabilities


def test_pass_prob_target_passes():
    s = SchmidtSpectrum([0.6, 0.4])
    tgt = target_state(s, 2)
    assert pass_prob(omega_sep_h(s), tgt) == pytest.approx(1.0, abs=1e-12)


def test_pass_prob_maximally_mixed():
    for d in (2, 3, 4):
        D = d * d
        got = pass_prob(omega_opt(d), np.eye(D) / D)
        assert got == pytest.approx((1 + (D - 1) / (d + 1)) / D, abs=1e-12)


def test_pass_prob_homogeneous_identity(rng):
    # tr(Omega sigma) = nu <Psi|sigma|Psi> + beta for homogeneous Omega
    s = SchmidtSpectrum(random_spectrum(rng, 3))
    om = omega_sep_h(s)
    tgt = target_state(s, 3)
    beta = spectral_gap(om, tgt).beta
    for _ in range(20):
        z = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
        rho = z @ z.conj().T
        rho /= np.trace(rho).real
        fid = float(np.real(tgt.ket.conj() @ rho @ tgt.ket))
        assert pass_prob(om, rho) == pytest.approx((1 - beta) * fid + beta, abs=1e-12)


def test_pass_prob_shape_mismatch():
    with pytest.raises(ValueError):
        pass_prob(omega_opt(2), np.eye(9) / 9)


# ---------------------------------------------------------------------------
# plans


def test_build_plan_opt_spot():
    plan = build_plan(SchmidtSpectrum.uniform(9), r=1, delta=0.01, strategy="opt")
    assert plan.separation_probability == pytest.approx(0.2, abs=1e-15)
    assert plan.tests_required == 3


def test_build_plan_mub_spot():
    plan = build_plan(SchmidtSpectrum.uniform(4), r=1, delta=0.01, strategy="mub")
    assert plan.separation_probability == pytest.approx(0.625, abs=1e-15)
    assert plan.tests_required == 10


def test_build_plan_seph_qutrit():
    plan = build_plan([0.4, 0.4, 0.2], r=2, delta=0.05, strategy="seph")
    assert plan.separation_probability == pytest.approx(6 / 7, abs=1e-12)


def test_build_plan_json_round_trip():
    plan = build_plan([0.4, 0.4, 0.2], r=2, delta=0.05, strategy="seph")
    payload = json.loads(plan.to_json())
    assert payload["strategy"] == "seph"
    assert payload["adversary"] == {"kind": "schmidt_rank", "r": 2, "E": None}
    assert payload["tests_required"] == plan.tests_required


def test_build_plan_rejects_infeasible():
    with pytest.raises(InfeasibleError):
        build_plan([0.5, 0.5], r=1, delta=0.01, strategy="mub", E=0.6)
    with pytest.raises(ValueError):
        build_plan([0.6, 0.4], r=1, delta=0.01, strategy="opt")


def test_adversary_set_validation():
    with pytest.raises(ValueError):
        AdversarySet(r=0)
    with pytest.raises(ValueError):
        AdversarySet(r=1, E=-0.5)
    adv = AdversarySet(r=1, E=0.1)
    assert adv.kind == "limited_er"
    with pytest.raises(ValueError):
        AdversarySet(r=3).validate_against([0.5, 0.5])
