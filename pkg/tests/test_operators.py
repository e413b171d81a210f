"""Verification-operator constructors, spectral gaps, MUBs, and PPT machinery."""

import math

import numpy as np
import pytest

from hdecert.operators import (
    HermitianOperator,
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
from hdecert.spectra import PureState, SchmidtSpectrum, schmidt_spectrum

from conftest import random_spectrum


# ---------------------------------------------------------------------------
# target construction


def test_target_state_mes():
    st = target_state(SchmidtSpectrum.uniform(2), 2)
    np.testing.assert_allclose(st.coeffs, np.eye(2) / math.sqrt(2))


def test_target_state_padding():
    st = target_state([0.8, 0.2], 3)
    expected = np.array([[math.sqrt(0.8), 0, 0], [0, math.sqrt(0.2), 0]])
    np.testing.assert_allclose(st.coeffs, expected)
    with pytest.raises(ValueError):
        target_state([0.8, 0.2], 1)


def test_target_state_round_trip(rng):
    for _ in range(10):
        s = random_spectrum(rng, 4)
        st = target_state(s, 6)
        np.testing.assert_allclose(schmidt_spectrum(st).values, s, atol=1e-12)


# ---------------------------------------------------------------------------
# gap closed forms


def test_omega_sep_gaps():
    tgt = target_state(SchmidtSpectrum.uniform(2), 2)
    assert spectral_gap(omega_sep(SchmidtSpectrum.uniform(2)), tgt).beta == pytest.approx(0.5, abs=1e-12)
    tgt = target_state([0.8, 0.2], 2)
    assert spectral_gap(omega_sep([0.8, 0.2]), tgt).beta == pytest.approx(0.4, abs=1e-12)
    om = omega_sep([1.0, 0.0])
    tgt = target_state([1.0, 0.0], 2)
    assert spectral_gap(om, tgt).beta == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(om.entries, np.diag([1.0, 0, 0, 0]), atol=1e-15)


def test_omega_sep_h_gaps():
    for d in (2, 3, 5):
        tgt = target_state(SchmidtSpectrum.uniform(d), d)
        beta = spectral_gap(omega_sep_h(SchmidtSpectrum.uniform(d)), tgt).beta
        assert beta == pytest.approx(1 / (d + 1), abs=1e-12)
    tgt = target_state([0.8, 0.2], 2)
    assert spectral_gap(omega_sep_h([0.8, 0.2]), tgt).beta == pytest.approx(2 / 7, abs=1e-12)
    tgt = target_state([1.0, 0.0], 2)
    assert spectral_gap(omega_sep_h([1.0, 0.0]), tgt).beta == pytest.approx(0.0, abs=1e-12)


def test_omega_lc_h_gaps():
    tgt = target_state(SchmidtSpectrum.uniform(2), 2)
    assert spectral_gap(omega_lc_h(SchmidtSpectrum.uniform(2)), tgt).beta == pytest.approx(1 / 3, abs=1e-12)
    for d in (3, 4, 6):
        tgt = target_state(SchmidtSpectrum.uniform(d), d)
        beta = spectral_gap(omega_lc_h(SchmidtSpectrum.uniform(d)), tgt).beta
        assert beta == pytest.approx(1 / (d + 1), abs=1e-12)
    tgt = target_state([0.8, 0.2], 2)
    assert spectral_gap(omega_lc_h([0.8, 0.2]), tgt).beta == pytest.approx(1 / 3, abs=1e-12)


def test_gap_closed_forms_random(rng):
    # beta formulas on 100 random spectra per dimension
    for d in range(2, 9):
        for _ in range(100):
            s = SchmidtSpectrum(random_spectrum(rng, d))
            tgt = target_state(s, d)
            root = math.sqrt(s.s0 * s.s1)
            assert spectral_gap(omega_sep(s), tgt).beta == pytest.approx(root, abs=1e-9)
            assert spectral_gap(omega_sep_h(s), tgt).beta == pytest.approx(root / (1 + root), abs=1e-9)
            assert spectral_gap(omega_lc_h(s), tgt).beta == pytest.approx(
                (s.s0 + s.s1) / (2 + s.s0 + s.s1), abs=1e-9
            )


def test_homogeneous_beta_chain(rng):
    # sqrt(s0 s1)/(1+sqrt(s0 s1)) <= (s0+s1)/(2+s0+s1) <= 1/3
    for _ in range(200):
        d = int(rng.integers(2, 8))
        s = SchmidtSpectrum(random_spectrum(rng, d))
        root = math.sqrt(s.s0 * s.s1)
        assert root / (1 + root) <= (s.s0 + s.s1) / (2 + s.s0 + s.s1) + 1e-12
        assert (s.s0 + s.s1) / (2 + s.s0 + s.s1) <= 1 / 3 + 1e-12


def test_constructors_are_verification_operators(rng):
    for d in (2, 3, 4):
        s = SchmidtSpectrum(random_spectrum(rng, d))
        tgt = target_state(s, d)
        for op in (omega_sep(s), omega_sep_h(s), omega_lc_h(s), omega_mub(s).operator):
            assert op.is_verification_operator(tgt)


# ---------------------------------------------------------------------------
# MUB strategy


def test_omega_mub_gap_is_half(rng):
    for d in (2, 3, 4, 6):
        s = SchmidtSpectrum(random_spectrum(rng, d))
        strat = omega_mub(s)
        assert strat.gap().beta == pytest.approx(0.5, abs=1e-9)


def test_omega_mub_fixes_target():
    s = SchmidtSpectrum([0.5, 0.3, 0.2])
    strat = omega_mub(s)
    k = strat.target.ket
    for _, op in strat.tests:
        assert np.linalg.norm(op.entries @ k - k) < 1e-9


def test_omega_mub_qubit_second_test_is_fourier_pair():
    strat = omega_mub(SchmidtSpectrum.uniform(2))
    u = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    expected = np.zeros((4, 4), dtype=complex)
    for j in range(2):
        w = np.kron(u[:, j], u[:, j].conj())
        expected += np.outer(w, w.conj())
    np.testing.assert_allclose(strat.tests[1][1].entries, expected, atol=1e-12)


# ---------------------------------------------------------------------------
# optimal strategy and 2-designs


def test_omega_opt_gap_and_eigenvalues():
    tgt = target_state(SchmidtSpectrum.uniform(2), 2)
    assert spectral_gap(omega_opt(2), tgt).beta == pytest.approx(1 / 3, abs=1e-12)
    tgt = target_state(SchmidtSpectrum.uniform(4), 4)
    assert spectral_gap(omega_opt(4), tgt).beta == pytest.approx(0.2, abs=1e-12)
    ev = omega_opt(4).eigenvalues()
    assert ev[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(ev[1:], np.full(15, 0.2), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_two_design_sum_matches_opt(d):
    strat = two_design_strategy(d)
    np.testing.assert_allclose(strat.operator.entries, omega_opt(d).entries, atol=1e-9)
    assert len(strat.tests) == d + 1


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_mub_unbiasedness(d):
    bases = mub_bases(d)
    assert len(bases) == d + 1
    for i, a in enumerate(bases):
        np.testing.assert_allclose(a.conj().T @ a, np.eye(d), atol=1e-12)
        for b in bases[i + 1 :]:
            np.testing.assert_allclose(np.abs(a.conj().T @ b) ** 2, np.full((d, d), 1 / d), atol=1e-12)


def test_two_design_requires_prime():
    for d in (4, 6, 9):
        with pytest.raises(ValueError):
            two_design_strategy(d)


# ---------------------------------------------------------------------------
# spectral_gap edge cases


def test_spectral_gap_global_strategy():
    tgt = target_state([0.7, 0.3], 2)
    op = HermitianOperator(tgt.density())
    assert spectral_gap(op, tgt).beta == pytest.approx(0.0, abs=1e-12)


def test_spectral_gap_rejects_unfixed_target():
    tgt = target_state([0.7, 0.3], 2)
    with pytest.raises(ValueError):
        spectral_gap(HermitianOperator(np.eye(4) * 0.5), tgt)


# ---------------------------------------------------------------------------
# partial transpose and PPT


def test_partial_transpose_identity():
    op = HermitianOperator(np.eye(6))
    np.testing.assert_array_equal(partial_transpose(op, (2, 3)).entries, np.eye(6))


def test_partial_transpose_mes_projector():
    st = target_state(SchmidtSpectrum.uniform(2), 2)
    pt = partial_transpose(HermitianOperator(st.density()), (2, 2))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(pt.entries)), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_involution(rng):
    z = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    op = HermitianOperator(z + z.conj().T)
    back = partial_transpose(partial_transpose(op, (2, 3)), (2, 3))
    np.testing.assert_allclose(back.entries, op.entries, atol=1e-14)


def test_partial_transpose_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_transpose(HermitianOperator(np.eye(6)), (2, 2))


def test_is_ppt_entangled_projector():
    st = target_state(SchmidtSpectrum.uniform(2), 2)
    assert not is_ppt(HermitianOperator(st.density()), (2, 2))


def test_omega_sep_is_ppt_with_complement(rng):
    for _ in range(10):
        s = SchmidtSpectrum(random_spectrum(rng, 2))
        om = omega_sep(s)
        assert is_ppt(om, (2, 2))
        assert is_ppt(HermitianOperator(np.eye(4) - om.entries), (2, 2))


# ---------------------------------------------------------------------------
# value types


def test_hermitian_operator_validation():
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        HermitianOperator(np.zeros((2, 3)))


def test_operator_json_and_bytes_round_trip(rng):
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    op = HermitianOperator(z + z.conj().T)
    back = HermitianOperator.from_json(op.to_json())
    np.testing.assert_allclose(back.entries, op.entries, atol=1e-15)
    back = HermitianOperator.from_bytes(3, op.to_bytes())
    np.testing.assert_array_equal(back.entries, op.entries)


def test_strategy_validation():
    tgt = target_state(SchmidtSpectrum.uniform(2), 2)
    proj = HermitianOperator(np.eye(4))
    with pytest.raises(ValueError):
        Strategy(tests=((0.5, proj), (0.4, proj)), target=tgt)  # weights
    bad = HermitianOperator(np.diag([1.0, 0, 0, 0]))
    with pytest.raises(ValueError):
        Strategy(tests=((1.0, bad),), target=tgt)  # does not fix target
    soft = HermitianOperator(np.diag([1.0, 0.5, 0.5, 1.0]))
    with pytest.raises(ValueError):
        Strategy(tests=((1.0, soft),), target=tgt)  # not a projector
    Strategy(tests=((1.0, soft),), target=tgt, projective=False)  # fine as general test


def test_strategy_json_export():
    import json

    strat = omega_mub(SchmidtSpectrum.uniform(2))
    payload = json.loads(strat.to_json())
    assert payload["dim"] == 4
    assert len(payload["tests"]) == 2
    assert payload["tests"][0]["weight"] == pytest.approx(0.5)
