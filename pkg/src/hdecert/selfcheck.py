"""Internal consistency battery behind the ``verify`` command.

Runs the oracle-vs-closed-form suite and the invariant checks; every check
prints one PASS/FAIL line. The ``fast`` level covers small dimensions and
root residuals, ``full`` adds the Monte Carlo gates and protocol
simulation. Returns False on any failure.
"""

from __future__ import annotations

import math

import numpy as np

from . import montecarlo, oracle, separation, spectra, twoqubit
from .operators import (
    HermitianOperator,
    is_ppt,
    omega_lc_h,
    omega_mub,
    omega_opt,
    omega_sep,
    omega_sep_h,
    spectral_gap,
    target_state,
    two_design_strategy,
)

__all__ = ["run_checks"]


def _random_spectrum(rng: np.random.Generator, d: int) -> spectra.SchmidtSpectrum:
    v = rng.dirichlet(np.ones(d))
    return spectra.SchmidtSpectrum(v)


class _Runner:
    def __init__(self, report):
        self.report = report
        self.failures = 0
        self.count = 0

    def check(self, name: str, condition: bool, detail: str = "") -> None:
        self.count += 1
        if condition:
            self.report(f"  [PASS] {name}")
        else:
            self.failures += 1
            self.report(f"  [FAIL] {name}  {detail}")


def run_checks(level: str = "fast", seed: int = 0, inject_corruption: bool = False, report=print) -> bool:
    """Run the battery; returns True iff every check passed."""
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    rng = np.random.default_rng(seed)
    run = _Runner(report)

    report(f"verification level={level} seed={seed}")

    # --- spectral-gap closed forms -------------------------------------
    worst = 0.0
    for d in range(2, 7):
        for _ in range(10):
            s = _random_spectrum(rng, d)
            tgt = target_state(s, d)
            root = math.sqrt(s.s0 * s.s1)
            om = omega_sep(s)
            if inject_corruption:
                # Negative control: bump a diagonal entry the target does
                # not touch, so the operator stays valid but the gap moves.
                m = om.entries.copy()
                m[1, 1] += 1e-3
                om = HermitianOperator(m)
                inject_corruption = False
            worst = max(worst, abs(spectral_gap(om, tgt).beta - root))
            worst = max(worst, abs(spectral_gap(omega_sep_h(s), tgt).beta - root / (1 + root)))
            worst = max(
                worst,
                abs(spectral_gap(omega_lc_h(s), tgt).beta - (s.s0 + s.s1) / (2 + s.s0 + s.s1)),
            )
    run.check("gap closed forms (sep, sep-H, LC-H)", worst < 1e-9, f"worst dev {worst:.2e}")

    # --- MUB strategy ----------------------------------------------------
    worst = 0.0
    worst_tr = 0.0
    for d in (2, 3, 4, 5):
        s = _random_spectrum(rng, d)
        strat = omega_mub(s)
        worst = max(worst, abs(strat.gap().beta - 0.5))
        r = int(rng.integers(1, d))
        e_prime = spectra.e_r(s, r)
        E = float(rng.uniform(0.0, e_prime * 0.9))
        adv = separation.adversarial_state(s, r, E)
        got = separation.pass_prob(strat.operator, adv)
        want = separation.sep_prob_mub(s, r, E)
        worst_tr = max(worst_tr, abs(got - want))
    run.check("MUB gap equals 1/2", worst < 1e-9, f"worst dev {worst:.2e}")
    run.check("MUB pass prob on adversarial state", worst_tr < 1e-9, f"worst dev {worst_tr:.2e}")

    # --- two-design identity --------------------------------------------
    dims = (2, 3) if level == "fast" else (2, 3, 5, 7)
    worst = 0.0
    for d in dims:
        strat = two_design_strategy(d)
        worst = max(worst, float(np.max(np.abs(strat.operator.entries - omega_opt(d).entries))))
    run.check(f"two-design identity d={dims}", worst < 1e-9, f"worst dev {worst:.2e}")

    # --- homogeneous beta ordering ---------------------------------------
    ok = True
    for d in range(2, 7):
        for _ in range(20):
            s = _random_spectrum(rng, d)
            root = math.sqrt(s.s0 * s.s1)
            b_seph = root / (1 + root)
            b_lch = (s.s0 + s.s1) / (2 + s.s0 + s.s1)
            ok = ok and b_seph <= b_lch + 1e-12 and b_lch <= 1 / 3 + 1e-12
    run.check("homogeneous beta chain <= 1/3", ok)

    # --- PPT ---------------------------------------------------------------
    ok = True
    for _ in range(10):
        s = _random_spectrum(rng, 2)
        om = omega_sep(s)
        eye = HermitianOperator(np.eye(4))
        ok = ok and is_ppt(om, (2, 2))
        ok = ok and is_ppt(HermitianOperator(eye.entries - om.entries), (2, 2))
    worst = 0.0
    for th in np.linspace(0.1, math.pi / 4, 6):
        for p in (0.0, 0.5, 1.0):
            om = twoqubit.omega_family(th, p)
            comp = HermitianOperator(np.eye(4) - om.entries)
            ok = ok and is_ppt(om, (2, 2)) and is_ppt(comp, (2, 2))
            ev_num = np.sort(
                np.linalg.eigvalsh(
                    om.entries.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
                )
            )
            worst = max(worst, float(np.max(np.abs(ev_num - twoqubit.ppt_eigenvalues(th, p)))))
    run.check("separable family is PPT (both sides)", ok)
    run.check("PPT eigenvalues match closed forms", worst < 1e-10, f"worst dev {worst:.2e}")

    # --- two-qubit analysis ------------------------------------------------
    ts = twoqubit.theta_star()
    resid = abs(17 - 9 * math.cos(4 * ts) - 25 * math.sin(2 * ts) + 3 * math.sin(6 * ts))
    run.check("theta* residual < 1e-12", resid < 1e-12, f"residual {resid:.2e}")
    c, s_ = math.cos(ts), math.sin(ts)
    mid = 3 * c * c * s_ * s_ / (4 * c * s_ - 1)
    run.check(
        "branch continuity at theta*",
        abs(mid - twoqubit.p_closed(ts, 0.0)) < 1e-9,
        f"dev {abs(mid - twoqubit.p_closed(ts, 0.0)):.2e}",
    )
    run.check("P(pi/4) = 2/3", twoqubit.sep_prob_two_qubit(math.pi / 4) == 2.0 / 3.0)

    from scipy.optimize import minimize_scalar

    worst = 0.0
    for th in (0.52, 0.6, 0.7):
        ps = twoqubit.p_star(th)
        res = minimize_scalar(
            lambda p: twoqubit.p_closed(th, p), bounds=(0.0, 1.0), method="bounded",
            options={"xatol": 1e-12},
        )
        worst = max(worst, abs(twoqubit.p_closed(th, ps) - res.fun))
    run.check("p* agrees with golden-section oracle", worst < 1e-8, f"worst dev {worst:.2e}")

    worst = 0.0
    for _ in range(5):
        th = float(rng.uniform(0.05, math.pi / 4))
        p = float(rng.uniform(twoqubit.tilde_p(th), 1.0))
        eta, pp = twoqubit.wh_parameters(th, p)
        strat = twoqubit.wang_hayashi(th, eta, pp)
        worst = max(
            worst,
            float(np.max(np.abs(strat.operator.entries - twoqubit.omega_family(th, p).entries))),
        )
    run.check("five-test construction equals the family", worst < 1e-10, f"worst dev {worst:.2e}")

    # --- bounds sandwich ----------------------------------------------------
    ok = True
    for d in (3, 5, 8):
        for _ in range(50):
            s = _random_spectrum(rng, d)
            r = int(rng.integers(1, d))
            b = separation.bounds_rank(s, r)
            ok = ok and b.psep_lb <= b.psep_h + 1e-10 and b.psep_h <= b.plc_ub + 1e-10
            ok = ok and b.plc_ub <= 2 * b.psep_lb / (1 + s.s0) + 1e-10
            ok = ok and b.plc_ub <= 3 * b.psep_h / (2 + s.s0) + 1e-10
            padded = s.padded(d + 3)
            bp = separation.bounds_rank(padded, r)
            ok = ok and abs(b.plc_ub - bp.plc_ub) < 1e-12
    run.check("bounds sandwich and padding invariance", ok)

    # --- test counts ----------------------------------------------------------
    run.check(
        "spot test counts",
        separation.tests_required(separation.sep_prob_mes_rank(9, 1), 0.01) == 3
        and separation.tests_required(separation.sep_prob_mub(spectra.SchmidtSpectrum.uniform(4), 1), 0.01) == 10,
    )

    # --- oracle cross-checks ---------------------------------------------------
    cfg = oracle.OracleConfig(restarts=8, seed=seed)
    val = oracle.max_product(omega_opt(2), (2, 2), cfg).value
    run.check("oracle: optimal MES d=2 -> 2/3", abs(val - 2 / 3) < 1e-8, f"got {val!r}")
    val = oracle.max_product(twoqubit.omega_family(0.3, 0.0), (2, 2), cfg).value
    run.check("oracle: family endpoint theta=0.3", abs(val - math.cos(0.3) ** 2) < 1e-8, f"got {val!r}")
    val = oracle.max_rank_r(omega_opt(3), (3, 3), 2, cfg).value
    run.check("oracle: rank-2 on MES d=3 -> 3/4", abs(val - 0.75) < 1e-6, f"got {val!r}")
    val = oracle.max_limited(omega_opt(3), (3, 3), 1, 0.1, cfg).value
    want = separation.sep_prob_mes_limited(3, 1, 0.1)
    run.check("oracle: limited tail on MES d=3", abs(val - want) < 1e-6, f"got {val!r} want {want!r}")

    # --- Monte Carlo quick gate -------------------------------------------------
    st = montecarlo.ensemble_stats(6, 1, samples=500, seed=seed)
    lo, hi = st.mes_value, 4 * st.mes_value
    ok = lo <= st.mean_psep_lb and st.mean_plc_ub <= min(hi, 1.0) and st.mean_plc_ub <= st.mean_u_r
    st2 = montecarlo.ensemble_stats(6, 1, samples=500, seed=seed, threads=2)
    ok = ok and st.mean_plc_ub == st2.mean_plc_ub
    run.check("ensemble quick gate (bracket, U_r, determinism)", ok)

    if level == "full":
        for d in (10, 40):
            st = montecarlo.ensemble_stats(d, 2, samples=10_000, seed=seed)
            lo, hi = st.mes_value, min(4 * st.mes_value, 1.0)
            ok = (
                lo <= st.mean_psep_lb <= hi
                and lo <= st.mean_psep_h <= hi
                and lo <= st.mean_plc_ub <= hi
                and abs(st.mean_plc_ub - st.mean_psep_h) <= 0.01
            )
            run.check(f"ensemble full gate d={d}", ok)
        tails = montecarlo.tail_check(10, 1, (0.0, 0.1, 0.3), samples=10_000, seed=seed)
        ok = all(frac <= bound for frac, bound in tails.values())
        run.check("concentration tail below bound", ok)

        for r in (1, 2, 3):
            val = oracle.max_rank_r(omega_opt(4), (4, 4), r, cfg).value
            want = separation.sep_prob_mes_rank(4, r)
            run.check(f"oracle: rank-{r} on MES d=4", abs(val - want) < 1e-6, f"got {val!r}")

        spec = spectra.SchmidtSpectrum.uniform(4)
        strat = omega_mub(spec)
        adv = separation.adversarial_state(spec, 1, 0.0)
        trace = montecarlo.simulate_protocol(strat, adv, 100_000, seed, strategy_id="mub")
        sigma3 = 3 * math.sqrt(0.625 * 0.375 / 100_000)
        run.check(
            "protocol pass rate near 5/8",
            abs(trace.pass_rate - 0.625) <= 1.5 * sigma3,
            f"rate {trace.pass_rate}",
        )

        worst = 0.0
        for th in (0.3, 0.6, math.pi / 4):
            val = oracle.max_product_grid_2q(twoqubit.omega_family(th, twoqubit.p_star(th)))
            worst = max(worst, abs(val - twoqubit.sep_prob_two_qubit(th)))
        run.check("grid oracle matches branch formulas", worst < 1e-6, f"worst dev {worst:.2e}")

    report(f"{run.count - run.failures}/{run.count} checks passed")
    return run.failures == 0
