"""Command-line front end: planning, sweeps, Monte Carlo, oracle checks, figures.

Every command is deterministic given its parameters and seed; file outputs
carry a header line recording version, command line, and seed so runs can
be reproduced byte for byte. Exit codes: 0 success, 1 usage error,
2 infeasible request, 3 internal check failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, montecarlo, oracle, selfcheck, separation, spectra, twoqubit
from .operators import omega_lc_h, omega_mub, omega_opt, omega_sep, omega_sep_h, two_design_strategy
from .separation import InfeasibleError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_CHECK = 3

DEFAULT_SEED = 0

FIG_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5")

# Log-spaced local dimensions for the ensemble figure.
FIG3_DIMS = (2, 3, 4, 5, 6, 8, 10, 13, 16, 20, 25, 32, 40, 50, 63, 79, 100)
FIG4_DIMS = (10, 100)
FIG_RANKS = (1, 2, 5)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        raise _UsageError(message)


def _default_seed() -> int:
    env = os.environ.get("HDECERT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise _UsageError(f"HDECERT_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def parse_spectrum(text: str) -> spectra.SchmidtSpectrum:
    """Parse comma-separated decimals or fractions like ``2/5,2/5,1/5``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise _UsageError("empty spectrum")
    try:
        vals = [float(Fraction(p)) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise _UsageError(f"cannot parse spectrum {text!r}: {exc}") from exc
    total = sum(vals)
    if 1e-12 < abs(total - 1.0) <= 1e-9:
        print(f"warning: spectrum sums to {total!r}; renormalizing", file=sys.stderr)
    try:
        return spectra.SchmidtSpectrum(np.asarray(vals))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _resolve_spectrum(args) -> spectra.SchmidtSpectrum:
    if getattr(args, "mes", None) is not None:
        return spectra.SchmidtSpectrum.uniform(args.mes)
    if getattr(args, "spectrum", None):
        return parse_spectrum(args.spectrum)
    raise _UsageError("one of --spectrum or --mes is required")


def _header(args_seed: int) -> str:
    cmd = " ".join(["hdecert", *sys.argv[1:]]) if sys.argv[1:] else "hdecert"
    return f"# hdecert {__version__} | cmd: {cmd} | seed: {args_seed}"


def _write_csv(path: Path, columns, rows, seed: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(_header(seed) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {path}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit_json(payload: dict, args, seed: int) -> None:
    text = json.dumps(payload, indent=2)
    out = getattr(args, "output", None)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(_header(seed) + "\n")
            fh.write(text + "\n")
        print(f"wrote {path}")
    else:
        print(text)


# --------------------------------------------------------------------------
# subcommands


def _cmd_plan(args) -> int:
    spec = _resolve_spectrum(args)
    plan = separation.build_plan(spec, r=args.r, delta=args.delta, strategy=args.strategy, E=args.E)
    _emit_json(json.loads(plan.to_json()), args, args.seed)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    spec = _resolve_spectrum(args)
    if args.E is not None:
        b = separation.bounds_limited(spec, args.r, args.E)
        p_mub = separation.sep_prob_mub(spec, args.r, args.E)
    else:
        b = separation.bounds_rank(spec, args.r)
        p_mub = separation.sep_prob_mub(spec, args.r)
    payload = {
        "spectrum": list(spec.values),
        "r": args.r,
        "E": args.E,
        "psep_lb": b.psep_lb,
        "psep_h": b.psep_h,
        "plc_ub": b.plc_ub,
        "p_mub": p_mub,
    }
    _emit_json(payload, args, args.seed)
    return EXIT_OK


def _cmd_twoqubit(args) -> int:
    if args.theta is not None:
        t = args.theta
        fn = twoqubit.theta_functions(t, args.p)
        payload = {
            "theta": t,
            "concurrence": twoqubit.TwoQubitTarget(t).concurrence,
            "kappa": fn.kappa,
            "q": fn.q,
            "h": fn.h,
            "a_star": fn.a_star,
            "p_star": fn.p_star,
            "tilde_p": fn.tilde_p,
            "p2_star": twoqubit.p2_star(t),
            "p3_star": twoqubit.p3_star(t),
            "P_sep": twoqubit.sep_prob_two_qubit(t),
            "P_omega1": twoqubit.p_closed(t, 1.0),
            "P_omega0": twoqubit.p_closed(t, 0.0),
            "theta_star": twoqubit.theta_star(),
            "theta2_star": twoqubit.theta2_star(),
            "theta3_star": twoqubit.theta3_star(),
        }
        _emit_json(payload, args, args.seed)
        return EXIT_OK
    thetas = np.linspace(args.theta_min, args.theta_max, args.grid)
    rows = twoqubit.sweep_rows(thetas)
    out = Path(args.output or "twoqubit_sweep.csv")
    _write_csv(out, twoqubit.SWEEP_COLUMNS, rows, args.seed)
    return EXIT_OK


def _fig1_rows(d: int, points: int):
    rows = []
    for r in range(1, d):
        e_max = (d - r) / d
        for e in np.linspace(0.0, e_max, points, endpoint=False):
            rows.append(
                (
                    d,
                    r,
                    float(e),
                    separation.sep_prob_mes_limited(d, r, float(e)),
                    separation.sep_prob_mub(spectra.SchmidtSpectrum.uniform(d), r, float(e)),
                )
            )
    return rows


def _fig2_rows(delta: float):
    rows = []
    for r in FIG_RANKS:
        for d in range(max(2, r + 1), 101):
            n_opt = separation.tests_required(separation.sep_prob_mes_rank(d, r), delta)
            n_mub = separation.tests_required(
                separation.sep_prob_mub(spectra.SchmidtSpectrum.uniform(d), r), delta
            )
            rows.append((d, r, n_opt, n_mub))
    return rows


def _fig3_rows(samples: int, seed: int, threads: int):
    rows = []
    for d in FIG3_DIMS:
        for r in FIG_RANKS:
            if r > d - 1:
                continue
            st = montecarlo.ensemble_stats(d, r, samples=samples, seed=seed, threads=threads)
            mes = st.mes_value
            rows.append(
                (
                    d,
                    r,
                    st.mean_psep_lb,
                    st.mean_psep_h,
                    st.mean_plc_ub,
                    st.mean_psep_lb / mes,
                    st.mean_psep_h / mes,
                    st.mean_plc_ub / mes,
                )
            )
    return rows


def _fig4_rows(samples: int, seed: int, threads: int):
    rows = []
    for d in FIG4_DIMS:
        for r in FIG_RANKS:
            if r > d - 1:
                continue
            st = montecarlo.ensemble_stats(d, r, samples=samples, seed=seed, threads=threads)
            width = st.bin_edges[1] - st.bin_edges[0]
            centers = (st.bin_edges[:-1] + st.bin_edges[1:]) / 2
            dens = {k: st.histograms[k] / (st.samples * width) for k in montecarlo.HIST_QUANTITIES}
            for i, center in enumerate(centers):
                rows.append(
                    (
                        d,
                        r,
                        float(center),
                        float(dens["psep_lb"][i]),
                        float(dens["psep_h"][i]),
                        float(dens["plc_ub"][i]),
                    )
                )
    return rows


def _cmd_fig(args) -> int:
    outdir = Path(args.outdir)
    seed = args.seed
    if args.name == "fig1":
        _write_csv(outdir / "fig1.csv", ("d", "r", "E", "P_opt", "P_mub"), _fig1_rows(args.d, args.points), seed)
    elif args.name == "fig2":
        _write_csv(outdir / "fig2.csv", ("d", "r", "N_opt", "N_mub"), _fig2_rows(args.delta), seed)
    elif args.name == "fig3":
        _write_csv(
            outdir / "fig3.csv",
            ("d", "r", "mean_lb", "mean_h", "mean_ub", "ratio_lb", "ratio_h", "ratio_ub"),
            _fig3_rows(args.samples, seed, args.threads),
            seed,
        )
    elif args.name == "fig4":
        _write_csv(
            outdir / "fig4.csv",
            ("d", "r", "bin_center", "density_lb", "density_h", "density_ub"),
            _fig4_rows(args.samples, seed, args.threads),
            seed,
        )
    else:  # fig5
        thetas = np.linspace(args.theta_min, math.pi / 4, args.points)
        _write_csv(outdir / "fig5.csv", twoqubit.SWEEP_COLUMNS, twoqubit.sweep_rows(thetas), seed)
    return EXIT_OK


def _cmd_montecarlo(args) -> int:
    seed = args.seed
    if args.mode == "stats":
        st = montecarlo.ensemble_stats(
            args.d, args.r, samples=args.samples, seed=seed, d_b=args.d_b, threads=args.threads
        )
        payload = {
            "d_a": st.d_a,
            "d_b": st.d_b,
            "r": st.r,
            "samples": st.samples,
            "seed": st.seed,
            "mean_psep_lb": st.mean_psep_lb,
            "mean_psep_h": st.mean_psep_h,
            "mean_plc_ub": st.mean_plc_ub,
            "mean_u_r": st.mean_u_r,
            "mean_s0": st.mean_s0,
            "mes_value": st.mes_value,
            "tail_fractions": st.tail_fractions,
        }
        _emit_json(payload, args, seed)
    elif args.mode == "tail":
        eps = [float(Fraction(p)) for p in args.epsilons.split(",")]
        out = montecarlo.tail_check(args.d, args.r, eps, samples=args.samples, seed=seed)
        payload = {str(k): {"empirical": v[0], "bound": v[1]} for k, v in out.items()}
        _emit_json(payload, args, seed)
    else:  # sim
        spec = _resolve_spectrum(args)
        strat = omega_mub(spec)
        if args.E is not None or args.r is not None:
            r = args.r if args.r is not None else 1
            true_state = separation.adversarial_state(spec, r, args.E or 0.0)
            label = f"adversarial(r={r},E={args.E or 0.0})"
        else:
            from .operators import target_state

            true_state = target_state(spec, spec.d)
            label = "target"
        trace = montecarlo.simulate_protocol(
            strat, true_state, args.n, seed, strategy_id="mub", state_label=label
        )
        out = Path(args.output or "sim.csv")
        _write_csv(out, ("round", "outcome"), list(enumerate(trace.outcomes.tolist())), seed)
    return EXIT_OK


def _build_operator(args):
    if args.operator == "opt":
        if args.d is None:
            raise _UsageError("--d is required for the opt operator")
        return omega_opt(args.d), (args.d, args.d)
    if args.operator == "family":
        if args.theta is None:
            raise _UsageError("--theta is required for the family operator")
        return twoqubit.omega_family(args.theta, args.p if args.p is not None else 0.0), (2, 2)
    spec = _resolve_spectrum(args)
    d = spec.d
    if args.operator == "sep":
        return omega_sep(spec), (d, d)
    if args.operator == "seph":
        return omega_sep_h(spec), (d, d)
    if args.operator == "lch":
        return omega_lc_h(spec), (d, d)
    if args.operator == "mub":
        return omega_mub(spec).operator, (d, d)
    if args.operator == "design":
        return two_design_strategy(d).operator, (d, d)
    raise _UsageError(f"unknown operator {args.operator!r}")


def _cmd_oracle(args) -> int:
    op, dims = _build_operator(args)
    cfg = oracle.OracleConfig(
        restarts=args.restarts,
        grid_points=args.grid_points,
        max_iterations=args.max_iterations,
        convergence_tol=args.tol,
        seed=args.seed,
    )
    if args.set == "product":
        res = oracle.max_product(op, dims, cfg)
    elif args.set == "rank":
        if args.r is None:
            raise _UsageError("--r is required for the rank-constrained set")
        res = oracle.max_rank_r(op, dims, args.r, cfg)
    else:  # limited
        if args.r is None or args.E is None:
            raise _UsageError("--r and --E are required for the limited set")
        res = oracle.max_limited(op, dims, args.r, args.E, cfg)
    _emit_json(json.loads(res.to_json()), args, args.seed)
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        ok = selfcheck.run_checks(
            level=args.level, seed=args.seed, inject_corruption=args.inject_corruption
        )
    except Exception as exc:  # a check that raises is still a failed check
        print(f"verification aborted: {exc}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK if ok else EXIT_CHECK


# --------------------------------------------------------------------------
# parser wiring


def _add_spectrum_options(p, include_mes=True):
    p.add_argument("--spectrum", help="comma-separated values, decimals or fractions (2/5,2/5,1/5)")
    if include_mes:
        p.add_argument("--mes", type=int, help="maximally entangled target of this local dimension")


def build_parser() -> _Parser:
    parser = _Parser(prog="hdecert", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hdecert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute a certification plan (P and N)")
    _add_spectrum_options(p)
    p.add_argument("--r", type=int, required=True, help="certify Schmidt number > r")
    p.add_argument("--E", type=float, default=None, help="tail-measure allowance of the adversary")
    p.add_argument("--delta", type=float, required=True, help="significance level in (0,1)")
    p.add_argument("--strategy", choices=separation.STRATEGY_IDS, default="seph")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("bounds", help="closed-form separation-probability bounds")
    _add_spectrum_options(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("twoqubit", help="two-qubit analysis (single angle or sweep)")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=120, help="sweep point count")
    p.add_argument("--theta-min", type=float, default=0.05)
    p.add_argument("--theta-max", type=float, default=math.pi / 4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_twoqubit)

    p = sub.add_parser("fig", help="emit plot-ready CSV data for a named figure")
    p.add_argument("name", choices=FIG_NAMES)
    p.add_argument("--outdir", default=".")
    p.add_argument("--d", type=int, default=4, help="local dimension (fig1)")
    p.add_argument("--points", type=int, default=120, help="grid points (fig1, fig5)")
    p.add_argument("--delta", type=float, default=0.01, help="significance (fig2)")
    p.add_argument("--samples", type=int, default=10_000, help="Haar samples (fig3, fig4)")
    p.add_argument("--theta-min", type=float, default=0.05, help="sweep start (fig5)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_fig)

    p = sub.add_parser("montecarlo", help="ensemble statistics, tail check, or protocol simulation")
    p.add_argument("--mode", choices=("stats", "tail", "sim"), default="stats")
    p.add_argument("--d", type=int, help="local dimension (stats, tail)")
    p.add_argument("--d-b", type=int, default=None, help="second local dimension (stats)")
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--epsilons", default="0,0.1,0.3", help="comma-separated deviations (tail)")
    p.add_argument("--n", type=int, default=10_000, help="protocol rounds (sim)")
    _add_spectrum_options(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("oracle", help="brute-force maximization over a constrained state set")
    p.add_argument("--operator", choices=("opt", "sep", "seph", "lch", "mub", "design", "family"), required=True)
    p.add_argument("--d", type=int, default=None)
    _add_spectrum_options(p, include_mes=True)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--set", choices=("product", "rank", "limited"), default="product")
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--grid-points", type=int, default=64)
    p.add_argument("--max-iterations", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("verify", help="run the internal consistency battery")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--inject-corruption", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is None:
            args.seed = _default_seed()
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
