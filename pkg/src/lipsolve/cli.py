"""Command-line front end.

Subcommands: solve (one instance from CSV), denoise (sliding-patch image
denoising), bench (cross-solver iteration table), verify (invariant
checks).  Exit codes: 0 success, 1 IO/config error, 2 infeasible.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import baselines, bench, denoise, figures, flips
from .errors import Infeasible, InvalidBounds, LipError
from .objective import (
    eta_bar_lower,
    eta_hat_candidate,
    evaluate,
    make_instance,
    regularity_constants,
)
from .operators import IdentityOperator, load_dense_csv

EXIT_OK = 0
EXIT_IO = 1
EXIT_INFEASIBLE = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lipsolve",
        description="Solvers for l1-constrained linear inverse problems "
        "with a sliding-patch denoising harness.",
    )
    parser.add_argument("--config", help="key=value config file; flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for all randomness")
    common.add_argument("--max-iters", type=int, default=50,
                        help="iteration budget (default 50)")
    common.add_argument("--solver", default="flips",
                        choices=["flips", "cp", "acp", "csalsa", "pagd"])
    common.add_argument("--oracle", default="quadratic",
                        choices=["linear", "quadratic", "accelerated-quadratic"],
                        help="direction oracle for the flips solver")
    common.add_argument("--inv-beta", type=float, default=None,
                        help="1/beta step for the quadratic oracles")
    common.add_argument("--rho", type=float, default=0.7,
                        help="momentum weight (default 0.7)")
    common.add_argument("--theta", type=float, default=0.6,
                        help="primal-dual extrapolation (default 0.6)")
    common.add_argument("--mu", type=float, default=None,
                        help="ADMM penalty (default 2.5, or 3 for m >= 64)")
    common.add_argument("--inv-b", type=float, default=2.2e-6,
                        help="step for accelerated gradient descent")
    common.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering next to the CSV output")

    p_solve = sub.add_parser("solve", parents=[common],
                             help="solve one instance from CSV data")
    p_solve.add_argument("--x", required=True,
                         help="CSV file with the measurement vector")
    p_solve.add_argument("--op", default="identity",
                         help='"identity" or a dense-operator CSV path')
    p_solve.add_argument("--eps", type=float, required=True,
                         help="residual level")
    p_solve.add_argument("--eps-bar", type=float, default=None,
                         help="tightened cone level (default 0.99 eps)")

    img_common = argparse.ArgumentParser(add_help=False)
    img_common.add_argument("--image", default=None,
                            help="input PGM (P5); default: built-in 64x64")
    img_common.add_argument("--m", type=int, default=16,
                            help="patch side (default 16)")
    img_common.add_argument("--sigma", type=float, default=0.0055,
                            help="noise variance (default 0.0055)")
    img_common.add_argument("--eps-rule", default="pixel-count",
                            choices=["pixel-count", "side"],
                            help="residual level rule per patch")

    p_den = sub.add_parser("denoise", parents=[common, img_common],
                           help="sliding-patch denoising")
    p_den.add_argument("--stride", type=int, default=1)

    p_bench = sub.add_parser("bench", parents=[common, img_common],
                             help="cross-solver iteration benchmark")
    p_bench.add_argument("--stride", type=int, default=None,
                         help="patch subsampling stride (default: patch side)")
    p_bench.add_argument("--thresh", type=float, default=5e-3,
                         help="distance-to-reference threshold")
    p_bench.add_argument("--ref-cache", default=None,
                         help="npz cache for the reference solutions")
    p_bench.add_argument("--bench-iters", type=int, default=200,
                         help="per-solver iteration cap in the benchmark")

    sub.add_parser("verify", parents=[common, img_common],
                   help="run the invariant checks")
    return parser


def apply_config_file(parser, argv):
    """Load key=value defaults from --config; explicit flags still win."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            lines = fh.readlines()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    overrides = {}
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"bad config line {line!r}; expected key=value")
        key, value = (tok.strip() for tok in line.split("=", 1))
        overrides[key.replace("-", "_")] = value
    for action_parser in [parser] + [
        p for a in parser._subparsers._group_actions for p in a.choices.values()
    ]:
        valid = {a.dest: a for a in action_parser._actions}
        for key, value in overrides.items():
            if key in valid and valid[key].type is not None:
                action_parser.set_defaults(**{key: valid[key].type(value)})
            elif key in valid:
                action_parser.set_defaults(**{key: value})


def _flips_config(args, patch_side=None):
    inv_beta = args.inv_beta
    if inv_beta is None:
        inv_beta = denoise.DEFAULT_INV_BETA.get(patch_side, 1e-3)
    return flips.FlipsConfig(oracle=args.oracle, inv_beta=inv_beta,
                             rho=args.rho, max_iters=args.max_iters)


def _dispatch_solver(inst, args, patch_side=None):
    if args.solver == "flips":
        return flips.flips_solve(inst, _flips_config(args, patch_side))
    if args.solver == "cp":
        cfg = baselines.default_cp_config(inst, max_iters=args.max_iters,
                                          theta=args.theta)
        return baselines.cp_solve(inst, cfg)
    if args.solver == "csalsa":
        cfg = baselines.default_csalsa_config(inst, max_iters=args.max_iters)
        if args.mu is not None:
            cfg.mu = args.mu
        return baselines.csalsa_solve(inst, cfg)
    if args.solver == "pagd":
        return baselines.pagd_solve(inst, args.inv_b, max_iters=args.max_iters)
    reg = regularity_constants(inst, eta_bar_lower(inst), eta_hat_candidate(inst))
    cfg = baselines.acp_config_from_constants(inst, reg,
                                              max_iters=args.max_iters)
    h, _, trace = baselines.acp_solve(inst, cfg)
    return evaluate(inst, h).eta * h, trace


def cmd_solve(args):
    try:
        x = np.loadtxt(args.x, delimiter=",").ravel()
        if args.op == "identity":
            op = IdentityOperator(x.size)
        else:
            op = load_dense_csv(args.op)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        inst = make_instance(x, op, args.eps, eps_bar=args.eps_bar)
        f_star, trace = _dispatch_solver(inst, args)
    except (Infeasible, InvalidBounds) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    os.makedirs(args.out_dir, exist_ok=True)
    resid = float(np.linalg.norm(x - op.apply(f_star)))
    cost = inst.cost.value(f_star)
    np.savetxt(os.path.join(args.out_dir, "f_star.csv"), f_star,
               delimiter=",")
    trace.to_csv(os.path.join(args.out_dir, "trace.csv"))
    with open(os.path.join(args.out_dir, "summary.csv"), "w") as fh:
        fh.write("key,value\n")
        fh.write(f"cost,{cost:.12f}\n")
        fh.write(f"residual,{resid:.12f}\n")
        fh.write(f"eps,{inst.eps:.12f}\n")
        fh.write(f"iterations,{len(trace)}\n")
    if not args.no_figures:
        figures.render_trace(os.path.join(args.out_dir, "trace.png"), trace,
                             title=f"{args.solver} convergence")
    print(f"cost {cost:.6f}  residual {resid:.6f}  (eps {inst.eps})")
    return EXIT_OK


def _load_image(args):
    if args.image is None:
        return denoise.synthetic_image(64, seed=0)
    return denoise.load_pgm(args.image)


def cmd_denoise(args):
    try:
        clean = _load_image(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    noisy = denoise.add_gaussian_noise(clean, args.sigma, args.seed)
    solver_cfg = None
    if args.solver == "flips":
        solver_cfg = _flips_config(args, patch_side=args.m)
    elif args.solver == "pagd":
        solver_cfg = (args.inv_b, args.max_iters)
    elif args.solver == "acp":
        solver_cfg = args.max_iters
    recovered, report = denoise.denoise(
        noisy, args.m, solver=args.solver, solver_cfg=solver_cfg,
        eps_rule=args.eps_rule, sigma_var=args.sigma, stride=args.stride,
        img_clean=clean,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    denoise.save_pgm(os.path.join(args.out_dir, "recovered.pgm"), recovered)
    denoise.save_pgm(os.path.join(args.out_dir, "noisy.pgm"), noisy)
    report.to_csv(os.path.join(args.out_dir, "report.csv"))
    denoise.histogram_to_csv(os.path.join(args.out_dir, "efstar_hist.csv"),
                             report.hist_counts, report.hist_edges)
    if not args.no_figures:
        figures.render_histogram(
            os.path.join(args.out_dir, "efstar_hist.png"),
            report.hist_counts, report.hist_edges, report.eps**2,
            title="per-patch separation",
        )
        figures.render_image_panel(
            os.path.join(args.out_dir, "panels.png"),
            [clean, noisy, recovered],
            ["clean",
             f"noisy {report.psnr_noisy:.2f} dB",
             f"recovered {report.psnr_recovered:.2f} dB"],
        )
    print(f"PSNR noisy {report.psnr_noisy:.4f} dB -> recovered "
          f"{report.psnr_recovered:.4f} dB over {report.n_patches} patches")
    return EXIT_OK


def cmd_bench(args):
    try:
        clean = _load_image(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    noisy = denoise.add_gaussian_noise(clean, args.sigma, args.seed)
    results, elapsed = bench.bench_solvers(
        noisy, args.m, sigma_var=args.sigma, stride=args.stride,
        thresh=args.thresh, max_iters=args.bench_iters,
        eps_rule=args.eps_rule, ref_cache=args.ref_cache,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    bench.bench_csv(os.path.join(args.out_dir, "bench.csv"), results)
    table = bench.bench_table(results)
    with open(os.path.join(args.out_dir, "bench.md"), "w") as fh:
        fh.write(table)
    if not args.no_figures:
        figures.render_bench(os.path.join(args.out_dir, "bench.png"),
                             results, title=f"m={args.m} patches")
    print(table, end="")
    print(f"({elapsed:.1f} s)")
    return EXIT_OK


def cmd_verify(args):
    """Spot-check the core invariants on seeded random instances."""
    from .objective import e_residual, grad_eta, identity_oracle_solution

    rng = np.random.default_rng(args.seed)
    failures = []

    for trial in range(5):
        n = int(rng.integers(8, 17))
        x = rng.standard_normal(n)
        eps = 0.4 * float(np.linalg.norm(x))
        inst = make_instance(x, IdentityOperator(n), eps)
        f_ref = identity_oracle_solution(x, eps)
        cfg = flips.FlipsConfig(oracle="quadratic", inv_beta=1e-1,
                                max_iters=200)
        f_star, trace = flips.flips_solve(inst, cfg)
        rel = abs(inst.cost.value(f_star) - inst.cost.value(f_ref)) / max(
            inst.cost.value(f_ref), 1e-12)
        if rel > 1e-3:
            failures.append(f"oracle agreement trial {trial}: rel err {rel:.2e}")
        if any(np.diff(trace.eta) > 1e-12):
            failures.append(f"monotonicity trial {trial}")
        resid = float(np.linalg.norm(x - f_star))
        if resid > eps + 1e-8:
            failures.append(f"feasibility trial {trial}: resid {resid}")
        # finite-difference gradient check at the initial point
        h = f_star / inst.cost.value(f_star)
        g = grad_eta(inst, h)
        delta = 1e-6
        for _ in range(3):
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            from .objective import eta as eta_fn
            fd = (eta_fn(inst, h + delta * v) - eta_fn(inst, h - delta * v)) / (
                2.0 * delta)
            if abs(fd - float(g @ v)) > 1e-4 * max(1.0, abs(fd)):
                failures.append(f"gradient check trial {trial}")
                break

    clean = denoise.synthetic_image(32, seed=0)
    noisy = denoise.add_gaussian_noise(clean, args.sigma, args.seed)
    _, report = denoise.denoise(noisy, 8, solver="flips",
                                sigma_var=args.sigma)
    if float(report.e_fstar.max()) >= report.eps**2:
        failures.append("separation property violated")

    if failures:
        for msg in failures:
            print(f"FAIL {msg}", file=sys.stderr)
        return EXIT_IO
    print("all invariant checks passed")
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    handler = {
        "solve": cmd_solve,
        "denoise": cmd_denoise,
        "bench": cmd_bench,
        "verify": cmd_verify,
    }[args.command]
    try:
        return handler(args)
    except LipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
