"""Command-line frontend.

Every computation is a subcommand writing CSV or JSON to a file or stdout;
`--plot` additionally renders the same data as a PNG.  Exit codes: 0 on
success, 1 on usage or domain errors, 2 when a verification residual
exceeds its tolerance.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from . import report
from .dist import Distribution, parse_distribution
from .errors import HoeffdingLabError
from .kernel import KernelSurface
from .marginal import (gaussian_characterization_residual, gaussian_tv_bound,
                       marginal_density, stein_kernel)
from .oracle import test_library, verification_rows
from .periodic import build_mixing, fourier_residual, verify_periodic_identity
from .spectral import nystrom_decompose, trace_summary

DEFAULT_TOL = 1e-6
MC_SIGMA_GATE = 4.0


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves 2
    # for residual breaches, so downgrade usage failures to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # accept values like "-2,2,5" (negative grid minimum) as arguments
        self._negative_number_matcher = re.compile(r"^-\d")


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"grid must be min,max,count; got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 2:
        raise ValueError(f"grid count must be >= 2, got {count}")
    if not hi > lo:
        raise ValueError(f"grid needs max > min, got {text!r}")
    return lo, hi, count


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("HOEFFDING_SEED")
    return int(env) if env else 0


def _default_grid(d: Distribution) -> tuple[float, float, int]:
    lo, hi = d.truncated_support()
    return lo, hi, 101


def _grid_points(args, d: Distribution) -> np.ndarray:
    lo, hi, count = args.grid if args.grid is not None else _default_grid(d)
    return np.linspace(lo, hi, count)


def _emit(args, kind: str, meta: dict, columns, rows) -> None:
    if args.format == "json":
        text = report.table_to_json(kind, meta, columns, rows)
    else:
        text = report.table_to_csv(columns, rows)
    report.write_text(text, args.output)


# ---------- subcommand bodies ----------


def _cmd_kernel(args) -> int:
    d = parse_distribution(args.dist)
    xs = _grid_points(args, d)
    surface = KernelSurface(d)
    values = surface.grid(xs, xs)
    columns, rows = report.grid_to_rows(xs, xs, values)
    _emit(args, "kernel", {"distribution": d.spec()}, columns, rows)
    if args.plot:
        from . import plots
        plots.heatmap(xs, xs, values, f"Hoeffding kernel, {d.spec()}", args.plot)
    return 0


def _cmd_marginal(args) -> int:
    d = parse_distribution(args.dist)
    xs = _grid_points(args, d)
    h = np.asarray(marginal_density(d, xs))
    if d.atoms() is None:
        tau = np.asarray(stein_kernel(d, xs))
        rows = [(float(x), float(hv), float(tv)) for x, hv, tv in zip(xs, h, tau)]
    else:
        rows = [(float(x), float(hv), "") for x, hv in zip(xs, h)]
    _emit(args, "marginal", {"distribution": d.spec()}, ["x", "h", "tau"], rows)
    if args.plot:
        from . import plots
        plots.curve(xs, h, f"marginal density h, {d.spec()}", "h(x)", args.plot)
    return 0


def _cmd_stein(args) -> int:
    d = parse_distribution(args.dist)
    xs = _grid_points(args, d)
    tau = np.asarray(stein_kernel(d, xs))
    meta = {"distribution": d.spec(),
            "tv_bound": gaussian_tv_bound(d),
            "characterization_residual": gaussian_characterization_residual(d)}
    rows = [(float(x), float(t)) for x, t in zip(xs, tau)]
    _emit(args, "stein", meta, ["x", "tau"], rows)
    if args.plot:
        from . import plots
        plots.curve(xs, tau, f"Stein kernel tau, {d.spec()}", "tau(x)", args.plot)
    return 0


def _cmd_spectrum(args) -> int:
    d = parse_distribution(args.dist)
    s = nystrom_decompose(d, n_nodes=args.nodes)
    summary = trace_summary(s, seed=args.seed)
    k = min(args.terms, s.n_resolved)
    if args.format == "json":
        payload = {"kind": "spectrum",
                   "distribution": d.spec(),
                   "n_nodes": args.nodes,
                   "alphas": [float(a) for a in s.eigenvalues[:args.terms]],
                   "trace_lhs": summary["eigen_sum"],
                   "trace_rhs": summary["diagonal_integral"],
                   "trace_mc": summary["half_mean_abs_difference"],
                   "trace_mc_stderr": summary["mc_stderr"],
                   "seed": summary["seed"],
                   "nodes": [float(x) for x in s.nodes]}
        report.write_text(report.payload_to_json(payload), args.output)
    else:
        columns = ["x"] + [f"f{n}" for n in range(1, k + 1)]
        rows = [tuple([float(x)] + [float(s.functions[i, n]) for n in range(k)])
                for i, x in enumerate(s.nodes)]
        report.write_text(report.table_to_csv(columns, rows), args.output)
    if args.plot:
        from . import plots
        plots.spectrum_decay(s.eigenvalues[s.eigenvalues > 0],
                             f"spectrum, {d.spec()}", args.plot)
    return 0


def _cmd_mixing(args) -> int:
    d = parse_distribution(args.dist)
    if args.c is None:
        return _usage_error("mixing requires --c")
    mm = build_mixing(d, args.c)
    lo, hi, count = args.grid if args.grid is not None else (0.0, 1.0, 101)
    xs = np.linspace(lo, hi, count)
    values = mm.density_grid(xs, xs)
    columns, rows = report.grid_to_rows(xs, xs, values)
    _emit(args, "mixing", {"distribution": d.spec(), "c": float(args.c)}, columns, rows)
    if args.plot:
        from . import plots
        plots.heatmap(xs, xs, values, f"mixing density, {d.spec()}, c={args.c:g}",
                      args.plot)
    return 0


def _cmd_verify(args) -> int:
    d = parse_distribution(args.dist)
    tol = args.tol
    if args.c is not None:
        mm = build_mixing(d, args.c)
        lib = test_library(periodic_only=True, max_frequency=args.kmax)
        rows = []
        for i, u in enumerate(lib):
            for v in lib[i:]:
                from .oracle import direct_covariance
                lhs = direct_covariance(d, u, v)
                rhs = mm.integrate_pair(u, v)
                rows.append((u.name, v.name, float(lhs), float(rhs),
                             float(abs(lhs - rhs))))
        columns = ["u", "v", "lhs", "rhs", "residual"]
        meta = {"distribution": d.spec(), "c": float(args.c), "tolerance": tol}
        worst = max(r[4] for r in rows)
        _emit(args, "verify-mixing", meta, columns, rows)
        if args.plot:
            from . import plots
            plots.residual_bars([f"{r[0]},{r[1]}" for r in rows],
                                [r[4] for r in rows], tol,
                                f"mixing identity residuals, {d.spec()}", args.plot)
        return 2 if worst > tol else 0
    rows = verification_rows(d, seed=args.seed, n_samples=args.samples)
    columns = ["distribution", "u", "v", "direct", "kernel", "mc", "stderr",
               "residual_kernel", "residual_mc", "seed"]
    table = [tuple(r[c] for c in columns) for r in rows]
    meta = {"distribution": d.spec(), "tolerance": tol, "seed": args.seed,
            "n_samples": args.samples}
    _emit(args, "verify-oracle", meta, columns, table)
    if args.plot:
        from . import plots
        plots.residual_bars([f"{r['u']},{r['v']}" for r in rows],
                            [r["residual_kernel"] for r in rows], tol,
                            f"oracle residuals, {d.spec()}", args.plot)
    breach = any(r["residual_kernel"] > tol
                 or r["residual_mc"] > MC_SIGMA_GATE * r["stderr"] + 1e-15
                 for r in rows)
    return 2 if breach else 0


def _cmd_fourier(args) -> int:
    d = parse_distribution(args.dist)
    tol = args.tol
    if args.c is not None:
        mm = build_mixing(d, args.c)
        rows = []
        for k in range(-args.kmax, args.kmax + 1):
            for l in range(-args.kmax, args.kmax + 1):
                lam = mm.fourier_coefficient(k, l)
                rows.append((k, l, lam.real, lam.imag,
                             float(fourier_residual(mm, k, l))))
        columns = ["k", "l", "lambda_re", "lambda_im", "residual"]
        meta = {"distribution": d.spec(), "c": float(args.c), "tolerance": tol}
        _emit(args, "fourier-mixing", meta, columns, rows)
        worst = max(r[4] for r in rows)
        if args.plot:
            from . import plots
            n = 2 * args.kmax + 1
            res = np.array([r[4] for r in rows]).reshape(n, n)
            ks = np.arange(-args.kmax, args.kmax + 1)
            plots.heatmap(ks, ks, res, f"Fourier residuals, {d.spec()}", args.plot)
        return 2 if worst > tol else 0
    surface = KernelSurface(d)
    lo, hi, count = args.grid if args.grid is not None else (-4.0, 4.0, 9)
    ts = np.linspace(lo, hi, count)
    rows = []
    for t in ts:
        for s in ts:
            if t == 0.0 or s == 0.0 or t + s == 0.0:
                continue  # closed form has removable singularities there
            quad = surface.fourier_by_quadrature(t, s)
            closed = surface.fourier(t, s)
            rows.append((float(t), float(s), quad.real, quad.imag,
                         float(abs(quad - closed))))
    columns = ["t", "s", "lambda_re", "lambda_im", "residual"]
    meta = {"distribution": d.spec(), "tolerance": tol}
    _emit(args, "fourier-kernel", meta, columns, rows)
    worst = max(r[4] for r in rows) if rows else 0.0
    if args.plot:
        from . import plots
        plots.residual_bars([f"{r[0]:g},{r[1]:g}" for r in rows],
                            [r[4] for r in rows], tol,
                            f"Fourier identity residuals, {d.spec()}", args.plot)
    return 2 if worst > tol else 0


def _usage_error(message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    return 1


# ---------- wiring ----------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hoeffding-lab",
                     description="Hoeffding kernels, Stein kernels, Mercer "
                                 "spectra and periodic mixing measures for "
                                 "one-dimensional laws.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default=None, with_c=False):
        p.add_argument("--dist", required=True,
                       help="distribution spec, e.g. uniform:a=0,b=1 or "
                            "beta:alpha=0.5,beta=0.5")
        p.add_argument("--grid", type=_parse_grid, default=grid_default,
                       metavar="MIN,MAX,COUNT", help="evaluation grid")
        if with_c:
            p.add_argument("--c", type=float, default=None,
                           help="marginal multiplier of the mixing measure")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=None, metavar="PATH",
                       help="output file (default: stdout)")
        p.add_argument("--plot", default=None, metavar="PNG",
                       help="also render the report as a figure")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (fallback: HOEFFDING_SEED, then 0)")

    p = sub.add_parser("kernel", help="Hoeffding kernel H on a square grid")
    common(p)
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("marginal", help="marginal density h and Stein kernel tau")
    common(p)
    p.set_defaults(func=_cmd_marginal)

    p = sub.add_parser("stein", help="Stein kernel with TV-bound diagnostics")
    common(p)
    p.set_defaults(func=_cmd_stein)

    p = sub.add_parser("spectrum", help="Nystrom eigendecomposition of the kernel")
    common(p)
    p.add_argument("--nodes", type=int, default=2000, help="Nystrom node count")
    p.add_argument("--terms", type=int, default=50,
                   help="eigenvalues/eigenfunctions to report")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("mixing", help="periodic mixing density on the unit square")
    common(p, with_c=True)
    p.set_defaults(func=_cmd_mixing)

    p = sub.add_parser("verify", help="covariance identity verification report")
    common(p, with_c=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="residual tolerance (exit 2 beyond it)")
    p.add_argument("--kmax", type=int, default=5,
                   help="max trig frequency for the periodic library")
    p.add_argument("--samples", type=int, default=200_000,
                   help="Monte Carlo sample count for the oracle triangle")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("fourier", help="Fourier-side identity checks")
    common(p, with_c=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="residual tolerance (exit 2 beyond it)")
    p.add_argument("--kmax", type=int, default=5,
                   help="max integer frequency for the mixing check")
    p.set_defaults(func=_cmd_fourier)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    args.seed = _resolve_seed(args.seed)
    try:
        return args.func(args)
    except SystemExit as e:
        return int(e.code or 0)
    except HoeffdingLabError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
