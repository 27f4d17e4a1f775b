"""Command-line front end.

Subcommands: fit, pipeline, simulate, check, bench.  Exit codes are a
stable contract: 0 success/converged, 2 non-convergence (best iterate
still written), 3 invalid input semantics, 4 parse error.
"""

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io, plots
from .model import HRModel, simulate_pareto, simulate_root_conditioned
from .pipeline import normalize_margins, select_exceedances, variogram_combined
from .solver import FitConfig, existence_check, fit
from .variogram import (
    InvalidVariogramError,
    as_variogram,
    check_variogram,
    gamma_to_theta,
    is_emtp2,
)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INVALID = 3
EXIT_PARSE = 4


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _fail(code, msg):
    print(f"error: {msg}", file=sys.stderr)
    return code


def _add_fit_flags(p):
    p.add_argument("--gap-tol", type=float, default=1e-8)
    p.add_argument("--max-sweeps", type=int, default=10000)
    p.add_argument("--zero-tol", type=float, default=1e-6)
    p.add_argument("--gap-check-every", type=int, default=1)
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def _fit_config(args):
    return FitConfig(
        gap_tol=args.gap_tol,
        max_sweeps=args.max_sweeps,
        zero_tol=args.zero_tol,
        gap_check_every=args.gap_check_every,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tailgraph",
        description="Sparse extremal graphical models with Laplacian precision",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the constrained model")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--output-dir", required=True)
    p_fit.add_argument("--input-kind", choices=["variogram", "raw"], default="variogram")
    p_fit.add_argument("--quantile", type=float, default=0.9)
    _add_fit_flags(p_fit)

    p_pipe = sub.add_parser("pipeline", help="raw data to fitted model")
    p_pipe.add_argument("--input", required=True)
    p_pipe.add_argument("--output-dir", required=True)
    p_pipe.add_argument("--quantile", type=float, default=0.9)
    _add_fit_flags(p_pipe)

    p_sim = sub.add_parser("simulate", help="draw model samples")
    p_sim.add_argument("--gamma", required=True)
    p_sim.add_argument("--output-dir", required=True)
    group = p_sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--root", type=int, help="1-based root index")
    group.add_argument("--full", action="store_true")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)

    p_check = sub.add_parser("check", help="validate a variogram")
    p_check.add_argument("--gamma", required=True)
    p_check.add_argument("--output-dir", required=True)

    p_bench = sub.add_parser("bench", help="timing benchmark on random instances")
    p_bench.add_argument("--dims", type=int, nargs="+", required=True)
    p_bench.add_argument("--reps", type=int, default=3)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--gap-tol", type=float, default=1e-8)
    p_bench.add_argument("--output-dir", required=True)
    p_bench.add_argument("--no-figures", action="store_true")
    return parser


def _load_gbar(args):
    if args.input_kind == "raw":
        raw = io.read_matrix(args.input)
        x = normalize_margins(raw)
        e = select_exceedances(x, args.quantile)
        return variogram_combined(e).gbar, e.count
    return io.read_symmetric_matrix(args.input, warn=_warn), None


def _write_fit_bundle(outdir, result, n_obs, wall, args):
    d = result.gamma_hat.shape[0]
    io.write_matrix(outdir / "gamma_hat.csv", result.gamma_hat)
    io.write_matrix(outdir / "theta_hat.csv", result.theta_hat)
    io.write_graph_json(outdir / "graph.json", d, result.graph, result.q_hat)
    io.write_graph_dot(outdir / "graph.dot", d, result.graph, result.q_hat)
    with open(outdir / "gap_trace.csv", "w", encoding="utf-8") as fh:
        fh.write("sweep,duality_gap,wall_time\n")
        for sweep, gap, t in result.gap_trace:
            fh.write(f"{sweep},{gap:.17g},{t:.6f}\n")
    report = {
        "converged": result.converged,
        "sweeps": result.sweeps,
        "wall_time": wall,
        "n_exceedances": n_obs,
        "duality_gap": result.kkt.gap,
        "kkt": asdict(result.kkt),
        "gap_trace": [
            {"sweep": s, "duality_gap": g, "wall_time": t}
            for s, g, t in result.gap_trace
        ],
        "graph_edges": [[int(i) + 1, int(j) + 1] for i, j in result.graph],
        "config": asdict(result.config),
    }
    io.write_json(outdir / "report.json", report)
    if not args.no_figures:
        plots.render_gap_trace(outdir / "gap_trace.png", result.gap_trace)
        plots.render_graph(outdir / "graph.png", d, result.graph, result.q_hat)


def cmd_fit(args):
    try:
        gbar, n_obs = _load_gbar(args)
        gbar = as_variogram(gbar)
    except (io.MatrixParseError, ValueError) as exc:
        return _fail(EXIT_PARSE, str(exc))
    d = gbar.shape[0]
    iu = np.triu_indices(d, 1)
    bad = [(i, j) for i, j in zip(*iu) if gbar[i, j] <= 0.0]
    if bad:
        i, j = bad[0]
        return _fail(
            EXIT_INVALID,
            f"optimum does not exist: entry ({i + 1},{j + 1}) of the "
            f"variogram is {gbar[i, j]:g} (must be > 0)",
        )
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.input_kind == "raw":
        io.write_matrix(outdir / "gbar.csv", gbar)
    t0 = time.perf_counter()
    result = fit(gbar, _fit_config(args))
    wall = time.perf_counter() - t0
    _write_fit_bundle(outdir, result, n_obs, wall, args)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_pipeline(args):
    args.input_kind = "raw"
    return cmd_fit(args)


def cmd_simulate(args):
    try:
        gamma = io.read_symmetric_matrix(args.gamma, warn=_warn)
        gamma = as_variogram(gamma)
    except (io.MatrixParseError, ValueError) as exc:
        return _fail(EXIT_PARSE, str(exc))
    try:
        model = HRModel(gamma)
    except InvalidVariogramError as exc:
        return _fail(EXIT_INVALID, str(exc))
    if args.n < 1:
        return _fail(EXIT_INVALID, "--n must be >= 1")
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.full:
        batch = simulate_pareto(model, args.n, args.seed)
    else:
        k = args.root - 1
        if not 0 <= k < model.dim:
            return _fail(EXIT_INVALID, f"--root must lie in 1..{model.dim}")
        batch = simulate_root_conditioned(model, k, args.n, args.seed)
    io.write_matrix(outdir / "samples.csv", batch.samples)
    return EXIT_OK


def cmd_check(args):
    try:
        gamma = io.read_symmetric_matrix(args.gamma, warn=_warn)
        gamma = as_variogram(gamma)
    except (io.MatrixParseError, ValueError) as exc:
        return _fail(EXIT_PARSE, str(exc))
    rep = check_variogram(gamma)
    emtp2 = False
    if rep.strictly_cnd:
        emtp2 = bool(is_emtp2(gamma_to_theta(gamma)))
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    io.write_json(
        outdir / "report.json",
        {
            "strictly_cnd": rep.strictly_cnd,
            "positive_offdiag": rep.positive_offdiag,
            "is_metric": rep.is_metric,
            "is_emtp2": emtp2,
        },
    )
    return EXIT_OK


def sphere_variogram(d, rng):
    """Squared-distance variogram of d points drawn uniformly on the unit
    sphere in dimension d-1; strictly CND with probability one."""
    pts = rng.standard_normal((d, d - 1))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    sq = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(sq, 0.0)
    return 0.5 * (sq + sq.T)


def cmd_bench(args):
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = FitConfig(gap_tol=args.gap_tol)
    rows = []
    traces = []
    for d in sorted(args.dims):
        for rep in range(args.reps):
            rng = np.random.Generator(np.random.Philox([args.seed, d, rep]))
            gbar = sphere_variogram(d, rng)
            t0 = time.perf_counter()
            result = fit(gbar, cfg)
            wall = time.perf_counter() - t0
            rows.append((d, rep, wall, result.kkt.gap))
            for sweep, gap, t in result.gap_trace:
                traces.append((d, rep, sweep, gap, t))
    with open(outdir / "timings.csv", "w", encoding="utf-8") as fh:
        fh.write("dim,rep,seconds,final_gap\n")
        for d, rep, wall, gap in rows:
            fh.write(f"{d},{rep},{wall:.6f},{gap:.17g}\n")
    with open(outdir / "gap_trace.csv", "w", encoding="utf-8") as fh:
        fh.write("dim,rep,sweep,duality_gap,wall_time\n")
        for d, rep, sweep, gap, t in traces:
            fh.write(f"{d},{rep},{sweep},{gap:.17g},{t:.6f}\n")
    if not args.no_figures:
        plots.render_bench(outdir / "timings.png", rows)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags; map to the parse-error code
        raise SystemExit(EXIT_PARSE if exc.code not in (0, None) else exc.code)
    handlers = {
        "fit": cmd_fit,
        "pipeline": cmd_pipeline,
        "simulate": cmd_simulate,
        "check": cmd_check,
        "bench": cmd_bench,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
