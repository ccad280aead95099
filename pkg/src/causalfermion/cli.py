"""Command-line interface: ``causalfermion {minimize,oracle,plot,check-grad,sweep}``.

Logs go to standard error, results to files.  Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import oracles
from .errors import CausalFermionError, NotSpinOne
from .geometry import plot_rows, write_plot_file
from .gradient import fd_check
from .optimize import OptimizerSettings, multi_restart, worker_count
from .parametrize import decode, init_random
from .persistence import (
    RunSpec,
    config_from_dict,
    load_document,
    new_document,
    run_to_dict,
    save_document,
    summarize_config,
)

logger = logging.getLogger("causalfermion")

DEFAULT_RESTARTS = 10


def _oracle_block(n, f, m, action):
    out = []
    for pred in oracles.asymptotic_table(n, f, m):
        d = pred.as_dict()
        d["delta"] = action - pred.action
        d["ratio"] = action / pred.action if pred.action else None
        out.append(d)
    return out


def cmd_minimize(spec: RunSpec) -> dict:
    """Run all seeds, keep the best, and persist the result document."""
    start = time.monotonic()
    restart = multi_restart(spec.shape, spec.seeds, spec.settings, mu0=spec.mu0_override)
    best = restart.best
    best_index = restart.results.index(best)
    config = decode(best.final_params)
    body = {
        "runs": [run_to_dict(r, spec.export_trace) for r in restart.results],
        "failures": {str(k): v for k, v in restart.failures.items()},
        "best_index": best_index,
        "oracle": _oracle_block(spec.n, spec.f, spec.m, best.final_action),
    }
    body.update(summarize_config(config, spec.export_pairs))
    doc = new_document("optimizer", spec.as_dict(), time.monotonic() - start, body)
    if spec.output_path:
        path = save_document(doc, spec.output_path)
        logger.info("wrote %s", path)
        if spec.export_plot and spec.n == 1:
            write_plot_file(plot_rows(config, 0), path.with_suffix(".plot.tsv"))
    return doc


def cmd_oracle(kind: str, params: dict) -> dict:
    start = time.monotonic()
    if kind == "iso":
        grid = params.get("tau_grid") or [1.0, 1.5, 2.0, 3.0]
        table = [[t1, t2, oracles.iso_lagrangian(t1, t2)] for t1 in grid for t2 in grid]
        low = min(table, key=lambda r: r[2])
        body = {"iso_table": table, "iso_minimum": {"tau": low[0], "tau2": low[1], "value": low[2]}}
        return new_document("oracle", {"kind": kind, **params}, time.monotonic() - start, body)
    if kind == "dirac2d":
        config, pred = oracles.dirac2d_config(params["m"], params.get("seed", 0))
    elif kind == "dirac4d":
        config, pred = oracles.dirac4d_config(params["m"], params.get("seed", 0))
    elif kind == "orthogonal":
        n, f, m = params["n"], params["f"], params["m"]
        config = oracles.orthogonal_min_config(n, f, m)
        pred = oracles.OraclePrediction(None, 1.0 / (2 * m * n**3), None, oracles.Regime.EXACT, "orthogonal-floor")
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    body = summarize_config(config)
    p = pred.as_dict()
    p["delta"] = body["action"] - pred.action
    if pred.boundedness is not None:
        p["boundedness_delta"] = body["boundedness"] - pred.boundedness
    if pred.asymptotic is not None:
        p["asymptotic"]["delta"] = body["action"] - pred.asymptotic.action
    body["prediction"] = p
    return new_document("oracle", {"kind": kind, **params}, time.monotonic() - start, body)


def cmd_plot(result_path, ref_index: int = 0, rescale: bool = False, exponent: float = 1.5, out=None) -> Path:
    doc = load_document(result_path)
    config = config_from_dict(doc["configuration"])
    if config.n != 1:
        raise NotSpinOne(f"projected plots need n = 1, the result has n = {config.n}")
    rows = plot_rows(config, ref_index, rescale=rescale, exponent=exponent)
    out = Path(out) if out else Path(result_path).with_suffix(".plot.tsv")
    write_plot_file(rows, out)
    return out


def cmd_check_grad(shape, seed: int, step: float, stream=None):
    params = init_random(shape, seed)
    report = fd_check(params, step)
    print(
        f"shape={tuple(shape)} seed={seed} step={report.step:g} "
        f"max_rel_error={report.max_rel_error:.3e} worst_index={report.worst_index} smooth={report.smooth}",
        file=stream or sys.stdout,
    )
    return report


def cmd_sweep(ns, fs, ms, seeds, settings, out_dir, diagonal: bool = False, mu0=None) -> dict:
    """Minimize every grid cell, write one document per cell and a summary table."""
    if not ns or not ms or (not fs and not diagonal):
        raise ValueError("empty sweep grid")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = []
    for n in ns:
        for m in ms:
            for f in ([m * n] if diagonal else fs):
                if f >= 2 * n:
                    cells.append((n, f, m))
    if not cells:
        raise ValueError("no grid cell satisfies f >= 2n")
    rows = []
    for n, f, m in cells:
        spec = RunSpec(n, f, m, list(seeds), settings, mu0, str(out_dir / f"n{n}_f{f}_m{m}.json"))
        try:
            doc = cmd_minimize(spec)
        except Exception as exc:  # a failed cell is recorded, the sweep goes on
            logger.error("cell (n=%d, f=%d, m=%d) failed: %s", n, f, m, exc)
            rows.append({"n": n, "f": f, "m": m, "best_S": np.nan, "oracle_S": np.nan, "ratio": np.nan, "T": np.nan})
            continue
        ref = doc["oracle"][0] if doc["oracle"] else None
        oracle_s = ref["action"] if ref else np.nan
        rows.append(
            {
                "n": n,
                "f": f,
                "m": m,
                "best_S": doc["action"],
                "oracle_S": oracle_s,
                "ratio": doc["action"] / oracle_s if ref else np.nan,
                "T": doc["boundedness"],
            }
        )
    fit = scaling_fit(rows)
    with open(out_dir / "summary.tsv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "f", "m", "best_S", "oracle_S", "ratio", "T"], delimiter="\t", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    save_document(new_document("sweep", {"cells": cells, "seeds": list(seeds)}, 0.0, {"rows": rows, "fit": fit}), out_dir / "fit.json")
    return {"rows": rows, "fit": fit}


def scaling_fit(rows) -> dict:
    """Least-squares slope of log S against log m (or log f if m is constant)."""
    good = [r for r in rows if np.isfinite(r["best_S"]) and r["best_S"] > 0]
    ms = {r["m"] for r in good}
    var = "m" if len(ms) > 1 else "f"
    xs = np.log([r[var] for r in good])
    if len(set(xs)) < 2:
        return {"variable": var, "slope": None, "intercept": None}
    slope, intercept = np.polyfit(xs, np.log([r["best_S"] for r in good]), 1)
    return {"variable": var, "slope": float(slope), "intercept": float(intercept)}


# --- argument parsing -------------------------------------------------------


def _add_shape(p, require=True):
    p.add_argument("--n", type=int, default=1, help="spin dimension")
    p.add_argument("--f", type=int, required=require, help="Hilbert space dimension")
    p.add_argument("--m", type=int, required=require, help="number of points")


def _add_settings(p):
    p.add_argument("--seeds", type=int, nargs="+", help="explicit seed list")
    p.add_argument("--seed", type=int, default=0, help="first seed when --seeds is omitted")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS, help="number of sequential seeds")
    p.add_argument("--mu0", type=float, help="initial spectral scale (default depends on n, m)")
    p.add_argument("--ftol", type=float, default=1e-7)
    p.add_argument("--gtol", type=float, default=1e-9, help="stage-one gradient tolerance")
    p.add_argument("--gtol-2", type=float, default=1e-7, help="stage-two gradient tolerance")
    p.add_argument("--max-iters-1", type=int, default=10000)
    p.add_argument("--max-iters-2", type=int, default=5000)
    p.add_argument("--memory", type=int, default=70)
    p.add_argument("--wall-clock", type=float, default=72 * 3600.0, help="seconds per run")
    p.add_argument("--gtol-norm", choices=["l1", "l2", "max"], default="l1")


def _settings(args) -> OptimizerSettings:
    return OptimizerSettings(
        ftol=args.ftol,
        gtol_stage1=args.gtol,
        gtol_stage2=args.gtol_2,
        memory=args.memory,
        max_iter_stage1=args.max_iters_1,
        max_iter_stage2=args.max_iters_2,
        wall_clock_limit=args.wall_clock,
        gtol_norm=args.gtol_norm,
    )


def _seeds(args):
    return args.seeds if args.seeds else list(range(args.seed, args.seed + args.restarts))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalfermion", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimize", help="minimize the causal action over random restarts")
    _add_shape(p)
    _add_settings(p)
    p.add_argument("--out", required=True, help="result document path")
    p.add_argument("--export-plot", action="store_true")
    p.add_argument("--export-pairs", action="store_true")
    p.add_argument("--no-trace", action="store_true")

    p = sub.add_parser("oracle", help="build and evaluate an analytic reference configuration")
    p.add_argument("kind", choices=["dirac2d", "dirac4d", "orthogonal", "iso"])
    _add_shape(p, require=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau-grid", type=float, nargs="+")
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", help="projected spacetime plot data of an n = 1 result")
    p.add_argument("result")
    p.add_argument("--ref-index", type=int, default=0)
    p.add_argument("--rescale", action="store_true")
    p.add_argument("--exponent", type=float, default=1.5)
    p.add_argument("--out")

    p = sub.add_parser("check-grad", help="compare the analytic gradient with finite differences")
    _add_shape(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tol", type=float, help="exit with status 1 if the error exceeds this")

    p = sub.add_parser("sweep", help="minimize over a grid of shapes and fit log-log slopes")
    p.add_argument("--n", type=int, nargs="+", default=[1])
    p.add_argument("--f", type=int, nargs="+")
    p.add_argument("--m", type=int, nargs="+", required=True)
    p.add_argument("--diagonal", action="store_true", help="use f = m n for every m")
    _add_settings(p)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    try:
        if args.command == "minimize":
            if args.f < 2 * args.n or args.m < 1:
                parser.error(f"need f >= 2n and m >= 1 (got n={args.n}, f={args.f}, m={args.m})")
            spec = RunSpec(
                args.n, args.f, args.m, _seeds(args), _settings(args), args.mu0, args.out,
                export_plot=args.export_plot, export_pairs=args.export_pairs, export_trace=not args.no_trace,
            )
            logger.info("minimize %s with %d seeds on %d workers", spec.shape, len(spec.seeds), worker_count())
            doc = cmd_minimize(spec)
            print(f"best action {doc['action']!r} (seed {doc['runs'][doc['best_index']]['seed']}) -> {args.out}")
        elif args.command == "oracle":
            params = {"m": args.m, "seed": args.seed}
            if args.kind == "orthogonal":
                if args.f is None or args.m is None:
                    parser.error("orthogonal oracle needs --f and --m")
                params.update(n=args.n, f=args.f)
            elif args.kind == "iso":
                params = {"tau_grid": args.tau_grid}
            elif args.m is None:
                parser.error(f"{args.kind} oracle needs --m")
            doc = cmd_oracle(args.kind, params)
            save_document(doc, args.out)
            value = doc["iso_minimum"]["value"] if args.kind == "iso" else doc["action"]
            print(f"{args.kind}: {value!r} -> {args.out}")
        elif args.command == "plot":
            out = cmd_plot(args.result, args.ref_index, args.rescale, args.exponent, args.out)
            print(f"plot data -> {out}")
        elif args.command == "check-grad":
            if args.f < 2 * args.n:
                parser.error("need f >= 2n")
            report = cmd_check_grad((args.n, args.f, args.m), args.seed, args.step)
            if args.tol is not None and report.max_rel_error > args.tol:
                return 1
        elif args.command == "sweep":
            if not args.diagonal and not args.f:
                parser.error("sweep needs --f values or --diagonal")
            result = cmd_sweep(args.n, args.f or [], args.m, _seeds(args), _settings(args), args.out, args.diagonal, args.mu0)
            fit = result["fit"]
            if fit["slope"] is not None:
                print(f"log-log slope of S against {fit['variable']}: {fit['slope']:.4f}")
            print(f"summary -> {Path(args.out) / 'summary.tsv'}")
    except (CausalFermionError, ValueError, RuntimeError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
