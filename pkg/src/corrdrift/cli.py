"""Command-line front end: simulate / fit / select / bench / stats.

Every command reads one TOML config (flags override file keys, environment
variables ``CORRDRIFT_SEED`` and ``CORRDRIFT_THREADS`` override both),
writes CSV outputs plus a JSON run manifest with checksums, and prints a
one-line summary.  Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import bench as bench_mod
from . import correlation as corr
from .bench import ExperimentConfig
from .config import ConfigError, parse_config
from .estimator import SingularGram, fit_fixed_m
from .selection import EmptyCollection, select
from .simulate import SimulationExploded, ensemble_to_csv, simulate_ensemble, write_ensemble

__all__ = ["main", "dispatch", "RunManifest"]

_EXIT_CONFIG = 2
_EXIT_NUMERICAL = 3
_EXIT_IO = 4


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    outputs: list[dict]
    duration_seconds: float


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _finish(command: str, cfg: ExperimentConfig, outdir: str,
            paths: list[str], started: float) -> RunManifest:
    manifest = RunManifest(
        command=command,
        config=asdict(cfg),
        seed=cfg.seed,
        outputs=[{"path": os.path.relpath(p, outdir), "sha256": _sha256(p)}
                 for p in paths],
        duration_seconds=time.time() - started)
    manifest_path = os.path.join(outdir, "run_manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(asdict(manifest), fh, indent=2, default=str)
        fh.write("\n")
    return manifest


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _setup_outdir(outdir: str) -> None:
    os.makedirs(outdir, exist_ok=True)


def _cmd_simulate(cfg: ExperimentConfig, args) -> tuple[str, list[str]]:
    model = cfg.model_spec()
    R = bench_mod.correlation_for(cfg, cfg.rho_list[0])
    ens = simulate_ensemble(model, cfg.n_paths, cfg.horizon, cfg.dt, R,
                            seed=cfg.seed)
    paths = [os.path.join(args.outdir, "ensemble.bin")]
    write_ensemble(ens, paths[0])
    if args.csv:
        paths.append(os.path.join(args.outdir, "ensemble.csv"))
        ensemble_to_csv(ens, paths[1])
    summary = (f"simulated {ens.n_paths} paths x {ens.n_steps} steps "
               f"(model {cfg.model}, {R.descriptor}) -> {paths[0]}")
    return summary, paths


def _cmd_fit(cfg: ExperimentConfig, args) -> tuple[str, list[str]]:
    model = cfg.model_spec()
    basis = bench_mod.basis_for(cfg, model)
    R = bench_mod.correlation_for(cfg, cfg.rho_list[0])
    ens = simulate_ensemble(model, cfg.n_paths, cfg.horizon, cfg.dt, R,
                            seed=cfg.seed)
    estimate = fit_fixed_m(ens, basis, args.m, sigma=model.diffusion,
                           gate=cfg.gate_spec())
    theta_path = os.path.join(args.outdir, "theta.csv")
    _write_csv(theta_path, ["j", "theta"],
               [(j + 1, t) for j, t in enumerate(estimate.theta)])
    a, b = model.interval
    grid = np.linspace(a, b, cfg.mise_grid)
    curve_path = os.path.join(args.outdir, "fit_curve.csv")
    _write_csv(curve_path, ["x", "b_hat"], zip(grid, estimate(grid)))
    mise_val = bench_mod.mise(estimate, model, cfg.mise_grid)
    summary = (f"fit m={args.m} (truncated={estimate.truncated}) "
               f"MISE={mise_val:.6g} -> {theta_path}")
    return summary, [theta_path, curve_path]


def _cmd_select(cfg: ExperimentConfig, args) -> tuple[str, list[str]]:
    model = cfg.model_spec()
    basis = bench_mod.basis_for(cfg, model)
    R = bench_mod.correlation_for(cfg, cfg.rho_list[0])
    ens = simulate_ensemble(model, cfg.n_paths, cfg.horizon, cfg.dt, R,
                            seed=cfg.seed)
    result = select(ens, basis, cfg.resolved_m_max(), sigma=model.diffusion,
                    kappa=cfg.kappa, gate=cfg.gate_spec())
    crit_path = os.path.join(args.outdir, "criterion.csv")
    rows = []
    for m in range(1, cfg.resolved_m_max() + 1):
        admissible = m in result.admissible
        rows.append((m,
                     result.norms_sq.get(m, float("nan")),
                     result.penalties.get(m, float("nan")),
                     result.criterion_values.get(m, float("nan")),
                     admissible))
    _write_csv(crit_path, ["m", "norm_sq", "penalty", "criterion", "admissible"], rows)
    a, b = model.interval
    grid = np.linspace(a, b, cfg.mise_grid)
    curve_path = os.path.join(args.outdir, "selected_curve.csv")
    _write_csv(curve_path, ["x", "b_hat"], zip(grid, result.estimate(grid)))
    mise_val = bench_mod.mise(result.estimate, model, cfg.mise_grid)
    summary = f"selected m={result.m_hat} MISE={mise_val:.6g} -> {crit_path}"
    return summary, [crit_path, curve_path]


def _cmd_bench(cfg: ExperimentConfig, args) -> tuple[str, list[str]]:
    model = cfg.model_spec()
    paths = []
    table_rows = []
    beam_grid = np.linspace(*model.interval, cfg.mise_grid)
    for rho in cfg.rho_list:
        outcomes = bench_mod.replicate_outcomes(cfg, rho, threads=args.threads)
        table_rows.append(bench_mod.aggregate_outcomes(cfg, rho, outcomes))
        beams = [o.selection.estimate(beam_grid) for o in outcomes if not o.failed]
        beam_path = os.path.join(args.outdir,
                                 f"plot_{cfg.model}_{cfg.basis}_rho{rho}.csv")
        header = ["x", "b_true"] + [f"b_hat_rep{o.replicate + 1}"
                                    for o in outcomes if not o.failed]
        columns = [beam_grid, model.drift(beam_grid)] + beams
        _write_csv(beam_path, header, zip(*columns))
        paths.append(beam_path)

    table_path = os.path.join(args.outdir, "table1.csv")
    _write_csv(table_path,
               ["example", "basis", "rho", "mean_mise_x100", "std_mise_x100",
                "mean_dim", "std_dim", "n_failed"],
               [(r.example, r.basis, r.rho, r.mean_mise_x100, r.std_mise_x100,
                 r.mean_dim, r.std_dim, r.n_failed) for r in table_rows])
    tab0_path = os.path.join(args.outdir, "tab0.csv")
    _write_csv(tab0_path, ["rho", "abs_sum", "op_norm"],
               bench_mod.tab0_stats(cfg.n_paths, cfg.rho_list))
    parametric_path = os.path.join(args.outdir, "parametric.csv")
    para_rows = []
    for rho in cfg.rho_list:
        R = bench_mod.correlation_for(cfg, rho)
        check = bench_mod.parametric_rate_check(cfg.n_paths, cfg.horizon, R,
                                                seed=cfg.seed)
        para_rows.append((R.descriptor, rho, check.mc_mse, check.formula_mse))
    _write_csv(parametric_path, ["correlation", "rho", "mc_mse", "formula_mse"],
               para_rows)
    paths = [table_path, tab0_path, parametric_path] + paths
    summary = ("bench wrote " + ", ".join(os.path.basename(p) for p in paths)
               + f" ({cfg.replicates} replicates per rho)")
    return summary, paths


def _cmd_stats(cfg: ExperimentConfig, args) -> tuple[str, list[str]]:
    n = args.n if args.n is not None else cfg.n_paths
    rhos = [float(r) for r in args.rho] if args.rho else list(cfg.rho_list)
    for rho in rhos:
        if not abs(rho) < 1.0:
            raise ConfigError("rho must lie in (-1,1)")
    rows = bench_mod.tab0_stats(n, rhos)
    print("rho,abs_sum,op_norm")
    for row in rows:
        print(",".join(_cell(v) for v in row))
    paths = []
    if args.outdir is not None:
        _setup_outdir(args.outdir)
        path = os.path.join(args.outdir, "tab0.csv")
        _write_csv(path, ["rho", "abs_sum", "op_norm"], rows)
        paths.append(path)
    summary = f"stats for n={n}, rho={rhos}"
    return summary, paths


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "select": _cmd_select,
    "bench": _cmd_bench,
    "stats": _cmd_stats,
}


def dispatch(command: str, cfg: ExperimentConfig, args) -> RunManifest:
    """Run one subcommand pipeline and write its manifest."""
    started = time.time()
    needs_outdir = command != "stats" or args.outdir is not None
    if command != "stats":
        _setup_outdir(args.outdir)
    summary, paths = _COMMANDS[command](cfg, args)
    if needs_outdir:
        manifest = _finish(command, cfg, args.outdir, paths, started)
    else:
        manifest = RunManifest(command=command, config=asdict(cfg), seed=cfg.seed,
                               outputs=[], duration_seconds=time.time() - started)
    print(summary)
    return manifest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrdrift",
        description="Simulate correlated diffusion ensembles and estimate "
                    "the drift by penalized projection least squares.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, outdir_required=True):
        p.add_argument("-c", "--config", help="TOML experiment config")
        p.add_argument("-o", "--outdir", required=outdir_required,
                       help="output directory")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker pool size for replicate-level parallelism")

    common(sub.add_parser("simulate", help="write a path ensemble"))
    sub.choices["simulate"].add_argument("--csv", action="store_true",
                                         help="also write the ensemble as CSV")
    fit = sub.add_parser("fit", help="fixed-dimension least squares fit")
    common(fit)
    fit.add_argument("--m", type=int, required=True,
                     help="projection space dimension")
    fit.add_argument("--basis", choices=("hermite", "cosine"),
                     help="override the config basis family")
    fit.add_argument("--gate", choices=("empirical", "theoretical"),
                     help="override the stability gate kind")
    fit.add_argument("--p", type=float, help="theoretical-gate parameter")
    common(sub.add_parser("select", help="penalized model selection"))
    common(sub.add_parser("bench", help="Monte-Carlo study"))
    stats = sub.add_parser("stats", help="dependence statistics of R(rho)")
    common(stats, outdir_required=False)
    stats.add_argument("--rho", action="append",
                       help="correlation strength (repeatable)")
    stats.add_argument("--n", type=int, help="matrix size")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    from dataclasses import replace

    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    seed = args.seed
    if seed is None and "CORRDRIFT_SEED" in os.environ:
        seed = int(os.environ["CORRDRIFT_SEED"])
    if seed is not None:
        overrides["seed"] = seed
    for key in ("basis", "gate", "p"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return replace(cfg, **overrides) if overrides else cfg


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    if "CORRDRIFT_THREADS" in os.environ:
        return max(1, int(os.environ["CORRDRIFT_THREADS"]))
    return 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        args.threads = _resolve_threads(args)
        dispatch(args.command, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (SingularGram, EmptyCollection, SimulationExploded,
            corr.NotPositiveDefinite, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return _EXIT_IO
    except (ValueError, IndexError) as exc:
        # bad parameter combinations surface as usage errors
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
