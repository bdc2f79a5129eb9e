"""Command-line front end.

Subcommands: ``dispersion``, ``evolve``, ``hr-sim``, ``convergence``, ``bench``.
Every run directory receives ``config.txt`` (the fully resolved
configuration, headed by the package version) next to its CSV outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import default_config, load_config
from .errors import (
    BlowUpError,
    ConfigError,
    DivergenceError,
    DomainError,
    ImaginaryFrequencyError,
    NonConvergenceError,
    NumericalError,
    ShapeError,
)
from .hr import build_kernel, default_initial_state, simulate_network
from .model import dispersion_omega
from .output import fmt, write_csv, write_text
from .solver import run_evolution
from .studies import (
    benchmark,
    initial_pulse,
    scheme_agreement,
    spatial_convergence,
    temporal_convergence,
)

log = logging.getLogger("cfgl")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def write_config(directory, config, command):
    header = f"cfgl {__version__}\ncommand: {command}"
    return write_text(Path(directory) / "config.txt", config.echo(header=header))


# dispersion ---------------------------------------------------------------

def cmd_dispersion(config, out, alphas=None):
    """Tabulate Omega(k) for each order; empty cells where the frequency is imaginary."""
    alphas = tuple(alphas) if alphas else config.alphas
    config = config.replace(alphas=tuple(float(a) for a in alphas))
    params = config.lienard()
    ks = np.linspace(config.k_min, config.k_max, config.k_points)
    rows = []
    for k in ks:
        row = [k]
        for a in config.alphas:
            try:
                row.append(dispersion_omega(k, params, a))
            except ImaginaryFrequencyError:
                row.append(None)
        rows.append(row)
    header = ["k"] + [f"omega_alpha={float(a)!r}" for a in config.alphas]
    write_config(out, config, "dispersion")
    return write_csv(Path(out) / "dispersion.csv", header, rows)


# evolve -------------------------------------------------------------------

def _write_trajectory(directory, traj):
    x_header = ["t"] + [fmt(x) for x in traj.x]
    write_csv(
        Path(directory) / "snapshots.csv",
        x_header,
        ([t] + list(m) for t, m in zip(traj.snapshot_times, traj.snapshots)),
    )
    write_csv(
        Path(directory) / "diagnostics.csv",
        ["t", "max_modulus_sq", "l2_norm", "localization"],
        zip(traj.times, traj.max_modulus_sq, traj.l2_norm, traj.localization),
    )


def evolve_one(config, directory):
    """Run one evolution and write its outputs; partial outputs survive a failure."""
    directory = Path(directory)
    write_config(directory, config, "evolve")
    grid = config.grid()
    coeffs = config.coefficients()
    initial = initial_pulse(grid, coeffs, config.B0, config.k, config.center())
    try:
        traj = run_evolution(config.solver_config(), grid, coeffs, config.order(), initial)
    except (BlowUpError, NonConvergenceError) as exc:
        if exc.trajectory is not None:
            _write_trajectory(directory, exc.trajectory)
        raise
    _write_trajectory(directory, traj)
    log.info("evolve alpha=%g: %d steps, final max|B|^2 = %.6g",
             config.alpha, config.solver_config().n_steps, traj.max_modulus_sq[-1])
    return traj


def evolve_runs(config, out, alphas=None, compare_gamma_i=False):
    """Expand an alpha sweep and an optional gamma_i toggle into (config, directory) pairs."""
    alphas = list(alphas) if alphas else [config.alpha]
    runs = []
    for a in alphas:
        base = Path(out) / f"alpha_{float(a)!r}" if len(alphas) > 1 else Path(out)
        cfg = config.replace(alpha=float(a))
        if compare_gamma_i:
            runs.append((cfg.replace(gamma_i=0.0), base / "gamma_i_zero"))
            runs.append((cfg.replace(gamma_i=None), base / "gamma_i_derived"))
        else:
            runs.append((cfg, base))
    return runs


def cmd_evolve(config, out, alphas=None, compare_gamma_i=False, jobs=1):
    runs = evolve_runs(config, out, alphas, compare_gamma_i)
    if jobs > 1 and len(runs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(evolve_one, c, d) for c, d in runs]
            return [f.result() for f in futures]
    return [evolve_one(c, d) for c, d in runs]


# hr-sim -------------------------------------------------------------------

def cmd_hr_sim(config, out):
    params = config.hr_params()
    kernel = build_kernel(config.hr_N, params.K, params.alpha)
    initial = default_initial_state(
        config.hr_N, params, config.hr_perturbation, config.hr_init, config.seed
    )
    write_config(out, config, "hr-sim")
    try:
        traj = simulate_network(
            initial, params, kernel, config.hr_dt, config.hr_T,
            record_stride=config.hr_stride, threshold=config.hr_threshold,
        )
    except DivergenceError as exc:
        if exc.trajectory is not None:
            _write_hr(out, exc.trajectory, config.hr_N)
        raise
    _write_hr(out, traj, config.hr_N)
    return traj


def _write_hr(out, traj, N):
    header = ["t"] + [f"u_{n}" for n in range(1, N + 1)]
    write_csv(Path(out) / "hr_series.csv", header, ([t] + list(u) for t, u in zip(traj.t, traj.u)))
    write_csv(Path(out) / "spikes.csv", ["neuron", "spike_count"],
              ([n + 1, int(c)] for n, c in enumerate(traj.spike_counts)))


# convergence --------------------------------------------------------------

def cmd_convergence(config, out, alphas=None):
    alphas = list(alphas) if alphas else [config.alpha]
    studies = []
    for a in alphas:
        cfg = config.replace(alpha=float(a))
        studies.append(spatial_convergence(
            a, cfg.conv_space_b, cfg.conv_space_M, cfg.conv_space_ref_M))
        grid = cfg.replace(b=cfg.conv_time_b, M=cfg.conv_time_M).grid()
        coeffs = cfg.coefficients()
        initial = initial_pulse(grid, coeffs, cfg.B0, cfg.k, grid.b / 2)
        common = dict(coeffs=coeffs, order=a, grid=grid, T=cfg.conv_time_T,
                      n_ladder=cfg.conv_time_N, initial=initial, tol=cfg.conv_time_tol)
        studies.append(temporal_convergence("semi_implicit", **common))
        studies.append(temporal_convergence("theta_euler", theta=0.5, **common))
        studies.append(scheme_agreement(theta=0.5, **common))
    rows = []
    for s in studies:
        for i, (step, err) in enumerate(zip(s.steps, s.errors)):
            rows.append([s.name, step, err, s.orders[i] if i < len(s.orders) else None])
    write_config(out, config, "convergence")
    write_csv(Path(out) / "convergence.csv", ["study", "step", "error", "observed_order"], rows)
    write_csv(Path(out) / "convergence_summary.csv", ["study", "fitted_order"],
              ([s.name, s.fitted] for s in studies))
    for s in studies:
        log.info("%s: fitted order %.4f", s.name, s.fitted)
    return studies


# bench --------------------------------------------------------------------

def cmd_bench(config, out, alphas=None):
    a = float(alphas[0]) if alphas else config.alpha
    cfg = config.replace(alpha=a)
    rows = benchmark(
        cfg.coefficients(), a, cfg.B0, cfg.k, cfg.b, cfg.tau, cfg.bench_M,
        steps=cfg.bench_steps, implicit_steps=cfg.bench_implicit_steps,
        tol=cfg.fixed_point_tol, max_iters=cfg.fixed_point_max_iters,
    )
    header = ["scheme", "M", "assembly_s", "factorization_s", "mean_step_s",
              "steps_per_s", "step_time_cv", "factorizations", "steps"]
    write_config(out, cfg, "bench")
    write_csv(Path(out) / "bench.csv", header,
              ([r.scheme, r.M, r.assembly_s, r.factorization_s, r.mean_step_s,
                r.steps_per_s, r.step_time_cv, r.factorizations, r.steps] for r in rows))
    return rows


# entry point --------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="cfgl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cfgl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("dispersion", "evolve", "hr-sim", "convergence", "bench"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key = value configuration file")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--alpha", type=float, action="append",
                       help="fractional order; repeat for a sweep")
        p.add_argument("--seed", type=int, help="random seed override")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "evolve":
            p.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
            p.add_argument("--compare-gamma-i", action="store_true",
                           help="run each order with derived and zero gamma_i")
    return parser


def _load(args):
    config = load_config(args.config) if args.config else default_config()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = str(args.out)
    if args.alpha:
        for a in args.alpha:
            config.replace(alpha=a)  # validates each override
        updates["alpha"] = float(args.alpha[0])
    return config.replace(**updates) if updates else config


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _load(args)
        out = config.output_dir()
        if args.command == "dispersion":
            cmd_dispersion(config, out, args.alpha)
        elif args.command == "evolve":
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            cmd_evolve(config, out, args.alpha, args.compare_gamma_i, args.jobs)
        elif args.command == "hr-sim":
            cmd_hr_sim(config, out)
        elif args.command == "convergence":
            cmd_convergence(config, out, args.alpha)
        elif args.command == "bench":
            cmd_bench(config, out, args.alpha)
    except (ConfigError, DomainError, ShapeError) as exc:
        print(f"cfgl: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"cfgl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"cfgl: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
