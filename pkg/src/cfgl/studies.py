"""Refinement studies and timing harness used by the ``convergence`` and ``bench`` commands."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fractional import apply_riesz, as_order, riesz_weights
from .model import solitary_initial_condition
from .solver import (
    ComplexField,
    Grid,
    SolverConfig,
    assemble_block_operator,
    factor_semi_implicit_system,
    run_evolution,
    step_semi_implicit,
    step_theta,
)

__all__ = [
    "ConvergenceStudy",
    "BenchRow",
    "smooth_bump",
    "initial_pulse",
    "fitted_order",
    "spatial_convergence",
    "temporal_convergence",
    "scheme_agreement",
    "benchmark",
]


@dataclass
class ConvergenceStudy:
    """Errors on a refinement ladder; ``steps[i]`` is the h or tau of ``errors[i]``."""

    name: str
    steps: list
    errors: list
    orders: list = field(default_factory=list)
    fitted: float = math.nan


def fitted_order(steps, errors):
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def _finish(name, steps, errors):
    orders = [
        math.log(errors[i] / errors[i + 1]) / math.log(steps[i] / steps[i + 1])
        for i in range(len(errors) - 1)
    ]
    return ConvergenceStudy(name, list(steps), list(errors), orders, fitted_order(steps, errors))


def smooth_bump(x, center, radius):
    """C-infinity bump ``exp(-1/(1 - s^2))`` with ``s = (x - center)/radius``, zero outside."""
    s = (np.asarray(x, dtype=float) - center) / radius
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def initial_pulse(grid, coeffs, B0, k, center=None):
    """Solitary profile placed at ``center`` (default mid-domain) as a :class:`ComplexField`."""
    c = grid.b / 2 if center is None else center
    return ComplexField.from_complex(solitary_initial_condition(grid.x - c, B0, k, coeffs))


def spatial_convergence(order, b=2.0, ladder=(128, 256, 512, 1024), ref_M=8192, radius=None):
    """Self-convergence of the discrete Riesz derivative of a smooth bump.

    Errors are max-norm differences at the coarse nodes against the ``ref_M``
    solution. The bump is supported inside the domain, so the zero extension
    is exact and only the stencil error remains.
    """
    order = as_order(order)
    radius = 0.4 * b if radius is None else radius

    def derivative(M):
        h = b / M
        x = h * np.arange(1, M)
        w = riesz_weights(order, M - 2)
        return apply_riesz(w, smooth_bump(x, b / 2, radius), h)

    ref = derivative(ref_M)
    steps, errors = [], []
    for M in ladder:
        stride = ref_M // M
        errors.append(float(np.max(np.abs(derivative(M) - ref[stride - 1::stride]))))
        steps.append(b / M)
    return _finish(f"space alpha={order.alpha:g}", steps, errors)


def _final_states(scheme, coeffs, order, grid, T, n_ladder, initial, theta, tol, max_iters):
    A_h = assemble_block_operator(coeffs, order, grid)
    finals = []
    for N in n_ladder:
        cfg = SolverConfig(
            tau=T / N, T=T, theta=theta, scheme=scheme, snapshot_stride=N,
            fixed_point_tol=tol, fixed_point_max_iters=max_iters,
        )
        finals.append(run_evolution(cfg, grid, coeffs, order, initial, operator=A_h).final.stacked())
    return finals


def temporal_convergence(scheme, coeffs, order, grid, T, n_ladder, initial, theta=0.5,
                         tol=1e-14, max_iters=100):
    """Successive-difference self-convergence in tau.

    ``errors[i] = max|B(tau_i) - B(tau_i / r)|`` at time ``T`` for consecutive
    rungs, so a ladder of ``m`` step counts gives ``m - 1`` errors.
    """
    order = as_order(order)
    finals = _final_states(scheme, coeffs, order, grid, T, n_ladder, initial, theta, tol, max_iters)
    errors = [float(np.max(np.abs(finals[i] - finals[i + 1]))) for i in range(len(finals) - 1)]
    steps = [T / N for N in n_ladder[:-1]]
    label = "semi_implicit" if scheme == "semi_implicit" else f"theta={theta:g}"
    return _finish(f"time {label} alpha={order.alpha:g}", steps, errors)


def scheme_agreement(coeffs, order, grid, T, n_ladder, initial, theta=0.5, tol=1e-14, max_iters=100):
    """Max-norm gap between semi-implicit and theta-scheme solutions at equal tau."""
    order = as_order(order)
    si = _final_states("semi_implicit", coeffs, order, grid, T, n_ladder, initial, theta, tol, max_iters)
    th = _final_states("theta_euler", coeffs, order, grid, T, n_ladder, initial, theta, tol, max_iters)
    gaps = [float(np.max(np.abs(a - b))) for a, b in zip(si, th)]
    return _finish(f"gap semi_implicit vs theta={theta:g} alpha={order.alpha:g}",
                   [T / N for N in n_ladder], gaps)


@dataclass
class BenchRow:
    scheme: str
    M: int
    assembly_s: float
    factorization_s: float
    mean_step_s: float
    steps_per_s: float
    step_time_cv: float
    factorizations: int
    steps: int


def _block_cv(times, block=10):
    times = np.asarray(times)
    nblocks = len(times) // block
    if nblocks < 2:
        return math.nan
    means = times[:nblocks * block].reshape(nblocks, block).mean(axis=1)
    return float(means.std() / means.mean())


def benchmark(coeffs, order, B0, k, b, tau, M_ladder, steps=100, implicit_steps=20,
              tol=1e-10, max_iters=50):
    """Time assembly, one factorization and per-step cost for each ``M``.

    The semi-implicit scheme is compared with the fully implicit theta
    scheme (``theta = 0``), whose Picard iteration reuses the same
    factorization of ``I - tau A_h`` but needs several solves per step.
    ``step_time_cv`` is the coefficient of variation of step times averaged
    over blocks of 10 consecutive steps.
    """
    order = as_order(order)
    rows = []
    for M in M_ladder:
        grid = Grid(b, M)
        t0 = time.perf_counter()
        A_h = assemble_block_operator(coeffs, order, grid)
        t_asm = time.perf_counter() - t0
        t0 = time.perf_counter()
        fact = factor_semi_implicit_system(A_h, tau)
        t_fact = time.perf_counter() - t0
        initial = initial_pulse(grid, coeffs, B0, k)

        state = initial
        times = []
        for _ in range(steps):
            t0 = time.perf_counter()
            state = step_semi_implicit(state, fact, coeffs, tau)
            times.append(time.perf_counter() - t0)
        mean = float(np.mean(times))
        rows.append(BenchRow("semi_implicit", M, t_asm, t_fact, mean, 1.0 / mean,
                             _block_cv(times), 1, steps))

        state = initial
        times = []
        for _ in range(implicit_steps):
            t0 = time.perf_counter()
            state = step_theta(state, A_h, coeffs, tau, 0.0, tol, max_iters, factorization=fact)
            times.append(time.perf_counter() - t0)
        mean = float(np.mean(times))
        rows.append(BenchRow("theta=0", M, t_asm, t_fact, mean, 1.0 / mean,
                             _block_cv(times), 1, implicit_steps))
    return rows
