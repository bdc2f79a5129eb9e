import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfgl.errors import BlowUpError, NonConvergenceError, ShapeError, SingularSystemError
from cfgl.fractional import apply_riesz, riesz_symbol, riesz_weights
from cfgl.model import CfglCoefficients, LienardParameters, coefficients_at
from cfgl.solver import (
    ComplexField,
    Grid,
    SolverConfig,
    assemble_block_operator,
    diagnostics,
    factor_semi_implicit_system,
    nonlinear_term,
    run_evolution,
    step_semi_implicit,
    step_theta,
)
from cfgl.studies import initial_pulse


def coeffs(gamma_r=0.0, gamma_i=0.0, p_r=0.0, q_r=0.0, q_i=0.0):
    return CfglCoefficients(gamma_r, gamma_i, p_r, q_r, q_i)


def random_field(n, seed=0):
    rng = np.random.default_rng(seed)
    return ComplexField(rng.standard_normal(n), rng.standard_normal(n))


# --- grid and fields ------------------------------------------------------

def test_grid_nodes():
    g = Grid(10.0, 5)
    np.testing.assert_allclose(g.x, [2, 4, 6, 8])
    assert g.n == 4 and g.h == 2.0
    assert list(g.central_mask) == [False, True, True, False]


@pytest.mark.parametrize("b,M", [(0.0, 8), (1.0, 1), (1.0, 2.5)])
def test_grid_rejects(b, M):
    with pytest.raises(ValueError):
        Grid(b, M)


def test_field_round_trip():
    f = random_field(7)
    g = ComplexField.from_stacked(f.stacked())
    np.testing.assert_array_equal(g.u, f.u)
    np.testing.assert_array_equal(ComplexField.from_complex(f.to_complex()).v, f.v)
    with pytest.raises(ShapeError):
        ComplexField(np.zeros(3), np.zeros(4))


# --- block operator -------------------------------------------------------

def test_operator_pure_gain():
    A = assemble_block_operator(coeffs(gamma_r=0.7), 1.8, Grid(1.0, 9))
    np.testing.assert_array_equal(A.matrix, 0.7 * np.eye(16))
    assert not A.matrix.flags.writeable


def test_operator_rotation_blocks():
    A = assemble_block_operator(coeffs(gamma_i=0.3), 1.5, Grid(1.0, 6))
    np.testing.assert_array_equal(A.upper_right, -0.3 * np.eye(5))
    np.testing.assert_array_equal(A.lower_left, 0.3 * np.eye(5))
    np.testing.assert_array_equal(A.upper_left, np.zeros((5, 5)))


def test_operator_matches_summation_path():
    c = coeffs(gamma_r=0.2, gamma_i=-0.1, p_r=0.4)
    grid = Grid(3.0, 40)
    A = assemble_block_operator(c, 1.7, grid)
    f = random_field(grid.n, 3)
    w = riesz_weights(1.7, grid.n - 1)
    # P f = -P_r * (discrete Riesz derivative of f), hence -P f = P_r * apply_riesz
    du = c.p_r * apply_riesz(w, f.u, grid.h) + c.gamma_r * f.u - c.gamma_i * f.v
    dv = c.p_r * apply_riesz(w, f.v, grid.h) + c.gamma_r * f.v + c.gamma_i * f.u
    out = A.apply(f)
    np.testing.assert_allclose(out.u, du, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(out.v, dv, rtol=1e-12, atol=1e-12)


# --- nonlinear term -------------------------------------------------------

def test_nonlinear_zero():
    np.testing.assert_array_equal(nonlinear_term(ComplexField.zeros(4), coeffs(q_r=1, q_i=2)), np.zeros(8))


def test_nonlinear_unit_real():
    out = nonlinear_term(ComplexField([1.0], [0.0]), coeffs(q_r=0.3, q_i=0.7))
    np.testing.assert_allclose(out, [-0.3, -0.7])


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_nonlinear_matches_complex_arithmetic(u, v, qr, qi):
    z = complex(u, v)
    expected = -complex(qr, qi) * abs(z) ** 2 * z
    out = nonlinear_term(ComplexField([u], [v]), coeffs(q_r=qr, q_i=qi))
    assert out[0] == pytest.approx(expected.real, abs=1e-12)
    assert out[1] == pytest.approx(expected.imag, abs=1e-12)


# --- factorization --------------------------------------------------------

def test_factor_identity():
    fact = factor_semi_implicit_system(np.zeros((6, 6)), 0.1)
    rhs = np.arange(6.0)
    np.testing.assert_array_equal(fact.solve(rhs), rhs)


def test_factor_scalar():
    fact = factor_semi_implicit_system(-2.0 * np.eye(4), 0.5)
    np.testing.assert_allclose(fact.solve(np.ones(4)), np.full(4, 0.5))


def test_factor_residual():
    c = coefficients_at(LienardParameters(), 0.5, 1.8)
    grid = Grid(100.0, 128)
    A = assemble_block_operator(c, 1.8, grid)
    fact = factor_semi_implicit_system(A, 1e-2)
    rhs = np.random.default_rng(4).standard_normal(2 * grid.n)
    x = fact.solve(rhs)
    system = np.eye(2 * grid.n) - 1e-2 * A.matrix
    assert np.max(np.abs(system @ x - rhs)) <= 1e-10


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_factor_singular():
    # I - tau A vanishes when A = I / tau
    with pytest.raises(SingularSystemError):
        factor_semi_implicit_system(10.0 * np.eye(4), 0.1)


# --- single steps ---------------------------------------------------------

def test_explicit_theta_is_forward_euler():
    c = coeffs(gamma_r=0.1, gamma_i=0.2, p_r=0.05, q_r=0.3, q_i=-0.4)
    grid = Grid(2.0, 16)
    A = assemble_block_operator(c, 1.6, grid)
    f = random_field(grid.n, 5)
    y = f.stacked()
    expected = y + 0.01 * (A.matrix @ y + nonlinear_term(f, c))
    np.testing.assert_array_equal(step_theta(f, A, c, 0.01, 1.0).stacked(), expected)


def test_implicit_theta_linear_scalar():
    c = coeffs(gamma_r=-2.0)
    A = assemble_block_operator(c, 1.5, Grid(1.0, 4))
    f = ComplexField(np.ones(3), np.zeros(3))
    out = step_theta(f, A, c, 0.5, 0.0)
    np.testing.assert_allclose(out.u, 0.5)


def test_theta_solves_its_own_equation():
    c = coeffs(gamma_r=0.1, gamma_i=0.2, p_r=0.05, q_r=0.3, q_i=-0.4)
    grid = Grid(2.0, 16)
    A = assemble_block_operator(c, 1.6, grid).matrix
    f = random_field(grid.n, 6)
    tau, theta = 0.01, 0.5
    g = step_theta(f, A, c, tau, theta, tol=1e-14)
    y0, y1 = f.stacked(), g.stacked()
    lhs = (y1 - y0) / tau
    rhs = theta * (A @ y0 + nonlinear_term(f, c)) + (1 - theta) * (A @ y1 + nonlinear_term(g, c))
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_theta_nonconvergence():
    c = coeffs(q_r=-50.0, q_i=30.0)
    A = assemble_block_operator(c, 1.6, Grid(1.0, 8))
    with pytest.raises(NonConvergenceError):
        step_theta(ComplexField(np.full(7, 3.0), np.zeros(7)), A, c, 1.0, 0.0, max_iters=5)


def test_theta_rejects_mismatched_factorization():
    c = coeffs(gamma_r=-1.0)
    A = assemble_block_operator(c, 1.6, Grid(1.0, 8))
    fact = factor_semi_implicit_system(A, 0.1)
    with pytest.raises(ValueError):
        step_theta(ComplexField.zeros(7), A, c, 0.1, 0.5, factorization=fact)


def test_semi_implicit_identity_and_decay():
    grid = Grid(1.0, 8)
    f = random_field(grid.n, 7)
    ident = factor_semi_implicit_system(assemble_block_operator(coeffs(), 1.5, grid), 0.1)
    np.testing.assert_allclose(step_semi_implicit(f, ident, coeffs(), 0.1).stacked(), f.stacked())
    decay = factor_semi_implicit_system(assemble_block_operator(coeffs(gamma_r=-1.0), 1.5, grid), 0.1)
    np.testing.assert_allclose(step_semi_implicit(f, decay, coeffs(), 0.1).stacked(), f.stacked() / 1.1)
    with pytest.raises(ValueError):
        step_semi_implicit(f, decay, coeffs(), 0.2)


# --- diagnostics ----------------------------------------------------------

def test_diagnostics_values():
    m = np.array([0.0, 1.0, 4.0, 1.0])
    grid = Grid(5.0, 5)
    peak, l2, frac = diagnostics(m, grid.h, grid.central_mask)
    assert (peak, l2) == (4.0, math.sqrt(6.0))
    assert frac == pytest.approx(5.0 / 6.0)
    assert math.isnan(diagnostics(np.zeros(4), 1.0, grid.central_mask)[2])


# --- full runs ------------------------------------------------------------

def test_run_zero_field_stays_zero():
    grid = Grid(10.0, 32)
    c = coefficients_at(LienardParameters(), 0.5, 1.8)
    traj = run_evolution(SolverConfig(1e-2, 0.5), grid, c, 1.8, ComplexField.zeros(grid.n))
    assert traj.completed
    assert np.all(np.array(traj.max_modulus_sq) == 0.0)
    assert np.all(traj.final.stacked() == 0.0)


@pytest.mark.parametrize("scheme,theta", [("semi_implicit", 0.5), ("theta_euler", 0.5), ("theta_euler", 0.0)])
def test_run_dissipative_l2_decreases(scheme, theta):
    # gamma_r < 0, P_r > 0 and Q_r > 0 dissipate the norm
    c = coeffs(gamma_r=-0.1, gamma_i=0.05, p_r=0.01, q_r=0.5, q_i=0.3)
    grid = Grid(20.0, 64)
    initial = initial_pulse(grid, coefficients_at(LienardParameters(), 0.5, 1.8), 0.5, 0.5)
    traj = run_evolution(SolverConfig(0.05, 2.0, theta=theta, scheme=scheme), grid, c, 1.8, initial)
    assert np.all(np.diff(traj.l2_norm) < 0)
    assert traj.n_factorizations == 1


def test_run_snapshot_bookkeeping():
    grid = Grid(10.0, 16)
    c = coeffs(gamma_r=-0.1)
    cfg = SolverConfig(1e-3, 1.0)
    traj = run_evolution(cfg, grid, c, 1.5, random_field(grid.n))
    assert len(traj.times) == cfg.n_steps + 1
    assert len(traj.snapshots) <= 201
    assert traj.snapshot_times[0] == 0.0 and traj.snapshot_times[-1] == pytest.approx(1.0)
    cfg = SolverConfig(0.1, 0.7, snapshot_stride=3)
    traj = run_evolution(cfg, grid, c, 1.5, random_field(grid.n))
    assert traj.snapshot_times == pytest.approx([0.0, 0.3, 0.6, 0.7])


def test_run_blow_up_guard():
    grid = Grid(10.0, 16)
    c = coeffs(gamma_r=200.0)
    with pytest.raises(BlowUpError) as info:
        run_evolution(SolverConfig(1e-3, 1.0, scheme="theta_euler", theta=1.0), grid, c, 1.5, random_field(grid.n))
    traj = info.value.trajectory
    assert not traj.completed
    assert traj.max_modulus_sq[-1] > 1e6 * traj.max_modulus_sq[0]


def test_run_initial_shape_checked():
    with pytest.raises(ShapeError):
        run_evolution(SolverConfig(0.1, 1.0), Grid(1.0, 8), coeffs(), 1.5, ComplexField.zeros(5))


def test_laplacian_sine_modes_exact():
    # at alpha = 2 the sine modes are eigenvectors of P; the scheme is then a scalar recurrence
    grid = Grid(1.0, 32)
    c = coeffs(p_r=0.01)
    tau, N = 1e-2, 50
    for m in (1, 3, 7):
        mode = np.sin(m * math.pi * grid.x)
        lam = (2 * math.sin(m * math.pi * grid.h / 2)) ** 2 / grid.h ** 2 * c.p_r
        traj = run_evolution(SolverConfig(tau, tau * N), grid, c, 2.0, ComplexField(mode, np.zeros(grid.n)))
        np.testing.assert_allclose(traj.final.u, mode / (1 + tau * lam) ** N, atol=1e-13)


@pytest.mark.parametrize("m", [4, 6, 10])
def test_fractional_sine_mode_damping(m):
    # a sine mode is close to an eigenvector for alpha < 2; its decay matches the stencil symbol
    alpha, grid = 1.8, Grid(1.0, 256)
    c = coeffs(p_r=0.05)
    mode = np.sin(m * math.pi * grid.x)
    tau, T = 1e-4, 0.02
    traj = run_evolution(SolverConfig(tau, T), grid, c, alpha, ComplexField(mode, np.zeros(grid.n)))
    measured = -math.log(traj.final.u @ mode / (mode @ mode)) / T
    lam = c.p_r * riesz_symbol(alpha, m * math.pi, grid.h)
    predicted = math.log1p(tau * lam) / tau
    assert measured == pytest.approx(predicted, rel=0.05)


@given(st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=15, deadline=None)
def test_linear_unitary_rotation_preserves_modulus(theta):
    # pure gamma_i rotation is norm preserving for the exact flow; Crank-Nicolson keeps it exactly
    grid = Grid(1.0, 8)
    c = coeffs(gamma_i=0.8)
    f = random_field(grid.n, 9)
    A = assemble_block_operator(c, 1.5, grid)
    g = step_theta(f, A, c, 0.1, 0.5, tol=1e-15)
    np.testing.assert_allclose(g.modulus_sq(), f.modulus_sq(), rtol=1e-12)
    h = step_theta(f, A, c, 0.1, theta, tol=1e-15)
    # explicit weight grows, implicit weight shrinks
    ratio = h.modulus_sq() / f.modulus_sq()
    if theta > 0.5:
        assert np.all(ratio >= 1 - 1e-12)
    else:
        assert np.all(ratio <= 1 + 1e-12)
