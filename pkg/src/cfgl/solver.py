r"""Space-time discretization of the CFGL equation on ``(0, b)`` with zero boundaries.

The field :math:`B = U + \mathrm{i}V` is stored at the interior nodes
``x_i = i h`` (``i = 1 .. M-1``) and stacked as ``(U, V)``. The semi-discrete
system is :math:`\dot B = A_h B + F(B)` with the dense block operator

.. math::

    A_h = \begin{pmatrix} -P + \gamma_r I & -\gamma_i I \\
                           \gamma_i I & -P + \gamma_r I \end{pmatrix},
    \qquad P_{ij} = \frac{P_r}{h^\alpha} w_{i-j}.

Two time integrators are provided:

* the theta scheme, where ``theta = 1`` is explicit Euler, ``theta = 0`` is
  fully implicit and ``theta = 1/2`` is Crank-Nicolson (note the weight
  ``theta`` sits on the *old* time level);
* the semi-implicit scheme, implicit in ``A_h`` and explicit in ``F``, which
  needs a single factorization of ``I - tau A_h`` for the whole run.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    BlowUpError,
    NonConvergenceError,
    ResourceError,
    ShapeError,
    SingularSystemError,
)
from .fractional import as_order, assemble_riesz_matrix

__all__ = [
    "Grid",
    "ComplexField",
    "BlockOperator",
    "SolverConfig",
    "Factorization",
    "Trajectory",
    "SCHEMES",
    "assemble_block_operator",
    "nonlinear_term",
    "step_theta",
    "factor_semi_implicit_system",
    "step_semi_implicit",
    "run_evolution",
    "diagnostics",
]

SCHEMES = ("theta_euler", "semi_implicit")

PIVOT_TOLERANCE = 1e-14
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``(0, b)`` with ``M`` subintervals."""

    b: float
    M: int

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"domain length must be positive, got {self.b!r}")
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))

    @property
    def h(self):
        return self.b / self.M

    @property
    def n(self):
        """Number of interior unknowns per component."""
        return self.M - 1

    @property
    def x(self):
        return self.h * np.arange(1, self.M)

    @property
    def central_mask(self):
        """Interior nodes inside the central half ``[b/4, 3b/4]``."""
        x = self.x
        return (x >= self.b / 4) & (x <= 3 * self.b / 4)


@dataclass
class ComplexField:
    """Real and imaginary parts of the field at the interior nodes."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ShapeError(f"u and v must be 1-D of equal length, got {self.u.shape} and {self.v.shape}")

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z, dtype=complex)
        return cls(z.real.copy(), z.imag.copy())

    @classmethod
    def from_stacked(cls, y):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size % 2:
            raise ShapeError(f"stacked state must have even length, got {y.shape}")
        n = y.size // 2
        return cls(y[:n].copy(), y[n:].copy())

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n))

    def __len__(self):
        return self.u.size

    def stacked(self):
        return np.concatenate([self.u, self.v])

    def to_complex(self):
        return self.u + 1j * self.v

    def modulus_sq(self):
        return self.u * self.u + self.v * self.v


@dataclass(frozen=True)
class BlockOperator:
    """Dense ``2n x 2n`` matrix ``A_h`` acting on stacked ``(U, V)``."""

    matrix: np.ndarray
    n: int

    @property
    def upper_left(self):
        return self.matrix[:self.n, :self.n]

    @property
    def upper_right(self):
        return self.matrix[:self.n, self.n:]

    @property
    def lower_left(self):
        return self.matrix[self.n:, :self.n]

    @property
    def lower_right(self):
        return self.matrix[self.n:, self.n:]

    def apply(self, state):
        if isinstance(state, ComplexField):
            return ComplexField.from_stacked(self.matrix @ state.stacked())
        return self.matrix @ np.asarray(state, dtype=float)


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    T: float
    theta: float = 0.5
    scheme: str = "semi_implicit"
    snapshot_stride: int | None = None
    fixed_point_tol: float = 1e-10
    fixed_point_max_iters: int = 50

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T!r}")
        steps = self.T / self.tau
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"T / tau must be an integer, got {steps!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.snapshot_stride is not None and self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        if not self.fixed_point_tol > 0 or self.fixed_point_max_iters < 1:
            raise ValueError("fixed-point tolerance and iteration cap must be positive")

    @property
    def n_steps(self):
        return int(round(self.T / self.tau))

    @property
    def stride(self):
        """Snapshot stride; the default keeps at most 200 snapshots after the initial one."""
        if self.snapshot_stride is not None:
            return self.snapshot_stride
        return max(1, math.ceil(self.n_steps / 200))


def assemble_block_operator(coeffs, order, grid):
    order = as_order(order)
    n = grid.n
    P = assemble_riesz_matrix(order, grid.h, n, coeffs.p_r).entries
    try:
        A = np.zeros((2 * n, 2 * n))
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate a {2 * n}x{2 * n} block operator") from exc
    diag = -P + coeffs.gamma_r * np.eye(n)
    A[:n, :n] = diag
    A[n:, n:] = diag
    idx = np.arange(n)
    A[idx, n + idx] = -coeffs.gamma_i
    A[n + idx, idx] = coeffs.gamma_i
    A.setflags(write=False)
    return BlockOperator(matrix=A, n=n)


def _nonlinear(y, q_r, q_i):
    n = y.size // 2
    u, v = y[:n], y[n:]
    m = u * u + v * v
    return np.concatenate([-(q_r * u - q_i * v) * m, -(q_i * u + q_r * v) * m])


def nonlinear_term(state, coeffs):
    """Stacked cubic term ``-(Q|B|^2 B)`` split into real and imaginary parts."""
    y = state.stacked() if isinstance(state, ComplexField) else np.asarray(state, dtype=float)
    return _nonlinear(y, coeffs.q_r, coeffs.q_i)


def _operator_matrix(A_h):
    return A_h.matrix if isinstance(A_h, BlockOperator) else np.asarray(A_h, dtype=float)


@dataclass(frozen=True)
class Factorization:
    """LU factors of ``I - tau A_h``; ``solve`` is back-substitution only."""

    lu: np.ndarray
    piv: np.ndarray
    tau: float

    @property
    def size(self):
        return self.lu.shape[0]

    def solve(self, rhs):
        return scipy.linalg.lu_solve((self.lu, self.piv), rhs, check_finite=False)


def factor_semi_implicit_system(A_h, tau):
    """Factor ``I - tau A_h`` once for reuse across time steps.

    Raises
    ------
    SingularSystemError
        If a pivot is below ``1e-14`` times the scale of its row.
    """
    A = _operator_matrix(A_h)
    system = np.eye(A.shape[0]) - tau * A
    lu, piv = scipy.linalg.lu_factor(system, check_finite=False)
    # LAPACK pivots are successive row swaps; rebuild the row order to get each row's scale
    order = np.arange(system.shape[0])
    for i, p in enumerate(piv):
        order[i], order[p] = order[p], order[i]
    row_scale = np.abs(system).max(axis=1)[order]
    pivots = np.abs(np.diag(lu))
    bad = pivots <= PIVOT_TOLERANCE * row_scale
    if np.any(bad) or not np.all(np.isfinite(lu)):
        i = int(np.argmax(bad))
        raise SingularSystemError(
            f"I - tau A_h is numerically singular (pivot {pivots[i]:.3e} at row {i})"
        )
    return Factorization(lu=lu, piv=piv, tau=float(tau))


def _theta_step(y, A, q_r, q_i, tau, theta, tol, max_iters, fact):
    if theta == 1.0:
        return y + tau * (A @ y + _nonlinear(y, q_r, q_i))
    implicit = tau * (1.0 - theta)
    rhs = y.copy()
    if theta > 0.0:
        rhs += tau * theta * (A @ y + _nonlinear(y, q_r, q_i))
    x = y
    for _ in range(max_iters):
        x_new = fact.solve(rhs + implicit * _nonlinear(x, q_r, q_i))
        if not np.all(np.isfinite(x_new)):
            break
        if np.max(np.abs(x_new - x)) <= tol:
            return x_new
        x = x_new
    raise NonConvergenceError(
        f"fixed-point iteration did not reach tol {tol:g} in {max_iters} iterations"
    )


def step_theta(state, A_h, coeffs, tau, theta, tol=1e-10, max_iters=50, factorization=None):
    """One theta-scheme step.

    Solves ``(B1 - B0)/tau = theta (A B0 + F(B0)) + (1 - theta)(A B1 + F(B1))``.
    For ``theta < 1`` the nonlinear term is resolved by Picard iteration, each
    iterate costing one solve with ``I - tau (1 - theta) A``; pass a matching
    ``factorization`` to avoid refactoring every step.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta!r}")
    A = _operator_matrix(A_h)
    y = state.stacked() if isinstance(state, ComplexField) else np.asarray(state, dtype=float)
    if theta < 1.0:
        implicit = tau * (1.0 - theta)
        if factorization is None:
            factorization = factor_semi_implicit_system(A, implicit)
        elif not math.isclose(factorization.tau, implicit, rel_tol=1e-12):
            raise ValueError("factorization was built for a different tau * (1 - theta)")
    y1 = _theta_step(y, A, coeffs.q_r, coeffs.q_i, tau, theta, tol, max_iters, factorization)
    return ComplexField.from_stacked(y1)


def step_semi_implicit(state, factorization, coeffs, tau):
    """One semi-implicit step ``B1 = (I - tau A)^{-1} (B0 + tau F(B0))``."""
    if not math.isclose(factorization.tau, tau, rel_tol=1e-12):
        raise ValueError("factorization was built for a different tau")
    y = state.stacked() if isinstance(state, ComplexField) else np.asarray(state, dtype=float)
    if y.size != factorization.size:
        raise ShapeError(f"state has {y.size} unknowns, factorization {factorization.size}")
    return ComplexField.from_stacked(factorization.solve(y + tau * _nonlinear(y, coeffs.q_r, coeffs.q_i)))


def diagnostics(modulus_sq, h, central_mask):
    """Return ``(max |B|^2, discrete L2 norm, central-half share of the squared norm)``."""
    total = float(modulus_sq.sum())
    peak = float(modulus_sq.max()) if modulus_sq.size else 0.0
    l2 = math.sqrt(h * total)
    frac = float(modulus_sq[central_mask].sum()) / total if total > 0 else math.nan
    return peak, l2, frac


@dataclass
class Trajectory:
    """Snapshots of ``|B|^2`` plus per-step scalar diagnostics."""

    x: np.ndarray
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    times: list = field(default_factory=list)
    max_modulus_sq: list = field(default_factory=list)
    l2_norm: list = field(default_factory=list)
    localization: list = field(default_factory=list)
    final: ComplexField | None = None
    n_factorizations: int = 0
    completed: bool = False

    def snapshot_array(self):
        return np.array(self.snapshots)


def run_evolution(config, grid, coeffs, order, initial, operator=None):
    """Integrate from ``t = 0`` to ``config.T`` and record snapshots and diagnostics.

    Scalar diagnostics are recorded every step (including ``t = 0``); ``|B|^2``
    snapshots every ``config.stride`` steps and at the final time.

    Raises
    ------
    BlowUpError
        If ``max |B|^2`` exceeds ``1e6`` times its initial value or becomes
        non-finite. The partial trajectory is attached to the exception.
    """
    if len(initial) != grid.n:
        raise ShapeError(f"initial field has {len(initial)} nodes, grid has {grid.n}")
    A_h = operator if operator is not None else assemble_block_operator(coeffs, order, grid)
    A = A_h.matrix
    tau = config.tau
    n_steps = config.n_steps
    stride = config.stride
    q_r, q_i = coeffs.q_r, coeffs.q_i
    h = grid.h
    mask = grid.central_mask

    traj = Trajectory(x=grid.x)
    fact = None
    if config.scheme == "semi_implicit":
        fact = factor_semi_implicit_system(A, tau)
        traj.n_factorizations += 1
    elif config.theta < 1.0:
        fact = factor_semi_implicit_system(A, tau * (1.0 - config.theta))
        traj.n_factorizations += 1

    y = initial.stacked()
    n = grid.n

    def record(step, y):
        m = y[:n] * y[:n] + y[n:] * y[n:]
        peak, l2, frac = diagnostics(m, h, mask)
        t = step * tau
        traj.times.append(t)
        traj.max_modulus_sq.append(peak)
        traj.l2_norm.append(l2)
        traj.localization.append(frac)
        if step % stride == 0 or step == n_steps:
            traj.snapshot_times.append(t)
            traj.snapshots.append(m)
        return peak

    peak0 = record(0, y)
    limit = BLOWUP_FACTOR * peak0
    for step in range(1, n_steps + 1):
        if fact is not None and config.scheme == "semi_implicit":
            y = fact.solve(y + tau * _nonlinear(y, q_r, q_i))
        else:
            try:
                y = _theta_step(
                    y, A, q_r, q_i, tau, config.theta,
                    config.fixed_point_tol, config.fixed_point_max_iters, fact,
                )
            except NonConvergenceError as exc:
                traj.final = ComplexField.from_stacked(y)
                exc.trajectory = traj
                raise
        peak = record(step, y)
        if not math.isfinite(peak) or peak > limit:
            traj.final = ComplexField.from_stacked(y)
            raise BlowUpError(
                f"max|B|^2 = {peak:.6g} exceeds {BLOWUP_FACTOR:g} x initial "
                f"({peak0:.6g}) at t = {step * tau:.6g}",
                trajectory=traj,
            )
    traj.final = ComplexField.from_stacked(y)
    traj.completed = True
    return traj
