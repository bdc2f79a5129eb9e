r"""Chain of Hindmarsh-Rose neurons with power-law long-range coupling.

.. math::

    \dot u_n &= v_n - a u_n^3 + b u_n^2 - w_n + I
        + \sum_{m \ne n} K_\alpha(n - m) (u_n - u_m) \\
    \dot v_n &= c - d u_n^2 - e v_n \\
    \dot w_n &= r [s (u_n - u_0) - w_n]

with :math:`K_\alpha(d) = K / |d|^{\alpha + 1}` on an open chain of ``N``
neurons. Integration is classical fixed-step RK4.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DivergenceError, DomainError, ShapeError

__all__ = [
    "HrParameters",
    "CouplingKernel",
    "HrNetworkState",
    "HrTrajectory",
    "build_kernel",
    "hr_rhs",
    "rk4_step",
    "simulate_network",
    "default_initial_state",
    "detect_spikes",
]

DIVERGENCE_LIMIT = 1e3


@dataclass(frozen=True)
class HrParameters:
    """Kinetic constants, stimulation current and coupling.

    ``coupling_sign`` multiplies the coupling sum; ``+1`` keeps the sign of the
    model as written, ``-1`` gives ordinary diffusive coupling.
    """

    a: float = 1.0
    b: float = 3.0
    c: float = 1.0
    d: float = 5.0
    r: float = 0.008
    s: float = 4.0
    e: float = 1.0
    u0: float = -1.6
    I: float = 3.0  # noqa: E741
    K: float = 0.01
    alpha: float = 1.8
    coupling_sign: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        if self.coupling_sign not in (1.0, -1.0):
            raise DomainError("coupling_sign must be +1 or -1")


@dataclass(frozen=True)
class CouplingKernel:
    """Coupling strengths ``table[d - 1] = K / d**(alpha + 1)`` for ``d = 1 .. N-1``."""

    N: int
    K: float
    alpha: float
    table: np.ndarray

    def strength(self, n, m):
        d = abs(int(n) - int(m))
        return 0.0 if d == 0 else float(self.table[d - 1])

    @cached_property
    def matrix(self):
        """Dense ``N x N`` coupling matrix with zero diagonal."""
        col = np.concatenate([[0.0], self.table])
        return scipy.linalg.toeplitz(col)


def build_kernel(N, K, alpha):
    N = int(N)
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    d = np.arange(1, N, dtype=float)
    table = K / d ** (alpha + 1.0)
    table.setflags(write=False)
    return CouplingKernel(N=N, K=float(K), alpha=float(alpha), table=table)


@dataclass
class HrNetworkState:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if not (self.u.shape == self.v.shape == self.w.shape) or self.u.ndim != 1 or self.u.size < 1:
            raise ShapeError("u, v, w must be 1-D arrays of equal nonzero length")

    @property
    def N(self):
        return self.u.size

    def as_array(self):
        return np.stack([self.u, self.v, self.w])


def _coupling(u, kernel):
    if u.size == 1:
        return np.zeros(1)
    # the explicit difference is exactly zero on the synchronous manifold
    return (kernel.matrix * (u[:, None] - u[None, :])).sum(axis=1)


def _rhs(y, p, kernel):
    u, v, w = y
    du = v - p.a * u ** 3 + p.b * u ** 2 - w + p.I + p.coupling_sign * _coupling(u, kernel)
    dv = p.c - p.d * u ** 2 - p.e * v
    dw = p.r * (p.s * (u - p.u0) - w)
    return np.stack([du, dv, dw])


def hr_rhs(state, params, kernel):
    """Time derivatives ``(du, dv, dw)`` of the network."""
    if kernel.N != state.N:
        raise ShapeError(f"kernel built for N = {kernel.N}, state has N = {state.N}")
    du, dv, dw = _rhs(state.as_array(), params, kernel)
    return du, dv, dw


def _rk4(y, p, kernel, dt):
    k1 = _rhs(y, p, kernel)
    k2 = _rhs(y + 0.5 * dt * k1, p, kernel)
    k3 = _rhs(y + 0.5 * dt * k2, p, kernel)
    k4 = _rhs(y + dt * k3, p, kernel)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state, params, kernel, dt):
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if kernel.N != state.N:
        raise ShapeError(f"kernel built for N = {kernel.N}, state has N = {state.N}")
    y = _rk4(state.as_array(), params, kernel, dt)
    if not np.all(np.isfinite(y)):
        raise DivergenceError(f"non-finite state after RK4 step at t = {state.t + dt:g}")
    return HrNetworkState(y[0], y[1], y[2], state.t + dt)


def default_initial_state(N, params, perturbation=0.1, mode="bump", seed=0):
    """Rest state ``u = u0, v = (c - d u0^2)/e, w = 0`` with a small kick.

    ``mode="bump"`` adds ``perturbation`` to the membrane potential of the
    middle neuron; ``mode="random"`` adds Gaussian noise of that standard
    deviation to every neuron, drawn from ``numpy.random.default_rng(seed)``.
    """
    N = int(N)
    u = np.full(N, params.u0)
    v = np.full(N, (params.c - params.d * params.u0 ** 2) / params.e)
    w = np.zeros(N)
    if mode == "bump":
        u[N // 2] += perturbation
    elif mode == "random":
        u += perturbation * np.random.default_rng(seed).standard_normal(N)
    else:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    return HrNetworkState(u, v, w, 0.0)


def detect_spikes(u_prev, u_next, threshold, last_spike, t, min_gap):
    """Mark upward threshold crossings that respect the refractory gap.

    ``last_spike`` is updated in place; returns a boolean mask of new spikes.
    """
    crossed = (u_prev < threshold) & (u_next >= threshold) & (t - last_spike >= min_gap)
    last_spike[crossed] = t
    return crossed


@dataclass
class HrTrajectory:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray | None = None
    w: np.ndarray | None = None
    spike_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    final: HrNetworkState | None = None


def simulate_network(
    initial,
    params,
    kernel,
    dt,
    T,
    record_stride=1,
    record_all=False,
    threshold=1.0,
):
    """Fixed-step RK4 run from ``initial.t`` to ``initial.t + T``.

    Records ``u`` (and ``v``, ``w`` when ``record_all``) every ``record_stride``
    steps including the initial state. Spikes are upward crossings of
    ``threshold`` separated by at least ``10 * dt``.

    Raises
    ------
    DivergenceError
        If the state becomes non-finite or ``max |u|`` exceeds 1e3.
    """
    if not T > 0 or not dt > 0:
        raise ValueError("T and dt must be positive")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if kernel.N != initial.N:
        raise ShapeError(f"kernel built for N = {kernel.N}, state has N = {initial.N}")
    n_steps = int(round(T / dt))
    y = initial.as_array().copy()
    t0 = initial.t
    times, us, vs, ws = [t0], [y[0].copy()], [y[1].copy()], [y[2].copy()]
    counts = np.zeros(initial.N, dtype=int)
    last_spike = np.full(initial.N, -np.inf)
    min_gap = 10.0 * dt * (1.0 - 1e-9)

    def partial():
        return HrTrajectory(
            t=np.array(times),
            u=np.array(us),
            v=np.array(vs) if record_all else None,
            w=np.array(ws) if record_all else None,
            spike_counts=counts.copy(),
        )

    for step in range(1, n_steps + 1):
        y_new = _rk4(y, params, kernel, dt)
        t = t0 + step * dt
        if not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new[0])) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"network diverged at t = {t:g}", trajectory=partial())
        counts += detect_spikes(y[0], y_new[0], threshold, last_spike, t, min_gap)
        y = y_new
        if step % record_stride == 0:
            times.append(t)
            us.append(y[0].copy())
            vs.append(y[1].copy())
            ws.append(y[2].copy())
    traj = partial()
    traj.final = HrNetworkState(y[0], y[1], y[2], t0 + n_steps * dt)
    return traj
