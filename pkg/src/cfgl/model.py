r"""Model-level formulas for the complex fractional Ginzburg-Landau equation.

The amplitude equation is

.. math::

    \partial_t B = (\gamma_r + \mathrm{i}\gamma_i) B
        + P_r \frac{\partial^\alpha B}{\partial |x|^\alpha}
        - (Q_r + \mathrm{i} Q_i) |B|^2 B .

Its coefficients follow from the Lienard-form network parameters and the
carrier frequency :math:`\Omega` given by the linear dispersion relation
:math:`\Omega^2 = \Omega_0^2 + c_0 a_\alpha |k|^\alpha`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditionUndefinedError,
    DomainError,
    ImaginaryFrequencyError,
    NegativeRadicandError,
)
from .fractional import as_order, infrared_coefficient

__all__ = [
    "LienardParameters",
    "CfglCoefficients",
    "CarrierWave",
    "StabilityReport",
    "dispersion_omega",
    "dispersion_cutoff",
    "derive_coefficients",
    "coefficients_at",
    "carrier_wave",
    "plane_wave_amplitude",
    "plane_wave_frequency",
    "evaluate_plane_wave",
    "check_plane_wave_stability",
    "solitary_initial_condition",
]


@dataclass(frozen=True)
class LienardParameters:
    """Network parameters in Lienard form; defaults are the reference set."""

    omega0_sq: float = 0.032
    lambda1: float = 0.01
    lambda3: float = 0.023
    eta0: float = 0.1
    eta1: float = 0.001
    eta2: float = 0.15
    r: float = 0.008
    c0: float = 0.001
    c1: float = 0.001
    B0: float = 0.5

    def __post_init__(self):
        if not self.omega0_sq > 0:
            raise DomainError(f"omega0_sq must be positive, got {self.omega0_sq!r}")
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r!r}")


@dataclass(frozen=True)
class CfglCoefficients:
    gamma_r: float
    gamma_i: float
    p_r: float
    q_r: float
    q_i: float

    def __post_init__(self):
        for name in ("gamma_r", "gamma_i", "p_r", "q_r", "q_i"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"coefficient {name} is not finite")

    @property
    def gamma(self):
        return complex(self.gamma_r, self.gamma_i)

    @property
    def q(self):
        return complex(self.q_r, self.q_i)


@dataclass(frozen=True)
class CarrierWave:
    k: float
    omega: float
    theta0: float = 0.0


def _order_alpha(order):
    a = float(as_order(order).alpha)
    if a >= 2.0:
        raise DomainError("model formulas require alpha < 2")
    return a


def dispersion_cutoff(params, order):
    """Wavenumber where the dispersion radicand vanishes, or ``inf`` if it never does."""
    a = _order_alpha(order)
    slope = params.c0 * infrared_coefficient(a)
    if slope >= 0:
        return math.inf
    return (params.omega0_sq / -slope) ** (1.0 / a)


def dispersion_omega(k, params, order):
    """Linear-wave frequency ``sqrt(omega0_sq + c0 * a_alpha * |k|**alpha)``."""
    a = _order_alpha(order)
    radicand = params.omega0_sq + params.c0 * infrared_coefficient(a) * abs(k) ** a
    if not radicand > 0:
        cutoff = dispersion_cutoff(params, a)
        raise ImaginaryFrequencyError(
            f"no real frequency at |k| = {abs(k)!r}: radicand {radicand!r} <= 0 "
            f"(cutoff |k| = {cutoff!r})",
            cutoff=cutoff,
        )
    return math.sqrt(radicand)


def derive_coefficients(params, omega, order):
    """Dissipation, diffusion and nonlinearity coefficients at carrier frequency ``omega``.

    The imaginary nonlinearity uses a ``1/omega`` prefactor.
    """
    a = _order_alpha(order)
    if not omega > 0:
        raise DomainError(f"carrier frequency must be positive, got {omega!r}")
    w0 = params.omega0_sq
    om2 = omega * omega
    denom = params.r ** 2 + om2
    gamma_r = params.lambda3 * w0 / (2.0 * denom) - params.eta0 / 2.0
    gamma_i = -params.r * params.lambda3 * w0 / (2.0 * omega * denom)
    p_r = params.c1 * infrared_coefficient(a) / 2.0
    q_r = params.eta2 / 2.0 + params.eta1 * params.lambda1 / w0
    q_i = (
        params.eta2 / 2.0
        - om2 * params.eta1 ** 2 / (2.0 * w0)
        - params.lambda1 ** 2 / w0
    ) / omega
    return CfglCoefficients(gamma_r=gamma_r, gamma_i=gamma_i, p_r=p_r, q_r=q_r, q_i=q_i)


def coefficients_at(params, k, order, omega=None):
    """Coefficients for carrier wavenumber ``k``; ``omega`` overrides the dispersion value."""
    if omega is None:
        omega = dispersion_omega(k, params, order)
    return derive_coefficients(params, omega, order)


def carrier_wave(k, params, order, theta0=0.0):
    return CarrierWave(k=float(k), omega=dispersion_omega(k, params, order), theta0=float(theta0))


def _detuned_gain(coeffs, k, order):
    # gamma_r - P_r |k|^alpha
    a = float(as_order(order).alpha)
    return coeffs.gamma_r - coeffs.p_r * abs(k) ** a


def plane_wave_amplitude(coeffs, k, order):
    if coeffs.q_r == 0:
        raise DomainError("plane-wave amplitude needs q_r != 0")
    radicand = _detuned_gain(coeffs, k, order) / coeffs.q_r
    if radicand < 0:
        raise NegativeRadicandError(
            f"no real plane wave at k = {k!r}: amplitude radicand {radicand!r} < 0"
        )
    return math.sqrt(radicand)


def plane_wave_frequency(coeffs, k, order):
    if coeffs.q_r == 0:
        raise DomainError("plane-wave frequency needs q_r != 0")
    a = float(as_order(order).alpha)
    return (
        coeffs.q_i * coeffs.gamma_r
        - coeffs.q_r * coeffs.gamma_i
        - coeffs.q_i * coeffs.p_r * abs(k) ** a
    ) / coeffs.q_r


def evaluate_plane_wave(coeffs, carrier, x, t, order):
    """Plane wave ``A exp(i(k x - omega_alpha(k) t + theta0))``; ``x``, ``t`` may be arrays."""
    amp = plane_wave_amplitude(coeffs, carrier.k, order)
    freq = plane_wave_frequency(coeffs, carrier.k, order)
    phase = carrier.k * np.asarray(x) - freq * np.asarray(t) + carrier.theta0
    return amp * np.exp(1j * phase)


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the chained test ``0 < g < gamma_i/q_i < 3 g`` with ``g = gamma_r - P_r|k|^alpha``."""

    detuned_gain: float
    ratio: float
    positive_gain: bool
    gain_below_ratio: bool
    ratio_below_triple_gain: bool

    @property
    def stable(self):
        return self.positive_gain and self.gain_below_ratio and self.ratio_below_triple_gain


def check_plane_wave_stability(coeffs, k, order):
    if coeffs.q_i == 0:
        raise ConditionUndefinedError("stability condition undefined for q_i = 0")
    g = _detuned_gain(coeffs, k, order)
    ratio = coeffs.gamma_i / coeffs.q_i
    return StabilityReport(
        detuned_gain=g,
        ratio=ratio,
        positive_gain=0 < g,
        gain_below_ratio=g < ratio,
        ratio_below_triple_gain=ratio < 3 * g,
    )


def solitary_initial_condition(x, B0, k, coeffs):
    r"""Solitary-pulse initial profile sampled at ``x``.

    With :math:`\beta = 3Q_r/(2Q_i)`, :math:`\mu = \beta + \sqrt{2 + \beta^2}` and
    :math:`D = 2\cosh(2kx) + \cos(2\mu k x)`,

    .. math::

        B(x) = B_0 \frac{e^{-kx}(1 + \cos 2\mu k x)}{D}
            - \mathrm{i} B_0 \frac{e^{-kx} \sin 2\mu k x}{D}.

    The first bracket is taken as the real part and the second as the
    imaginary part. The profile peaks near ``x = 0`` and decays both ways, so
    callers place the pulse by shifting ``x``.
    """
    if coeffs.q_i == 0:
        raise DomainError("solitary profile undefined for q_i = 0 (beta diverges)")
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("grid must be nonempty")
    beta = 3.0 * coeffs.q_r / (2.0 * coeffs.q_i)
    mu = beta + math.sqrt(2.0 + beta * beta)
    kx = k * x
    cos_term = np.cos(2.0 * mu * kx)
    sin_term = np.sin(2.0 * mu * kx)
    # beyond |kx| = 300 the ratio underflows to zero; skip to keep cosh finite
    safe = np.abs(kx) < 300.0
    denom = 2.0 * np.cosh(2.0 * kx[safe]) + cos_term[safe]
    assert np.all(denom >= 1.0)
    ratio = np.zeros_like(x)
    ratio[safe] = np.exp(-kx[safe]) / denom
    real = B0 * (1.0 + cos_term) * ratio
    imag = -B0 * sin_term * ratio
    return real + 1j * imag
