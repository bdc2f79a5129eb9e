r"""Fractional centered differences for the Riesz derivative.

The Riesz derivative of order :math:`\alpha` acts in Fourier space as
multiplication by :math:`-|\xi|^\alpha`. On a uniform grid of spacing
:math:`h` it is approximated to second order by

.. math::

    \frac{\partial^\alpha u}{\partial |x|^\alpha}(x_i) \approx
        -\frac{1}{h^\alpha} \sum_k w_k^\alpha u_{i-k},
    \qquad
    w_k^\alpha = \frac{(-1)^k \Gamma(\alpha + 1)}
        {\Gamma(\alpha/2 - k + 1) \Gamma(\alpha/2 + k + 1)},

with the field extended by zero outside the domain.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DomainError,
    GammaOverflowError,
    PoleError,
    ResourceError,
    ShapeError,
)

__all__ = [
    "FractionalOrder",
    "RieszWeights",
    "RieszOperatorMatrix",
    "as_order",
    "gamma_fn",
    "riesz_weights",
    "infrared_coefficient",
    "zeta_sum",
    "apply_riesz",
    "assemble_riesz_matrix",
    "riesz_symbol",
]


@dataclass(frozen=True)
class FractionalOrder:
    """Order of the Riesz derivative, ``0 < alpha <= 2`` and ``alpha != 1``.

    ``alpha == 2`` is accepted so the classical Laplacian can be used as a
    validation limit; model formulas reject it separately.
    """

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or not 0.0 < a <= 2.0:
            raise DomainError(f"fractional order must satisfy 0 < alpha <= 2, got {a!r}")
        if a == 1.0:
            raise DomainError("fractional order alpha = 1 is excluded")
        object.__setattr__(self, "alpha", a)

    def __float__(self):
        return self.alpha


def as_order(order):
    """Coerce a float or :class:`FractionalOrder` to :class:`FractionalOrder`."""
    if isinstance(order, FractionalOrder):
        return order
    return FractionalOrder(float(order))


def gamma_fn(x):
    """Gamma function for real ``x`` away from the poles.

    Negative arguments use the reflection formula
    :math:`\\Gamma(x)\\Gamma(1-x) = \\pi/\\sin(\\pi x)`.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    GammaOverflowError
        If the result is not representable as a float.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma_fn requires a finite argument, got {x!r}")
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x!r}")
    try:
        if x >= 0.5:
            return math.gamma(x)
        value = math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))
    except OverflowError as exc:
        raise GammaOverflowError(f"Gamma({x!r}) overflows") from exc
    if not math.isfinite(value):
        raise GammaOverflowError(f"Gamma({x!r}) overflows")
    return value


@dataclass(frozen=True)
class RieszWeights:
    """Symmetric table of centered-difference weights ``w_k`` for ``|k| <= K``.

    ``values[K + k]`` holds ``w_k``.
    """

    alpha: float
    half_width: int
    values: np.ndarray

    def __getitem__(self, k):
        k = int(k)
        if abs(k) > self.half_width:
            raise IndexError(f"weight index {k} outside +-{self.half_width}")
        return float(self.values[self.half_width + k])

    @property
    def one_sided(self):
        """Weights ``w_0, ..., w_K`` as a read-only view."""
        return self.values[self.half_width:]


def riesz_weights(order, half_width):
    """Centered-difference weights ``w_k`` for ``|k| <= half_width``.

    ``w_0`` comes from the closed form ``Gamma(alpha+1)/Gamma(alpha/2+1)**2``
    and the rest from ``w_{k+1} = w_k (k - alpha/2) / (k + 1 + alpha/2)``,
    which never evaluates Gamma at large ``|k|``. Negative indices are mirror
    copies, so the table is exactly even.
    """
    order = as_order(order)
    half_width = int(half_width)
    if half_width < 0:
        raise ValueError(f"half_width must be non-negative, got {half_width}")
    a = order.alpha
    one_sided = np.empty(half_width + 1)
    one_sided[0] = gamma_fn(a + 1.0) / gamma_fn(a / 2.0 + 1.0) ** 2
    half = a / 2.0
    for k in range(half_width):
        one_sided[k + 1] = one_sided[k] * (k - half) / (k + 1 + half)
    values = np.concatenate([one_sided[:0:-1], one_sided])
    values.setflags(write=False)
    return RieszWeights(alpha=a, half_width=half_width, values=values)


def infrared_coefficient(order):
    r"""Small-wavenumber coefficient :math:`a_\alpha = 2\Gamma(-\alpha)\cos(\pi\alpha/2)`.

    Defined for ``0 < alpha < 2`` with ``alpha != 1``.
    """
    a = float(order)
    if not 0.0 < a < 2.0 or a == 1.0:
        raise DomainError(f"infrared coefficient needs 0 < alpha < 2, alpha != 1; got {a!r}")
    return 2.0 * gamma_fn(-a) * math.cos(math.pi * a / 2.0)


def _zeta_tail_bound(s, n):
    # Euler-Maclaurin remainder after the B_4 term.
    return s * (s + 1) * (s + 2) * (s + 3) * (s + 4) / 30240.0 * n ** (-s - 5.0)


def zeta_sum(order, tol=1e-12):
    r"""Lattice sum :math:`\sum_{n \ne 0} |n|^{-\alpha-1} = 2\zeta(\alpha + 1)`.

    A direct partial sum up to ``N - 1`` is completed by the tail integral
    :math:`N^{-\alpha}/\alpha` plus Euler-Maclaurin boundary corrections;
    ``N`` is chosen so that the remainder bound is below ``tol``.
    """
    a = float(order)
    if not a > 0.0 or not math.isfinite(a):
        raise DomainError(f"zeta_sum needs alpha > 0, got {a!r}")
    s = a + 1.0
    n = 8
    while _zeta_tail_bound(s, n) > tol:
        n *= 2
    terms = np.arange(1, n, dtype=float) ** (-s)
    partial = math.fsum(terms[::-1])
    tail = (
        n ** (1.0 - s) / (s - 1.0)
        + 0.5 * n ** (-s)
        + s * n ** (-s - 1.0) / 12.0
        - s * (s + 1) * (s + 2) * n ** (-s - 3.0) / 720.0
    )
    return 2.0 * (partial + tail)


def apply_riesz(weights, field, h):
    """Apply the truncated centered-difference Riesz derivative to interior values.

    Parameters
    ----------
    weights : RieszWeights
        Must cover ``len(field) - 1`` offsets on each side.
    field : (n,) array
        Values at the interior nodes ``x_1 .. x_n``; nodes outside are zero.
    h : float
        Grid spacing.

    Returns
    -------
    (n,) array
        ``y_i = -h**(-alpha) * sum_j w_{i-j} field_j``.
    """
    field = np.asarray(field, dtype=float)
    if field.ndim != 1:
        raise ShapeError(f"field must be one-dimensional, got shape {field.shape}")
    if h <= 0:
        raise ValueError(f"grid spacing must be positive, got {h!r}")
    n = field.size
    if n == 0:
        return np.zeros(0)
    if weights.half_width < n - 1:
        raise ShapeError(
            f"weights cover +-{weights.half_width} offsets but a field of length {n} "
            f"needs +-{n - 1}"
        )
    c = weights.half_width
    window = weights.values[c - (n - 1):c + n]
    full = np.convolve(field, window)
    return -full[n - 1:2 * n - 1] / h ** weights.alpha


@dataclass(frozen=True)
class RieszOperatorMatrix:
    """Dense symmetric Toeplitz matrix with entries ``scale * w_{i-j}``."""

    size: int
    scale: float
    entries: np.ndarray


def assemble_riesz_matrix(order, h, interior_size, scale_coefficient):
    """Assemble the dense matrix ``P`` with ``P[i, j] = scale_coefficient / h**alpha * w_{i-j}``.

    The leading minus of the centered difference is *not* included, so the
    Riesz derivative of a vector ``u`` scaled by ``scale_coefficient`` is
    ``-P @ u``.
    """
    order = as_order(order)
    n = int(interior_size)
    if n < 1:
        raise ValueError(f"interior_size must be at least 1, got {n}")
    if h <= 0:
        raise ValueError(f"grid spacing must be positive, got {h!r}")
    scale = float(scale_coefficient) / h ** order.alpha
    w = riesz_weights(order, n - 1)
    try:
        entries = scale * scipy.linalg.toeplitz(w.one_sided)
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate a {n}x{n} dense operator") from exc
    entries.setflags(write=False)
    return RieszOperatorMatrix(size=n, scale=scale, entries=entries)


def riesz_symbol(order, xi, h):
    r"""Fourier multiplier of the (untruncated) weight stencil divided by ``h**alpha``.

    :math:`\sum_k w_k e^{\mathrm{i} k \xi h} = |2\sin(\xi h / 2)|^\alpha`, which
    tends to :math:`|\xi|^\alpha` as ``h -> 0``. The discrete Riesz derivative
    therefore multiplies a Fourier mode by minus this value.
    """
    a = float(order)
    xi = np.asarray(xi, dtype=float)
    return np.abs(2.0 * np.sin(xi * h / 2.0)) ** a / h ** a
