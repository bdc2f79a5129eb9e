"""Flat ``key = value`` run configuration with a closed schema.

Lines are UTF-8, ``#`` starts a comment, blank lines are ignored. Every key
has a default, so an empty file yields the reference parameter set.
``auto`` is accepted for optional values (derived coefficients, automatic
snapshot stride, pulse centered in the domain).
"""

import math
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DomainError
from .fractional import FractionalOrder

__all__ = ["RunConfig", "SCHEMA", "parse_config", "load_config", "default_config", "OUTPUT_ROOT_ENV"]

OUTPUT_ROOT_ENV = "CFGL_OUTPUT_ROOT"
AUTO = "auto"


@dataclass(frozen=True)
class Field:
    kind: str  # float, int, str, bool, floats, ints
    default: object
    optional: bool = False
    choices: tuple = ()
    help: str = ""


def _f(default, help="", optional=False):
    return Field("float", default, optional, help=help)


def _i(default, help="", optional=False):
    return Field("int", default, optional, help=help)


SCHEMA = {
    # fractional order and carrier wave
    "alpha": _f(1.8, "Riesz derivative order, 0 < alpha < 2, alpha != 1"),
    "alphas": Field("floats", (1.6, 1.7, 1.8), help="orders for dispersion curves"),
    "k": _f(0.5, "carrier wavenumber"),
    "theta0": _f(0.0, "plane-wave phase"),
    "omega": _f(None, "carrier frequency override", optional=True),
    # Lienard-form parameters
    "omega0_sq": _f(0.032),
    "lambda1": _f(0.01),
    "lambda3": _f(0.023),
    "eta0": _f(0.1),
    "eta1": _f(0.001),
    "eta2": _f(0.15),
    "r": _f(0.008),
    "c0": _f(0.001),
    "c1": _f(0.001),
    "B0": _f(0.5),
    # coefficient overrides
    "gamma_r": _f(None, optional=True),
    "gamma_i": _f(None, optional=True),
    "p_r": _f(None, optional=True),
    "q_r": _f(None, optional=True),
    "q_i": _f(None, optional=True),
    # grid and time stepping
    "b": _f(100.0, "domain length"),
    "M": _i(512, "number of subintervals"),
    "pulse_center": _f(None, "x position of the initial pulse (auto = b/2)", optional=True),
    "tau": _f(1e-4),
    "T": _f(0.2),
    "theta": _f(0.5),
    "scheme": Field("str", "semi_implicit", choices=("semi_implicit", "theta_euler")),
    "snapshot_stride": _i(None, optional=True),
    "fixed_point_tol": _f(1e-10),
    "fixed_point_max_iters": _i(50),
    # dispersion table
    "k_min": _f(0.0),
    "k_max": _f(3.0),
    "k_points": _i(301),
    # Hindmarsh-Rose network
    "hr_N": _i(16),
    "hr_a": _f(1.0),
    "hr_b": _f(3.0),
    "hr_c": _f(1.0),
    "hr_d": _f(5.0),
    "hr_r": _f(0.008),
    "hr_s": _f(4.0),
    "hr_e": _f(1.0),
    "hr_u0": _f(-1.6),
    "hr_I": _f(3.0),
    "hr_K": _f(0.01),
    "hr_alpha": _f(1.8),
    "hr_coupling_sign": _i(1),
    "hr_dt": _f(0.01),
    "hr_T": _f(1000.0),
    "hr_stride": _i(10),
    "hr_threshold": _f(1.0),
    "hr_init": Field("str", "bump", choices=("bump", "random")),
    "hr_perturbation": _f(0.1),
    # convergence study
    "conv_space_b": _f(2.0),
    "conv_space_M": Field("ints", (128, 256, 512, 1024)),
    "conv_space_ref_M": _i(8192),
    "conv_time_M": _i(256),
    "conv_time_b": _f(100.0),
    "conv_time_T": _f(0.05),
    "conv_time_N": Field("ints", (5, 10, 20, 40, 80)),
    "conv_time_tol": _f(1e-14),
    # benchmark
    "bench_M": Field("ints", (128, 256, 512, 1024)),
    "bench_steps": _i(100),
    "bench_implicit_steps": _i(20),
    # run bookkeeping
    "out_dir": Field("str", None, optional=True),
    "seed": _i(0),
}


def _parse_value(key, spec, raw, line):
    raw = raw.strip()
    if spec.optional and raw.lower() == AUTO:
        return None
    try:
        if spec.kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if spec.kind == "int":
            return int(raw)
        if spec.kind == "floats":
            return tuple(float(p) for p in raw.split(",") if p.strip())
        if spec.kind == "ints":
            return tuple(int(p) for p in raw.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {spec.kind} for key {key!r}", line) from None
    if spec.kind == "str":
        if not raw:
            raise ConfigError(f"empty value for key {key!r}", line)
        if spec.choices and raw not in spec.choices:
            raise ConfigError(f"{key} must be one of {', '.join(spec.choices)}, got {raw!r}", line)
        return raw
    raise AssertionError(spec.kind)


def _format_value(spec, value):
    if value is None:
        return AUTO
    if spec.kind == "float":
        return repr(float(value))
    if spec.kind == "floats":
        return ", ".join(repr(float(v)) for v in value)
    if spec.kind == "ints":
        return ", ".join(str(int(v)) for v in value)
    return str(value)


class RunConfig:
    """Validated mapping of every schema key to its value."""

    def __init__(self, values=None, lines=None):
        merged = {key: spec.default for key, spec in SCHEMA.items()}
        for key, value in (values or {}).items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}", (lines or {}).get(key))
            merged[key] = value
        self._values = merged
        self._lines = dict(lines or {})
        self._validate()

    def __getitem__(self, key):
        return self._values[key]

    def __getattr__(self, key):
        try:
            return self.__dict__["_values"][key]
        except KeyError:
            raise AttributeError(key) from None

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self._values == other._values

    def __repr__(self):
        return f"RunConfig({self._values!r})"

    def as_dict(self):
        return dict(self._values)

    def replace(self, **updates):
        values = self.as_dict()
        values.update(updates)
        return RunConfig(values)

    def echo(self, header=None):
        """Serialize every key; ``parse_config(c.echo()) == c``."""
        out = []
        if header:
            out.extend(f"# {h}" for h in header.splitlines())
        for key, spec in SCHEMA.items():
            out.append(f"{key} = {_format_value(spec, self._values[key])}")
        return "\n".join(out) + "\n"

    # builders ------------------------------------------------------------

    def order(self, alpha=None):
        return FractionalOrder(self.alpha if alpha is None else alpha)

    def lienard(self):
        from .model import LienardParameters

        return LienardParameters(
            omega0_sq=self.omega0_sq, lambda1=self.lambda1, lambda3=self.lambda3,
            eta0=self.eta0, eta1=self.eta1, eta2=self.eta2, r=self.r,
            c0=self.c0, c1=self.c1, B0=self.B0,
        )

    def coefficients(self, alpha=None):
        """CFGL coefficients at the configured carrier, with any overrides applied."""
        from dataclasses import replace

        from .model import coefficients_at

        coeffs = coefficients_at(self.lienard(), self.k, self.order(alpha), omega=self.omega)
        overrides = {
            key: self._values[key]
            for key in ("gamma_r", "gamma_i", "p_r", "q_r", "q_i")
            if self._values[key] is not None
        }
        return replace(coeffs, **overrides)

    def grid(self):
        from .solver import Grid

        return Grid(self.b, self.M)

    def solver_config(self):
        from .solver import SolverConfig

        return SolverConfig(
            tau=self.tau, T=self.T, theta=self.theta, scheme=self.scheme,
            snapshot_stride=self.snapshot_stride,
            fixed_point_tol=self.fixed_point_tol,
            fixed_point_max_iters=self.fixed_point_max_iters,
        )

    def center(self):
        return self.b / 2 if self.pulse_center is None else self.pulse_center

    def hr_params(self):
        from .hr import HrParameters

        return HrParameters(
            a=self.hr_a, b=self.hr_b, c=self.hr_c, d=self.hr_d, r=self.hr_r,
            s=self.hr_s, e=self.hr_e, u0=self.hr_u0, I=self.hr_I, K=self.hr_K,
            alpha=self.hr_alpha, coupling_sign=float(self.hr_coupling_sign),
        )

    def output_dir(self):
        if self.out_dir is not None:
            return Path(self.out_dir)
        return Path(os.environ.get(OUTPUT_ROOT_ENV, "cfgl_runs"))

    # validation ----------------------------------------------------------

    def _fail(self, key, message):
        raise ConfigError(message, self._lines.get(key))

    def _validate(self):
        v = self._values
        for key, spec in SCHEMA.items():
            if v[key] is None and not spec.optional:
                self._fail(key, f"{key} is required")

        def positive(*keys):
            for key in keys:
                if not v[key] > 0:
                    self._fail(key, f"{key} must be positive, got {v[key]!r}")

        for key in ("alpha",):
            a = v[key]
            if not 0 < a < 2 or a == 1:
                self._fail(key, f"{key} must satisfy 0 < alpha < 2 and alpha != 1, got {a!r}")
        if not v["alphas"]:
            self._fail("alphas", "alphas must list at least one order")
        for a in v["alphas"]:
            if not 0 < a < 2 or a == 1:
                self._fail("alphas", f"alphas entries must satisfy 0 < alpha < 2, alpha != 1; got {a!r}")
        positive("omega0_sq", "r", "b", "tau", "T", "fixed_point_tol", "fixed_point_max_iters",
                 "k_points", "hr_N", "hr_r", "hr_alpha", "hr_dt", "hr_T", "hr_stride",
                 "conv_space_b", "conv_space_ref_M", "conv_time_T", "conv_time_b",
                 "conv_time_tol", "bench_steps", "bench_implicit_steps")
        if v["omega"] is not None and not v["omega"] > 0:
            self._fail("omega", "omega override must be positive")
        if v["M"] < 2:
            self._fail("M", f"M must be >= 2, got {v['M']}")
        steps = v["T"] / v["tau"]
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            self._fail("tau", f"T / tau must be an integer, got {steps!r}")
        if not 0 <= v["theta"] <= 1:
            self._fail("theta", f"theta must lie in [0, 1], got {v['theta']!r}")
        if v["snapshot_stride"] is not None and v["snapshot_stride"] < 1:
            self._fail("snapshot_stride", "snapshot_stride must be >= 1")
        if v["k_points"] < 2 or not v["k_max"] > v["k_min"] or v["k_min"] < 0:
            self._fail("k_points", "dispersion range needs 0 <= k_min < k_max and k_points >= 2")
        if v["pulse_center"] is not None and not 0 < v["pulse_center"] < v["b"]:
            self._fail("pulse_center", "pulse_center must lie inside (0, b)")
        if v["hr_coupling_sign"] not in (1, -1):
            self._fail("hr_coupling_sign", "hr_coupling_sign must be 1 or -1")
        for key in ("conv_space_M", "conv_time_N"):
            ladder = v[key]
            if len(ladder) < 3 or any(x <= 0 for x in ladder) or list(ladder) != sorted(set(ladder)):
                self._fail(key, f"{key} must be an increasing ladder of at least 3 positive entries")
        if any(m < 2 for m in v["conv_space_M"]):
            self._fail("conv_space_M", "spatial ladder entries must be >= 2")
        if any(v["conv_space_ref_M"] % m for m in v["conv_space_M"]) or v["conv_space_ref_M"] <= v["conv_space_M"][-1]:
            self._fail("conv_space_ref_M", "conv_space_ref_M must be a finer multiple of every ladder entry")
        if v["conv_time_M"] < 2:
            self._fail("conv_time_M", "conv_time_M must be >= 2")
        if not v["bench_M"] or any(m < 2 for m in v["bench_M"]):
            self._fail("bench_M", "bench_M entries must be >= 2")
        try:
            self.lienard()
            self.hr_params()
        except DomainError as exc:
            raise ConfigError(str(exc)) from None


def parse_config(text):
    """Parse configuration text into a validated :class:`RunConfig`."""
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", lineno)
        key, raw = (p.strip() for p in content.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        values[key] = _parse_value(key, SCHEMA[key], raw, lineno)
        lines[key] = lineno
    return RunConfig(values, lines)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config():
    return RunConfig()
