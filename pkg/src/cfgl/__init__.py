"""Riesz fractional finite-difference solver for the complex fractional
Ginzburg-Landau equation of long-range coupled Hindmarsh-Rose networks."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fractional import (  # noqa: F401
    FractionalOrder,
    RieszOperatorMatrix,
    RieszWeights,
    apply_riesz,
    assemble_riesz_matrix,
    gamma_fn,
    infrared_coefficient,
    riesz_symbol,
    riesz_weights,
    zeta_sum,
)
from .model import (  # noqa: F401
    CarrierWave,
    CfglCoefficients,
    LienardParameters,
    StabilityReport,
    check_plane_wave_stability,
    derive_coefficients,
    dispersion_omega,
    evaluate_plane_wave,
    plane_wave_amplitude,
    plane_wave_frequency,
    solitary_initial_condition,
)
from .solver import (  # noqa: F401
    BlockOperator,
    ComplexField,
    Grid,
    SolverConfig,
    Trajectory,
    assemble_block_operator,
    factor_semi_implicit_system,
    nonlinear_term,
    run_evolution,
    step_semi_implicit,
    step_theta,
)
from .hr import (  # noqa: F401
    CouplingKernel,
    HrNetworkState,
    HrParameters,
    build_kernel,
    hr_rhs,
    rk4_step,
    simulate_network,
)
