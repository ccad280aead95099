"""Numerical causal action principle for weighted counting measures.

Points are Hermitian trace-one operators with bounded spectral signature; the
causal action of a finite weighted configuration is minimized with
quasi-Newton methods over an unconstrained parametrization.
"""

__version__ = "0.1.0"

from .action import (
    ActionReport,
    ProductSpectrum,
    causal_action,
    classify,
    critical_angles,
    lagrangian,
    lagrangian_f2_angles,
    lagrangian_n1_closed,
    product_spectrum,
)
from .errors import *  # noqa: F401,F403
from .geometry import PlotRow, SpinProjection, cone_classify, plot_rows, spin_projection
from .gradient import GradCheckReport, action_of_params, fd_check, grad
from .operators import (
    BlochCoords,
    CausalClass,
    Configuration,
    OperatorPoint,
    f2_from_bloch,
    f2_to_bloch,
    validate_point,
)
from .optimize import (
    OptimizerSettings,
    RunResult,
    StageResult,
    TerminationReason,
    bfgs,
    lbfgs,
    line_search_strong_wolfe,
    minimize_two_stage,
    multi_restart,
)
from .oracles import (
    OraclePrediction,
    SpherePoints,
    asymptotic_table,
    dirac2d_config,
    dirac4d_config,
    dirac4d_lagrangian,
    is_causally_trivial,
    iso_lagrangian,
    local_min_check,
    optimal_weights,
    orthogonal_min_config,
    tammes_points,
    welch_floor,
)
from .parametrize import DofReport, UnconstrainedParams, decode, default_mu0, dof, init_random, unitary_from_generator
