"""Sampled-data stability analysis of fixed-frequency PWM DC-DC converters.

The package solves the T-periodic orbit of a two-stage switched-linear
converter model, builds the exact one-cycle Jacobian and its feedback
decomposition, evaluates the period-doubling / saddle-node /
Neimark-Sacker boundary conditions (generally and in buck closed form,
including a harmonic-balance equivalent), and cross-checks everything
against an exact piecewise-exponential time-domain simulator.
"""

from .buck import (
    BuckPlant,
    HarmonicBalanceResult,
    HarmonicGains,
    TaylorCoefficients,
    equivalence_residual,
    harmonic_balance,
    harmonic_balance_vs,
    harmonic_gains,
    lem_boundary_coefficient,
    make_buck_plant,
    pdb_residual_lem,
    pdb_residual_tem,
    taylor_coefficients,
    taylor_critical_vs,
    taylor_pdb_residual,
    tem_boundary_coefficient,
    transfer_eval,
    vs_critical_lem,
    vs_critical_tem,
)
from .config import ConverterConfig, SweepSpec, build, emit_config, parse_config
from .errors import (
    ConfigError,
    DegenerateOrbitError,
    DimensionError,
    DivergenceError,
    DomainError,
    GrazingError,
    NoConvergenceError,
    NoRootError,
    NoSwitchingError,
    OracleInvalidError,
    PwmStabError,
    ResolventPoleError,
    SingularMatrixError,
)
from .model import (
    BuckColumns,
    InputVector,
    ModulationEdge,
    RampSignal,
    SwitchedLinearModel,
    compensator_output,
    detect_buck_structure,
    preset_vmc_buck,
    ramp_slope,
    ramp_value,
)
from .sim import (
    CycleSimulator,
    Trajectory,
    detect_period,
    fd_jacobian,
    find_fixed_point,
    simulate,
    simulate_cycle,
    steady_period,
    stroboscopic_map,
)
from .stability import (
    BoundaryCurve,
    CurveSample,
    JacobianDecomposition,
    StabilityClass,
    StabilityReport,
    classify,
    f_plot,
    general_critical_value,
    jacobian,
    nsb_residual,
    nyquist,
    pdb_residual,
    s_plot,
    snb_residual,
)
from .steadystate import (
    OrbitDerivatives,
    SteadyState,
    orbit_derivatives,
    solve_periodic_orbit,
    switching_residual,
    x0_of_d,
)

__version__ = "0.1.0"
