"""Reflected Metropolis random-walk sampling for symmetric Gaussian-mixture
power posteriors, with numerical validation of the spectral-gap, isoperimetry,
and robustness machinery behind it at desk scale."""

from .diagnostics import (
    DiagnosticsReport,
    ReferenceDensity,
    build_reference,
    ess,
    mixing_time_estimate,
    mode_balance,
    projection_histogram,
    tail_mass,
    tail_radius,
    tv_to_reference,
)
from .deviations import check_dissipativity_field, empirical_process_sweep
from .grids import (
    GridAxis,
    GridDensity,
    LemmaReport,
    cheeger_constant,
    check_poincare_combination,
    check_quasiconcave_isoperimetry,
    check_structure,
    poincare_constant,
)
from .gridkernel import (
    GridKernel,
    build_mrw_grid_kernel,
    build_rmrw_grid_kernel,
    check_kernel_overlap,
    s_conductance,
)
from .mixture import ContaminationSpec, MixtureSpec, density, log_density, sample_data
from .potential import (
    PowerPosterior,
    PriorSpec,
    dissipativity_margin,
    empirical_potential,
    population_gradient,
    population_hessian,
    population_potential,
)
from .samplers import (
    ChainTrace,
    SamplerConfig,
    default_step_size,
    mrw_step,
    rmrw_step,
    run_chain,
    run_multichain,
)

__version__ = "0.1.0"

__all__ = [
    "ChainTrace",
    "ContaminationSpec",
    "DiagnosticsReport",
    "GridAxis",
    "GridDensity",
    "GridKernel",
    "LemmaReport",
    "MixtureSpec",
    "PowerPosterior",
    "PriorSpec",
    "ReferenceDensity",
    "SamplerConfig",
    "build_mrw_grid_kernel",
    "build_reference",
    "build_rmrw_grid_kernel",
    "check_dissipativity_field",
    "check_kernel_overlap",
    "check_poincare_combination",
    "check_quasiconcave_isoperimetry",
    "check_structure",
    "cheeger_constant",
    "default_step_size",
    "density",
    "dissipativity_margin",
    "empirical_potential",
    "empirical_process_sweep",
    "ess",
    "log_density",
    "mixing_time_estimate",
    "mode_balance",
    "mrw_step",
    "poincare_constant",
    "population_gradient",
    "population_hessian",
    "population_potential",
    "projection_histogram",
    "rmrw_step",
    "run_chain",
    "run_multichain",
    "s_conductance",
    "sample_data",
    "tail_mass",
    "tail_radius",
    "tv_to_reference",
    "__version__",
]
