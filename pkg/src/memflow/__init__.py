"""memflow: a solver and verification lab for a family of memory-kernel
integro-differential equations and their local limit equation.

The package evaluates the oscillatory memory field driving the family, the
finite-horizon frozen field and the local limit field (a resonance-sphere
integral), time-steps both equations, and checks every quantitative estimate
that comes with them: norm decay, slope bounds, averaging control, field-gap
envelopes, two-sided norm comparisons and h-convergence rates.
"""

from .analysis import (
    BoundReport,
    StudyRow,
    StudyTable,
    check_avg_control,
    check_decay,
    check_derivative_bound,
    check_field_envelopes,
    check_frozen_limit_gap,
    check_memory_frozen_gap,
    comparison_ode_envelopes,
    convergence_study,
    estimate_lipschitz,
    gronwall_check,
    loglog_slope,
    sandwich_envelopes,
)
from .errors import (
    ConfigError,
    FixedPointError,
    InputError,
    SingularInputError,
    UnsupportedDimensionError,
)
from .integrators import SolverConfig, Trajectory, running_average, solve_limit, solve_memory
from .limit_field import (
    SphereQuadSpec,
    dissipation,
    eval_limit_field,
    orthonormal_completion,
    radial_coefficient,
)
from .oscillatory import QuadratureSpec, eval_frozen_field, eval_memory_field, phase
from .profiles import (
    ConstantSet,
    Profile,
    compute_constants,
    coupling_ft_tail_mass,
    coupling_tail_mass,
    nu_exponent,
    radius_for_tail,
)

__version__ = "0.1.0"
