"""Second-order SUSY partner potentials for radial problems.

Builds confluent and real non-confluent partner potentials on the
half-line, verifies the Wronskian representation of the confluent key
function, and reproduces the Coulomb partner families in closed form.
"""

from .coulomb import (
    AdmissibleW0,
    CoulombParams,
    coulomb_partner,
    coulomb_potential,
    coulomb_seed,
    coulomb_spectrum,
    coulomb_w_series,
    partner_closed_l0n1,
    partner_closed_l0n2,
    w0_admissible,
)
from .errors import (
    CancellationWarning,
    ConvergenceError,
    DomainError,
    InadmissibleW0Error,
    NonNormalizableWarning,
    PoleError,
    SingularTransformError,
    SusyqmError,
    UnsupportedFeatureError,
)
from .numerics import (
    Grid,
    SampledFunction,
    Spectrum,
    count_nodes,
    cumulative_integral,
    differentiate,
    make_grid,
    numerov_solve,
    second_derivative,
    shoot_spectrum,
    solve_inhomogeneous,
)
from .specfun import (
    SeriesResult,
    SeriesSettings,
    beta_fn,
    gamma_fn,
    hyp_2f2,
    kummer_1f1,
    kummer_1f1_deriv,
)
from .susy import (
    ConfluentTransform,
    NonConfluentTransform,
    SeedSolution,
    WronskianReport,
    apply_intertwiner,
    bernoulli_residual,
    ansatz_residual,
    confluent_partner,
    confluent_w,
    expanded_route_residual,
    generalized_eigenfunction,
    missing_state,
    nonconfluent_partner,
    riccati_beta,
    riccati_residual,
    schrodinger_residual,
    seed_residual,
    transform_diagnostics,
    verify_wronskian_formula,
    wronskian_of,
    zero_seed,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleW0",
    "CancellationWarning",
    "ConfluentTransform",
    "ConvergenceError",
    "CoulombParams",
    "DomainError",
    "Grid",
    "InadmissibleW0Error",
    "NonConfluentTransform",
    "NonNormalizableWarning",
    "PoleError",
    "SampledFunction",
    "SeedSolution",
    "SeriesResult",
    "SeriesSettings",
    "SingularTransformError",
    "Spectrum",
    "SusyqmError",
    "UnsupportedFeatureError",
    "WronskianReport",
    "apply_intertwiner",
    "ansatz_residual",
    "bernoulli_residual",
    "beta_fn",
    "confluent_partner",
    "confluent_w",
    "coulomb_partner",
    "coulomb_potential",
    "coulomb_seed",
    "coulomb_spectrum",
    "coulomb_w_series",
    "count_nodes",
    "cumulative_integral",
    "differentiate",
    "expanded_route_residual",
    "gamma_fn",
    "generalized_eigenfunction",
    "hyp_2f2",
    "kummer_1f1",
    "kummer_1f1_deriv",
    "make_grid",
    "missing_state",
    "nonconfluent_partner",
    "numerov_solve",
    "partner_closed_l0n1",
    "partner_closed_l0n2",
    "riccati_beta",
    "riccati_residual",
    "schrodinger_residual",
    "second_derivative",
    "seed_residual",
    "shoot_spectrum",
    "solve_inhomogeneous",
    "transform_diagnostics",
    "verify_wronskian_formula",
    "w0_admissible",
    "wronskian_of",
    "zero_seed",
]
