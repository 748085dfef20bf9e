"""Divergences on density operators and their unitarily residual measures.

States connected by a unitary are treated as one point: a divergence minimized
over unitary conjugations collapses to a classical divergence between sorted
eigenvalue distributions. This package provides the sorted-spectrum algebra,
the quantum divergences and their closed-form residuals, stochastic/Kraus maps
for the inheritance properties, a non-Hermitian integrator with dissipative
speed-limit checks, and a CLI for all of it.
"""

from .channels import (
    KrausSet,
    StochasticMatrix,
    apply_cptp,
    apply_stochastic,
    kraus_from_stochastic,
    random_density,
    random_haar_unitary,
    random_hermitian,
    random_stochastic,
)
from .divergences import (
    BURES_ANGLE,
    RELATIVE_ENTROPY,
    TRACE_DISTANCE,
    DivergenceKind,
    bures_angle,
    divergence,
    fidelity,
    petz_renyi,
    petz_renyi_kind,
    relative_entropy,
    trace_distance,
)
from .dynamics import (
    BoundReport,
    IntegrationAbort,
    NonHermitianGenerator,
    Trajectory,
    check_bound_residual,
    check_bound_state,
    check_fisher_rate,
    check_purity_bound,
    eigenvalue_flow,
    fisher_information,
    integrate,
    interaction_unitary,
)
from .residual import (
    MinimizeResult,
    check_assumption,
    commuting_representatives,
    minimize_over_unitaries,
    residual_bures,
    residual_kl,
    residual_measure,
    residual_renyi,
    residual_trace,
)
from .spectral import (
    DensityOperator,
    EigenDecomposition,
    HermitianOperator,
    SortedSpectrum,
    UnitaryOperator,
    aligning_unitary,
    class_add,
    class_scale,
    eigendecompose,
    singular_values,
    sorted_spectrum,
    trace_norm,
)
from .suites import SUITE_NAMES, SuiteReport, run_suite

__version__ = "0.1.0"
