"""Toeplitz determinants of rotationally symmetric arc indicators.

Exact log-determinants (fast Levinson recursion with precision
escalation, plus a dense high-precision oracle), the block factorization
into single-arc determinants, full large-N asymptotic expansions with
exact rational coefficient skeletons, a residual-scan and free-energy
fitting harness, and Monte Carlo cross-validation against the circular
unitary ensemble.
"""

from .constants import RESOLVED_CONSTANT_SIGN, zeta_prime_minus_one
from .cuemc import (
    McRecord,
    MomentCheck,
    ProbabilityEstimate,
    SpectrumSample,
    arc_event,
    estimate_power_gap_probability,
    moment_check,
    power_norms,
    sample_spectrum,
)
from .factorize import EuclideanSplit, euclidean_split, log_det_factorized, residue_permutation
from .harness import (
    FitResult,
    IllConditionedFitError,
    InconclusiveSignError,
    ResidualRecord,
    emit_results,
    fit_free_energy,
    residual_scan,
    resolve_constant_sign,
    write_plot_data,
)
from .logdet import (
    LogDetResult,
    PrecisionFailureError,
    log_det,
    log_det_dense_oracle,
    suggested_oracle_bits,
)
from .series import (
    AsymptoticSeries,
    FreeEnergyTable,
    free_energy,
    multi_arc_expansion,
    multi_arc_series,
    n_form_expansion,
    one_interval_expansion,
    one_interval_series,
    reexpanded_multi_arc_series,
    scan_bracket_series,
)
from .symbol import ArcConfiguration, SymbolCoefficients, ToeplitzMatrix, build_matrix, fourier_coefficient

__version__ = "1.0.0"
