"""Recovery of low-rank symmetric Toeplitz matrices from rank-one subgaussian
measurements, with a Monte-Carlo harness verifying the quantitative
ingredients of the underlying analysis."""

__version__ = "0.1.0"

from .sensing import (
    MeasurementSet,
    SubgaussianLaw,
    apply_operator,
    builtin_law,
    discrete_law,
    draw_noise,
    effective_matrix,
    effective_row,
    moment_audit,
    sample_vectors,
    sense,
)
from .solver import (
    RecoveryReport,
    SolverConfig,
    certify,
    project_lp_ball,
    recover,
    recover_measurements,
    svt,
)
from .toeplitz import (
    CirculantSpectrum,
    SpikeModel,
    ToeplitzVector,
    circulant_embed,
    frobenius_weights,
    nuclear_norm,
    numerical_rank,
    opnorm_exact,
    opnorm_upper,
    project_toeplitz,
    spike_toeplitz,
    sym_eig,
    toeplitz_to_dense,
    weighted_norm,
)

__all__ = [
    "CirculantSpectrum",
    "MeasurementSet",
    "RecoveryReport",
    "SolverConfig",
    "SpikeModel",
    "SubgaussianLaw",
    "ToeplitzVector",
    "apply_operator",
    "builtin_law",
    "certify",
    "circulant_embed",
    "discrete_law",
    "draw_noise",
    "effective_matrix",
    "effective_row",
    "frobenius_weights",
    "moment_audit",
    "nuclear_norm",
    "numerical_rank",
    "opnorm_exact",
    "opnorm_upper",
    "project_lp_ball",
    "project_toeplitz",
    "recover",
    "recover_measurements",
    "sample_vectors",
    "sense",
    "spike_toeplitz",
    "svt",
    "sym_eig",
    "toeplitz_to_dense",
    "weighted_norm",
]
