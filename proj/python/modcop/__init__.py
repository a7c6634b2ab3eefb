"""Copulas with density f(sum u_j mod 1)."""

from ._modcop import (
    BoundaryError,
    BudgetError,
    ConvergenceError,
    CopulaModel,
    DegenerateInputError,
    DomainError,
    Error,
    Generator,
    NumericalError,
    ParseError,
    UndefinedCorrelationError,
    UnsupportedDimensionError,
    __version__,
    check_names,
    kendall_tau_sample,
    ks_uniformity,
    parse_generator,
    singular_pair,
    spearman_rho_closed_form,
    spearman_rho_sample,
    tail_diagnostic,
    unboundedness_probe,
    verify,
)

__all__ = [
    "BoundaryError",
    "BudgetError",
    "ConvergenceError",
    "CopulaModel",
    "DegenerateInputError",
    "DomainError",
    "Error",
    "Generator",
    "NumericalError",
    "ParseError",
    "UndefinedCorrelationError",
    "UnsupportedDimensionError",
    "__version__",
    "check_names",
    "kendall_tau_sample",
    "ks_uniformity",
    "parse_generator",
    "singular_pair",
    "spearman_rho_closed_form",
    "spearman_rho_sample",
    "tail_diagnostic",
    "unboundedness_probe",
    "verify",
]
