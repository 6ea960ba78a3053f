"""Robustness certification for ReLU networks."""

from ._core import (
    BudgetExceeded,
    Error,
    Network,
    UncertaintySet,
    bounds,
    certify,
    octahedral_coefficients,
)

METHODS = ("ibp", "fastlin", "crown", "lp", "lp-recursive", "krelu", "exact")

__all__ = [
    "BudgetExceeded",
    "Error",
    "METHODS",
    "Network",
    "UncertaintySet",
    "bounds",
    "certify",
    "octahedral_coefficients",
]
__version__ = "0.1.0"
