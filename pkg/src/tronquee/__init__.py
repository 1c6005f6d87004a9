"""Tronquee solutions of the canonical third and fourth Painleve equations."""

from .exact import Cyclo, parse_exact, to_exact
from .model import (
    EquationSpec,
    Family,
    Polar,
    Sector,
    SectorKind,
    branch,
    contains,
    make_equation,
    omega_cover,
    sector,
)
from .series import compute_coefficients, evaluate, optimal_truncation_index, residual_order
from .dynamics import hamiltonian, jacobian_limit, rhs, scalar_residual, wasow_check

__version__ = "0.1.0"
