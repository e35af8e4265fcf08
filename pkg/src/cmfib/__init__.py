"""Exact CM-line-bundle calculus and a twisted Monge-Ampere solver for fibrations."""

from cmfib.cm_calculus import (
    CHReport,
    FibrationData,
    alpha_degree,
    ch_expand,
    cm_degree,
    compute_s,
    hilbert_poly,
    morita_genus,
    pushforward_degree_poly,
    twist,
)
from cmfib.errors import DomainError
from cmfib.formal_poly import FormalPoly

__version__ = "0.1.0"

__all__ = [
    "CHReport",
    "DomainError",
    "FibrationData",
    "FormalPoly",
    "alpha_degree",
    "ch_expand",
    "cm_degree",
    "compute_s",
    "hilbert_poly",
    "morita_genus",
    "pushforward_degree_poly",
    "twist",
]
