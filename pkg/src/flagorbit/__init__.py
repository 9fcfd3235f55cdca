"""Density of the diagonal PGL(n) action on products of partial flag varieties."""

from .classifier import Answer, Verdict, classify
from .flags import FlagShape, ProductSpec, dim_product, expected_stab_dim, is_trivially_sparse
from .notation import ParseError, parse_product
from .oracle import OracleReport, OracleVerdict, oracle_density, special_witness
from .reduction import EquivalenceChain, normalize

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "EquivalenceChain",
    "FlagShape",
    "OracleReport",
    "OracleVerdict",
    "ParseError",
    "ProductSpec",
    "Verdict",
    "classify",
    "dim_product",
    "expected_stab_dim",
    "is_trivially_sparse",
    "normalize",
    "oracle_density",
    "parse_product",
    "special_witness",
]
