"""Contextuality-by-Default analysis of systems of binary measurements."""

__version__ = "0.1.0"

from .coupling import (
    ConnectionCoupling,
    construct_multimaximal,
    is_multimaximal,
    max_pair_equality,
    subset_equality_prob,
)
from .cyclic import CyclicArrangement, CyclicVerdict, cyclic_contextuality, detect_cyclic, odd_sign_max
from .deterministic import ConstraintSystem, assignment_search, parity_check_ks4d
from .lp import SizeLimitError, Verdict, build_lp, decide, verify_certificate, verify_witness
from .model import (
    Connection,
    ContextDistribution,
    ParseError,
    System,
    ValidationError,
    connectedness_report,
    connections,
    expectation,
    marginal,
    parse_system,
    serialize_system,
)

__all__ = [
    "ConnectionCoupling", "construct_multimaximal", "is_multimaximal", "max_pair_equality",
    "subset_equality_prob", "CyclicArrangement", "CyclicVerdict", "cyclic_contextuality",
    "detect_cyclic", "odd_sign_max", "ConstraintSystem", "assignment_search", "parity_check_ks4d",
    "SizeLimitError", "Verdict", "build_lp", "decide", "verify_certificate", "verify_witness",
    "Connection", "ContextDistribution", "ParseError", "System", "ValidationError",
    "connectedness_report", "connections", "expectation", "marginal", "parse_system",
    "serialize_system",
]
