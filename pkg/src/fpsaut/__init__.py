"""Exact truncated automorphisms of power series rings and commutator certificates."""

from .errors import FpsError
from .ring import DualNumbers, PrimeField, RationalField, SeriesRing, parse_ring
from .series import Series, SeriesContext
from .autgroup import (Automorphism, CommutatorCertificate, Endomorphism, commutator, compose,
                       conjugate, elementary, identity, invert, permutation_auto, random_gi,
                       verify_certificate)
from .decompose import decompose
from .parsing import parse_automorphism, parse_series

__all__ = [
    "FpsError", "DualNumbers", "PrimeField", "RationalField", "SeriesRing", "parse_ring",
    "Series", "SeriesContext", "Automorphism", "CommutatorCertificate", "Endomorphism",
    "commutator", "compose", "conjugate", "elementary", "identity", "invert",
    "permutation_auto", "random_gi", "verify_certificate", "decompose",
    "parse_automorphism", "parse_series",
]
