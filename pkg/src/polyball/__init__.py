"""Numerical toolkit for noncommutative polyballs: truncated Fock models,
Berezin kernels, free power series and the free holomorphic automorphism group."""

from .autgroup import Automorphism, BallPoint
from .errors import InputError, NumericalError, PolyballError
from .fock import TruncFock, build_truncated_fock
from .series import FreeSeries
from .tuples import Membership, OpTuple

__all__ = ["Automorphism", "BallPoint", "FreeSeries", "InputError", "Membership",
           "NumericalError", "OpTuple", "PolyballError", "TruncFock", "build_truncated_fock"]
__version__ = "0.1.0"
