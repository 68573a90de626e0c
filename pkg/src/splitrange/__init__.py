"""Douglas-Rachford splitting toolkit with sampled range certification."""

from .operators import (OperatorDescriptor, inverse, make_operator, reflected_resolvent,
                        resolvent, shift_inner, shift_outer, vee)
from .splitting import OperatorPair, attouch_thera_dual, dr_iterate, dr_map

__version__ = "0.1.0"

__all__ = [
    "OperatorDescriptor", "OperatorPair", "attouch_thera_dual", "dr_iterate", "dr_map",
    "inverse", "make_operator", "reflected_resolvent", "resolvent", "shift_inner",
    "shift_outer", "vee",
]
