"""Exact arithmetic for characters of tame p-adic fields.

Cyclotomic values, truncated tame towers, multiplicative/additive characters,
Gauss sums and epsilon factors, plus desk-scale verification of twisted
product equalities for twin character pairs.
"""

__version__ = "0.1.0"

from .cyclotomic import CycNumber, ScaledCyc
from .localfield import TowerField, TowerElement, Unramified, TameRamified, make_tower

__all__ = [
    "CycNumber",
    "ScaledCyc",
    "TowerField",
    "TowerElement",
    "Unramified",
    "TameRamified",
    "make_tower",
    "__version__",
]
