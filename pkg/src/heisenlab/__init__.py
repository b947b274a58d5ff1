"""Twisted group algebras of time-frequency shifts and Gaussian Gabor systems."""

from .algebra import AlgebraElement, DiscreteSubgroup, GroupElement, Phase, reduce_to_unit
from .exact import QSqrt2

__all__ = ["AlgebraElement", "DiscreteSubgroup", "GroupElement", "Phase", "QSqrt2", "reduce_to_unit"]
__version__ = "0.1.0"
