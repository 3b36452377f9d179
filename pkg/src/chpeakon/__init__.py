"""Peakon dynamics and Cauchy-problem numerics for a six-parameter family of nonlocal shallow-water equations."""

from .model import LambdaParams, b_family, preset
from .state import GridField, PeakonState

__all__ = ["GridField", "LambdaParams", "PeakonState", "b_family", "preset"]
__version__ = "0.1.0"
