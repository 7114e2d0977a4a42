"""SOS interface above an attractive wall: exact oracles, cylinder calculus,
cluster expansions, Monte Carlo sampling, and wetting/layering phase diagrams."""

from .params import ModelParams

__all__ = ["ModelParams"]
__version__ = "0.1.0"
