"""Desk-scale laboratory for plasticity in pixel-based actor-critic training."""

__all__ = ["__version__"]
__version__ = "0.1.0"
