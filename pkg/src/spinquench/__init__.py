"""Measurement-quench simulations on spin chains."""

__version__ = "0.1.0"
