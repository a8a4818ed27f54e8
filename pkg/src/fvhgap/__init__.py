"""Exact symbolic engine for the rational-case fractional Volterra hierarchy."""

__version__ = "0.1.0"
