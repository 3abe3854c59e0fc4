"""Wireless-aware E-model planning: Ppl prediction, link simulation and fitting."""

__version__ = "0.1.0"
