"""Weingarten calculus and product random unitary channels: exact oracles, limits, simulation."""

__version__ = "0.1.0"
