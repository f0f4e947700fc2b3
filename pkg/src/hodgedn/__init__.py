"""Discrete exterior calculus tools for boundary-data recovery of cohomology."""

__version__ = "0.1.0"
