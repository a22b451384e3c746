"""Kernel, checker and analysis tools for cyclic proofs over inductive definitions."""

__version__ = "0.1.0"
