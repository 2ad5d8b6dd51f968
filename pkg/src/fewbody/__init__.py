"""Interpolatory two-state ansatz for few-fermion systems in a 1D harmonic trap."""

__version__ = "0.1.0"
