"""Euclidean random assignment on unit-area surfaces: masses, solvers, Monte Carlo."""

__version__ = "0.1.0"
