"""Spectral solvers for plasmonic core-shell transmission problems."""
__version__ = "0.1.0"
