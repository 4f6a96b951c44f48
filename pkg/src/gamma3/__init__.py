"""Numerical toolkit for the closed symmetrized tridisc and its operator theory."""

__version__ = "0.1.0"
