"""Lattice-path compiler for positive linear catalytic equations."""

__version__ = "0.1.0"
