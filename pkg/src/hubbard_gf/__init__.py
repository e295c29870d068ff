"""Simulator-backed toolkit for measuring Fermi-Hubbard Green's functions on circuits."""

__version__ = "0.1.0"
