"""Finite-scale compositional statistical mechanics: specifications over finite
posets, their Gibbs polytopes, tail events, Bethe free energies and message
passing."""

__version__ = "0.1.0"
