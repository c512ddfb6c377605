"""Spectral cluster-synchronization analysis for dynamical networks on
weighted hypergraphs: diffusion operator assembly, unit/twin detection, the
quotient contraction, simulation, and stability certification."""

__version__ = "0.1.0"

from .dynamics import HAVE_COMPILED

__all__ = ["__version__", "HAVE_COMPILED"]
