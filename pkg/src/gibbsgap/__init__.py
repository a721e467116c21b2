"""Exact spectral analysis of Gibbs-sampler scan strategies on finite
product state spaces, with bound verification, simulation diagnostics, and
the ladder counterexample chain."""

__version__ = "0.1.0"
