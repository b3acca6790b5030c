"""Decoherence control of a quantum harmonic oscillator in Ohmic-family reservoirs."""

__version__ = "0.1.0"
