"""Harmonic maps into SL(n)/SO(n) through a homogeneous Darboux derivative."""

__version__ = "0.1.0"
