"""Classical mechanics as operator dynamics on a phase-space Hilbert space."""

__version__ = "0.1.0"
