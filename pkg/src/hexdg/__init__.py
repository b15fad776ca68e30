"""High-order DG spectral element solver for the compressible Navier-Stokes equations."""

__version__ = "0.1.0"
