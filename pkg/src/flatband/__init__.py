"""Flat-band bosons on the line graph of the cubic torus: lattice objects,
4-cycle decompositions, Wick-permanent overlaps and bound checks."""

from .lattice import CubicTorus, Face, FaceState, LatticeError, TorusSpec, build_torus

__version__ = "0.1.0"

__all__ = ["CubicTorus", "Face", "FaceState", "LatticeError", "TorusSpec", "build_torus", "__version__"]
