"""Generalized teleportation: telecloning, asymmetric telecloning and tele-error-correction."""

from .tensor import TOL, DensityMatrix, Operator, ParticleShape, PureState, ShapeError
from .protocol import OutputBasis, LruoPair, VerificationError, build_channel, run_distribution

__all__ = [
    "TOL",
    "DensityMatrix",
    "Operator",
    "ParticleShape",
    "PureState",
    "ShapeError",
    "OutputBasis",
    "LruoPair",
    "VerificationError",
    "build_channel",
    "run_distribution",
]
__version__ = "0.1.0"
