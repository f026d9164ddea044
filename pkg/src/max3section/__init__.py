"""Max-3-Section toolkit: SDP-solution rounding, configuration-ratio
machinery, and a branch-and-bound certifier for the approximation ratio."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
