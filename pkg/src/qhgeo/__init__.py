"""qhgeo: numerical laboratory for quasihyperbolic geometry on Euclidean domains."""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND
