"""Non-ellipsoidal inclusions with polynomial-conserving strain fields in
anisotropic media: obstacle-problem construction, anisotropy stretches,
and independent verification against closed-form ellipsoid potentials and
transversely isotropic Green functions.
"""

from .kernels import backend_name

__all__ = ["backend_name"]
__version__ = "0.1.0"
