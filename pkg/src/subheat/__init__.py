"""subheat: subordinated fractional heat dynamics at desk scale.

Compute time-changed solutions of the fractional heat equation, verify
their long-time Cesaro-mean decay against the kernel-class predictions,
and cross-check the deterministic pipeline with an exact-sampling
subordinator Monte Carlo engine.
"""

__version__ = "0.1.0"

from .kernels import KernelSpec  # noqa: F401
from .series import AsymptoticFit, TimeSeries  # noqa: F401
