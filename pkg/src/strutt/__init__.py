"""Stability boundaries for periodic integro-differential equations with memory.

The equation is x'' + (a0 + a1 cos(theta t)) x = int_{-inf}^t K(t, s) x(s) ds
with a simultaneously periodic kernel K. Boundaries come from truncated Hill
determinants (:mod:`strutt.hill`, :mod:`strutt.boundaries`); exponential-sum
kernels also get an exact time-domain check (:mod:`strutt.monodromy`).
"""

from .errors import (
    ComplexityGuardError,
    DegenerateShiftError,
    DivergenceError,
    DomainError,
    KernelFormatError,
    StruttError,
    UnsupportedKernelError,
)
from .kernels import (
    ANTIPERIODIC,
    PERIODIC,
    Envelope,
    ExpSumKernel,
    MemoryKernel,
    TableKernel,
    knm_exp_closed,
    load_kernel,
    moments,
    zero_kernel,
)
from .quadrature import CoefficientSource, FourierBlock, QuadratureSpec, fourier_block, knm_quad
from .hill import HillParams, HillWindow, build_D, build_Dtilde, det_complex, multiindex_expansion

__version__ = "0.1.0"
