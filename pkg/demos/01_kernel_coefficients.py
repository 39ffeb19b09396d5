"""
Kernel coefficients
===================

A memory kernel enters the Hill matrices through its Fourier coefficients
K_nm(theta, gamma). For a sum of exponentials they are diagonal and known in
closed form; for anything else they come from a Laguerre x Simpson double sum.
"""

import math

import numpy as np

from strutt import ExpSumKernel, MemoryKernel, QuadratureSpec, fourier_block
from strutt.kernels import Envelope

# one exponential term, K(t, s) = exp(-(t - s))
k = ExpSumKernel([(1.0, 1.0)])
closed = fourier_block(k, 2, 1.0, 0.0, backend="closed")
quad = fourier_block(k, 2, 1.0, 0.0, QuadratureSpec(32, 64))
print("closed diagonal:", np.round(np.diag(closed.values), 6))
print("quad - closed (max):", np.abs(quad.values - closed.values).max())

# the quadrature error grows with the harmonic index and with a damping shift
for gamma in (0.0, 0.3j, -0.5):
    q = fourier_block(k, 3, 1.0, gamma, QuadratureSpec(32, 64))
    c = fourier_block(k, 3, 1.0, gamma, backend="closed")
    print(f"gamma={gamma!s:>6}: max relative error {np.abs(q.values - c.values).max() / np.abs(c.values).max():.2e}")


# a kernel that is modulated in t couples neighbouring harmonics
def modulated(t, xi, T):
    return np.exp(-1.2 * xi) * (1 + 0.6 * np.cos(2 * math.pi * t / T))


km = MemoryKernel(modulated, 2 * math.pi, Envelope(1.6, 1.2), name="modulated")
blk = fourier_block(km, 1, 1.0, 0.0)
print("modulated kernel, |K_nm| over n, m = -1..1:")
print(np.round(np.abs(blk.values), 4))
