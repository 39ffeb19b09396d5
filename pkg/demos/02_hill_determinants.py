"""
Truncated Hill determinants
===========================

Periodic (harmonics n theta) and antiperiodic (harmonics (2n+1) theta / 2)
truncations of the Hill matrix. Their determinants vanish on the stability
boundaries; the zero-kernel case is the Mathieu equation.
"""

import numpy as np

from strutt import CoefficientSource, ExpSumKernel, HillParams, HillWindow, det_complex, zero_kernel
from strutt.hill import build_hill, multiindex_expansion, split_CS

src = CoefficientSource(zero_kernel(), "closed")
theta, a0 = 2.0, 1.0

# at the tongue tip a0 = theta^2/4 the antiperiodic 2x2 determinant has a double root at a1 = 0
for a1 in np.linspace(-0.5, 0.5, 5):
    D = build_hill(HillParams(a0, a1, theta), HillWindow("antiperiodic", 1), src(theta, 0.0, "antiperiodic", 1))
    print(f"a1={a1:+.2f}  det D~ = {det_complex(D).real:+.6f}")

# with memory, at an imaginary shift gamma = i w the determinant is complex
k = ExpSumKernel([(0.5, 1.0)])
src = CoefficientSource(k, "closed")
h = build_hill(HillParams(1.0, 0.4, 1.5, 0.3j), HillWindow("periodic", 2), src(1.5, 0.3j, "periodic", 2))
d = det_complex(h)
C, S = split_CS(h)
print("det D(theta, 0.3i) =", d)
print("multi-index expansion:", multiindex_expansion(C, S))
h_conj = build_hill(HillParams(1.0, 0.4, 1.5, -0.3j), HillWindow("periodic", 2), src(1.5, -0.3j, "periodic", 2))
print("det D(theta, -0.3i) =", det_complex(h_conj), "(the conjugate)")
