"""
Monodromy and stability charts
==============================

For exponential-sum kernels the memory integral is replaced by auxiliary
states, and the Floquet multipliers come from integrating one period. The
classification is checked against the (p, q) triangle.
"""

import math

import numpy as np

from strutt import ExpSumKernel, zero_kernel
from strutt import monodromy as md

# harmonic oscillator at theta = 1: vertices C and B of the triangle
for a0 in (1.0, 0.25):
    r = md.monodromy(md.embed(zero_kernel(), a0, 0.0, 1.0))
    print(f"a0={a0}: (p, q) = ({r.p:+.6f}, {r.q:.6f}) -> {r.label}")

# damping memory stabilizes
k = ExpSumKernel([(0.5, 1.0)])
r = md.monodromy(md.embed(k, 1.0, 0.0, 1.0))
print("memory kernel, a1=0:", r.label, "spectral radius", round(r.spectral_radius, 6))

# a small chart around the first tongue
ch = md.scan_chart(k, 1.0, (1.5, 2.5), (0.0, 1.0), resolution=(41, 21))
sym = {"Stable": ".", "Unstable": "#", "Boundary": "o"}
for i in range(len(ch.a1) - 1, -1, -4):
    print(f"a1={ch.a1[i]:.2f} " + "".join(sym[c] for c in ch.classes[i]))
for line in ch.polylines:
    pts = line["points"]
    print(line["label"], "lowest point", np.round(pts[np.argmin(pts[:, 1])], 4))

# well-posedness of the memory term
print(md.check_wellposedness(0.0, 0.9, 2.0))
print("Liouville: det M =", np.linalg.det(md.integrate_period(md.embed(k, 1.0, 0.4, 2.0))),
      "expected", math.exp(-1.0 * math.pi))
