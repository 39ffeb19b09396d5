"""
Boundary branches
=================

Boundaries of the stability region come in families: the quasi-static value
of a0, the vertices B and C (antiperiodic and periodic solutions at gamma = 0),
vertex A and the sides (pairs of determinants sharing a root in a1).
For one exponential term the 2x2 and 3x3 truncations have closed forms.
"""

import math

import numpy as np

from strutt import CoefficientSource, ExpSumKernel
from strutt import boundaries as bd

k = ExpSumKernel([(1.0, 1.0)])
src = CoefficientSource(k, "closed")

# quasi-static value: a0* = Re K_00 at gamma = i w'
print("quasi-static a0* at w'=0:", bd.quasi_static_a0(src, 1.0, 0.0))

# vertex B on the 2x2 truncation; at a0 = 1, theta = 2 the closed form gives a1^2 = 2
b = bd.vertexB_branch(src, 1.0, [2.0])
print("vertex B at theta=2:", b.a1, "closed form a1^2:", bd.exp_antiperiodic_closed(1, 1, 1, 2)[0])

# the fourth-order truncation refines this root
b4 = bd.vertexB_branch(src, 1.0, [2.0], halfwidth=2)
print("4th order roots:", np.round(b4.a1, 6))

# vertex C on the 3x3 truncation, with its pole in theta^2
for th in (0.8, 1.2, 1.6):
    print(f"theta={th}: 3x3 roots {np.round(bd.vertexC_3x3(src, th, 3.0).roots, 6)}, "
          f"closed a1^2 = {bd.exp_periodic_closed(1, 1, 3.0, th).a1_sq:.6f}")
print("pole at theta^2 =", bd.exp_periodic_asymptotes(1, 1, 3), "= 1 + sqrt 3 =", 1 + math.sqrt(3))

# a branch is a table of points with residuals
br = bd.vertexB_branch(src, 1.0, np.linspace(1.0, 3.0, 5))
for row in br.rows():
    print(row)
