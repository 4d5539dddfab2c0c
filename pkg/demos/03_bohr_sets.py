"""
Bohr sets
=========

Bohr sets play the role of subspaces in Z/N.  Build one, find a regular
radius, and pull out a long progression.
"""

import math

from addcomb import GroupSpec, ap_in_bohr, bohr_build, bohr_l1_defect, is_regular, regular_radius, sumset

N = 10007
g = GroupSpec.cyclic(N)
B = bohr_build(g, [1, 77, 2025], 0.9)
print(B)

# size against the volume lower bound (rho / 2 pi)^d N
print("size", B.size, ">= bound", math.ceil((B.radius / (2 * math.pi)) ** B.rank * N))

# scaling is cheap: the norm keys are shared
for delta in (1, 0.5, 0.25):
    print(f"|B_{delta}| =", B.scale(delta).size)

# triangle inclusion B_a + B_b inside B_(a+b)
a, b = B.scale(0.3), B.scale(0.4)
print("B_0.3 + B_0.4 inside B_0.7:", sumset(a.members, b.members).issubset(B.scale(0.7).members))

# a regular rescaling, and how well a narrow sub-Bohr set smooths it
delta = regular_radius(B)
R = B.scale(delta)
print("regular radius factor", delta, "regular:", is_regular(R))
# at eps / 24d the sub-Bohr set is just {0} here; wider ones show the defect growing
for factor in (0.5 / (24 * R.rank), 0.05, 0.2, 0.5):
    narrow = R.scale(factor)
    print(f"B' = B_{factor:.3g}: |B'| = {narrow.size}, L1 defect {float(bohr_l1_defect(R, narrow)):.4f}")

# a progression inside B
P = ap_in_bohr(B)
print("progression:", P)
