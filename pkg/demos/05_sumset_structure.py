"""
Structure in three-fold sumsets
===============================

A + B + C is far more structured than A, B or C: it holds long progressions
in Z/N and large affine subspaces in F_q^n.
"""

import numpy as np

from addcomb import (GroupSet, GroupSpec, largest_affine_subspace, longest_ap, three_fold_sumset,
                     xv_witness)

rng = np.random.default_rng(0)

# Z/N: a sparse random set against its three-fold sumset
g = GroupSpec.cyclic(1009)
A = GroupSet(g, rng.random(1009) < 0.01)
print("A:", A.size, "elements, longest AP", longest_ap(A).size)
H = three_fold_sumset(A, A, A)
w = longest_ap(H)
print("A+A+A:", H.size, "elements, longest AP", w.size, w.ap)

# F_3^6: affine subspaces
f = GroupSpec.vector_space(3, 6)
A = GroupSet(f, rng.random(f.order) < 0.02)
print("A in F_3^6:", A.size, "elements, largest affine subspace dim", largest_affine_subspace(A).size)
H = three_fold_sumset(A, A, A)
w = largest_affine_subspace(H)
print("A+A+A:", H.size, "elements, dim", w.size, "(search complete:", str(w.complete) + ")")

# X + V: almost all of a translate of B sees a whole coset of V inside the sumset
f = GroupSpec.vector_space(5, 3)
A, B, C = (GroupSet(f, rng.random(125) < 0.1) for _ in range(3))
V = GroupSet(f, f.coords_array[:, 2] == 0)
w = xv_witness(A, B, C, V, 0.03)
print("|X| =", w.X.size, "of |B| =", B.size, "| certified X+V inside A+B+C:", w.info["certified"])
