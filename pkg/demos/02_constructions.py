"""
Solution-free sets
==================

Behrend's sphere construction, products of small examples in F_5^n, and the
exact extremal function for x + y + z = 3w on short intervals.
"""

from addcomb import (XYZ3W, GroupSet, GroupSpec, behrend_params, behrend_set, has_nontrivial,
                     product_construction, search_extremal_exact, search_extremal_greedy)

# digit vectors on the fullest sphere, read in a base with no carries
for d, n in [(2, 3), (3, 3), (4, 3)]:
    p = behrend_params(d, n)
    A, emb = behrend_set(d, n)
    print(f"Behrend d={d} n={n}: {A.size} elements of [{p.N}], solution-free: {not has_nontrivial(XYZ3W, A)}")

# products: {0,1} in F_5 is solution-free, and so are its powers
S = GroupSet.from_elements(GroupSpec.cyclic(5), [0, 1])
for k in (2, 4, 6):
    res = product_construction(S, k)
    print(f"{{0,1}}^{k} in F_5^{k}: size {res.set.size}, checked by {res.verification}")

# exact values of the extremal function on [N]
row = [search_extremal_exact(XYZ3W, N).size for N in range(1, 21)]
print("largest solution-free subset of [N], N = 1..20:", row)

# greedy local search gives lower bounds where exact search is too slow
g = GroupSpec.vector_space(5, 3)
r = search_extremal_greedy(XYZ3W, g, seed=1, restarts=4)
print("greedy in F_5^3:", r.size, "elements")
