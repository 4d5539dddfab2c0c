"""
Density increments
==================

A solution-free set is denser on some translate of a smaller structure.
Iterating that step can only happen a bounded number of times.
"""

from fractions import Fraction

from addcomb import (XYZ3W, BohrParams, BohrSet, GroupSet, GroupSpec, increment_step_bohr, iterate, product_construction,
                     search_extremal_greedy, step_bound)

# finite field: structures are subspaces, found from the large spectrum
S = GroupSet.from_elements(GroupSpec.cyclic(5), [0, 1])
A = product_construction(S, 4).set
print("A = {0,1}^4 in F_5^4, density", A.density)

trace = iterate(A, "ff", Fraction(3, 2))
for j, st in enumerate(trace.steps, 1):
    print(f"  step {j}: codim {st.codim}, density {st.alpha} -> {st.alpha_new}, recount ok: {st.verify()}")
print("  stopped:", trace.termination.value, "| bound on steps:", step_bound(trace.initial_density, trace.target))

# Z/N: structures are Bohr sets
g = GroupSpec.cyclic(401)
half = GroupSet.from_elements(g, range(201))
# the regularity constant C sets how narrow the sub-Bohr sets are; the default of 100
# is far too large for N = 401 and leaves only tiny structures
for C in (100, 4):
    st = increment_step_bohr(half, BohrSet(g, (1,), 2.0), BohrParams(C=C))
    print(f"C={C}: interval of density 1/2 in Z/401 -> {st.alpha_new} on a Bohr set of size {st.structure_size}")

free = GroupSet.from_elements(g, search_extremal_greedy(XYZ3W, g, seed=2, restarts=1).witness)
trace = iterate(free, "bohr")
print("greedy set in Z/401, densities:", [str(x) for x in trace.densities], trace.termination.value)
