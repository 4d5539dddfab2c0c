"""
Convolution, spectra and solution counts
=========================================

Count solutions of x + y + z = 3w inside a set, first by brute force and
then through the Fourier side, and look at which characters carry the set.
"""

import numpy as np

from addcomb import (XYZ3W, DenseFunction, GroupSet, brute_force_count, convolve, count_solutions,
                     count_trivial, embed_interval, fourier_coefficients, spec_delta)

# [N] sits inside Z/p for a prime p >= 6N, so sums of four terms never wrap
emb = embed_interval(40)
print("modulus:", emb.modulus)

A = emb.image([1, 2, 4, 8, 13, 21, 31, 35])
print("A has", A.size, "elements")

# convolution of indicators counts representations
f = DenseFunction.indicator(A)
r = convolve(f, f)
print("r_{A+A}(x) peaks at", int(np.max(r.values)), "representations")

# the count via convolutions agrees with enumerating all |A|^4 tuples
total = count_solutions(XYZ3W, A)
print("solutions:", total, "trivial:", count_trivial(XYZ3W, A), "brute force:", brute_force_count(XYZ3W, A))

# large spectrum: characters where |1_A^(gamma)| >= delta |A|
mags = np.abs(fourier_coefficients(A)) / A.size
big = spec_delta(A, 0.5)
print("Spec_{1/2}(A) has", len(big), "characters; top magnitudes", np.round(np.sort(mags)[::-1][:5], 3))

# an arithmetic progression is concentrated on few characters
P = GroupSet.from_elements(emb.group, range(0, 240, 6))
print("AP with step 6:", len(spec_delta(P, 0.5)), "characters above 1/2")
