"""Walk through the lazily evaluated IFFT and its cost accounting.

Run: python3 demos/lazy_ifft.py
"""
import numpy as np

from agslm.ifft import ButterflyGraph, full_ifft, k_of_a, stage_split_ifft

rng = np.random.default_rng(0)

# An 8-point graph emits outputs in the order 0, 4, 2, 6, 1, 5, 3, 7.
# The first output needs one node per butterfly on its path; later outputs
# reuse what is already known.
X = rng.normal(size=8) + 1j * rng.normal(size=8)
g = ButterflyGraph(X)
print("output  new c-points  running total  closed form")
total = 0
for a, (m, value, added) in enumerate(g, start=1):
    total += added
    print(f"{m:>6}  {added:>12}  {total:>13}  {k_of_a(a, 8):>11}")

# Values are those of an ordinary inverse DFT (no 1/N factor).
np.testing.assert_allclose(g.outputs(), np.fft.ifft(X) * 8)

# The cost curve is close to a straight line: half the outputs cost half a transform.
N = 128
print("\nK(a)/T at N=128:", [round(k_of_a(a, N) / (N * 7), 3) for a in (1, 16, 32, 64, 96, 128)])

# Splitting after the first n - r stages lets many candidates share that work.
X = rng.normal(size=1024) + 1j * rng.normal(size=1024)
common, resume = stage_split_ifft(X, r=5)
print(f"\nshared stages cost {common.c_points / (1024 * 10):.2f}T; each resumed candidate costs 0.50T")
g = resume()
g.complete()
np.testing.assert_array_equal(g.outputs(), full_ifft(X).samples)
