"""The generalized Baker map as the driving system, and an Ulam estimate of
the stationary density of the flattening example.
"""

import math

import numpy as np

from ifs_sync import FiniteIFS, FlatNS, Rotation, baker_forward, make_partition, stationary_power, stream, ulam_matrix
from ifs_sync.driving import sample_word, semiconjugacy_residual
from ifs_sync.measures import support_coverage

p = [0.7, 0.3]
g = stream(21)
worst = max(semiconjugacy_residual(sample_word(p, 40, g), p) for _ in range(200))
print(f"itinerary semiconjugacy residual over 200 words: {worst:.1e}")

y, z = g.random(100_000), g.random(100_000)
for _ in range(10):
    y, z = baker_forward((y, z), p)
counts = np.histogram2d(y, z, bins=8, range=[[0, 1], [0, 1]])[0]
print(f"Baker image of uniform points, 8x8 cell counts range {counts.min():.0f}..{counts.max():.0f}")

system = FiniteIFS((FlatNS(-0.12, 0.05, 0.01), Rotation((math.sqrt(5) - 1) / 2)), [0.5, 0.5])
part = make_partition("circle", 128)
M = ulam_matrix(system, part, 100, stream(22))
h = stationary_power(M, tol=1e-12, partition=part)
print(f"Ulam density: max cell mass x 128 = {h.mass.max() * 128:.2f}, cells above 1% of uniform {support_coverage(h, 0.01):.3f}")
