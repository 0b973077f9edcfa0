"""A half-turn equivariant north-south map with a rotation.

Every map commutes with x -> x + 1/2, so the random pull-back measure splits
into two atoms of equal weight half a turn apart.
"""

import math

from ifs_sync import CIRCLE, EmpiricalMeasure, EquivariantNS, FiniteIFS, Rotation, pullback_atoms, stationary_mc, stream

GOLDEN = (math.sqrt(5) - 1) / 2
system = FiniteIFS((EquivariantNS(-0.06), Rotation(GOLDEN)), [0.5, 0.5])

m = stationary_mc(system, 1000, 200_000, stream(7))
pb = pullback_atoms(system, EmpiricalMeasure(CIRCLE, m.points[::100]), 500, None, stream(8))
for center, weight in zip(pb.centers, pb.weights):
    print(f"atom at {float(center):.6f} with weight {weight:.3f}")
print(f"separation {pb.min_separation:.6f}")
