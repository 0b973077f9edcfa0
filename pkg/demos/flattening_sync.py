"""Derivative flattening on the circle: one north-south map with a flattened
repeller plus an irrational rotation.

The pair is minimal, has a negative top exponent and synchronizes random
orbit pairs. Runs in a few seconds.
"""

import math

from ifs_sync import (
    CIRCLE,
    EmpiricalMeasure,
    FiniteIFS,
    FlatNS,
    Rotation,
    lyapunov_top,
    lyapunov_upper_bound,
    pullback_atoms,
    reachability_cover,
    stationary_mc,
    stream,
    sync_experiment,
)

GOLDEN = (math.sqrt(5) - 1) / 2
system = FiniteIFS((FlatNS(-0.12, 0.05, 0.01), Rotation(GOLDEN)), [0.5, 0.5])

cover = reachability_cover(system, 0.0, 1 / 512, 5000)
print(f"orbit of 0 covers {cover.covered_fraction:.3f} of 512 cells after {cover.steps_to_full} rounds")

est = lyapunov_top(system, 200_000, 1000, 10, stream(1))
m = stationary_mc(system, 1000, 200_000, stream(2))
print(f"top exponent {est.top:.4f} +- {est.stderr[0]:.4f}")
print(f"sum_i p_i E_m log|f_i'| = {lyapunov_upper_bound(system, m):.4f}")

sync = sync_experiment(system, 200, 2000, 1e-6, stream(3))
print(f"synchronized pairs {sync.synced_fraction:.3f}, median first step {sync.median_first_sync}")

ens = EmpiricalMeasure(CIRCLE, m.points[:2000:10])
pb = pullback_atoms(system, ens, 500, 1e-4, stream(4))
print(f"pull-back ensemble: {pb.atoms} atom(s), diameter {pb.max_diameter:.1e}")
