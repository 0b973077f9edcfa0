"""Lyapunov spectrum and pair synchronization on the 2-sphere.

A polar contraction mixed with two generic rotations. Two rotations alone
give a zero spectrum, which serves as a control.
"""

from ifs_sync import FiniteIFS, SphereRotation, SphereScale, lyapunov_spectrum, stream, sync_experiment

r1 = SphereRotation((1.0, 2.0, 3.0), 1.1)
r2 = SphereRotation((-1.0, 0.5, 0.2), 2.3)
system = FiniteIFS((SphereScale(0.8), r1, r2), [0.4, 0.3, 0.3])
control = FiniteIFS((r1, r2), [0.5, 0.5])

est = lyapunov_spectrum(system, 20_000, 1000, 10, stream(11))
ctrl = lyapunov_spectrum(control, 5000, 100, 10, stream(12))
print("spectrum", [round(float(e), 4) for e in est.exponents], "+-", round(float(est.stderr[0]), 4))
print("rotations only", [float(e) for e in ctrl.exponents])

sync = sync_experiment(system, 100, 2000, 1e-6, stream(13))
print(f"synchronized pairs {sync.synced_fraction:.3f}, median first step {sync.median_first_sync}")
