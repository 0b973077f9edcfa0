import math

import numpy as np
import pytest

from ifs_sync.cocycle import FiniteIFS
from ifs_sync.diffeos import EquivariantNS, FlatNS, NorthSouthCircle, Rotation, SphereRotation, SphereScale

GOLDEN = (math.sqrt(5) - 1) / 2
ALPHA, BETA = 0.6180339887, 0.4142135624


def flat_system():
    """FlatNS plus a golden rotation: the minimal, synchronizing reference system."""
    return FiniteIFS((FlatNS(-0.12, 0.05, 0.01), Rotation(GOLDEN)), [0.5, 0.5])


def equivariant_system():
    return FiniteIFS((EquivariantNS(-0.06), Rotation(GOLDEN)), [0.5, 0.5])


def two_rotations():
    return FiniteIFS((Rotation(ALPHA), Rotation(BETA)), [0.5, 0.5])


def fixed_point_pair():
    """Two maps fixing 0 with derivatives 0.5 and 0.8 there."""
    return FiniteIFS(
        (NorthSouthCircle(-0.5 / (2 * math.pi)), NorthSouthCircle(-0.2 / (2 * math.pi))), [0.5, 0.5]
    )


def sphere_system():
    return FiniteIFS(
        (SphereScale(0.8), SphereRotation((1.0, 2.0, 3.0), 1.1), SphereRotation((-1.0, 0.5, 0.2), 2.3)),
        [0.4, 0.3, 0.3],
    )


def sphere_rotations():
    return FiniteIFS((SphereRotation((1.0, 2.0, 3.0), 1.1), SphereRotation((-1.0, 0.5, 0.2), 2.3)), [0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


def catalog():
    """One representative per map family, circle and sphere."""
    ns = NorthSouthCircle(-0.1)
    from ifs_sync.diffeos import Composition, InverseCircle, Translated

    return {
        "rotation": Rotation(0.3),
        "north_south": ns,
        "flat_ns": FlatNS(-0.12, 0.05, 0.01),
        "equivariant_ns": EquivariantNS(-0.06),
        "inverse_circle": InverseCircle(ns),
        "composition": Composition((ns, Rotation(0.2), FlatNS(-0.1, 0.04, 0.2))),
        "translated": Translated(FlatNS(-0.12, 0.05, 0.01), 0.07),
        "sphere_rotation": SphereRotation((1.0, 2.0, 3.0), 1.1),
        "sphere_scale": SphereScale(0.8),
        "sphere_scale_swapped": SphereScale(0.6, swapped=True),
        "sphere_composition": Composition((SphereScale(0.7), SphereRotation((0.0, 1.0, 0.0), 0.4))),
        "sphere_translated": Translated(SphereScale(0.8), (0.1, -0.2, 0.05)),
    }
