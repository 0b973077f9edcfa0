"""Points, tangent frames and distances on the circle and the 2-sphere.

Circle points are angles measured in revolutions, stored as floats in
``[0, 1)``. Sphere points are unit vectors in R^3. Batches are plain numpy
arrays: shape ``(n,)`` on the circle, ``(n, 3)`` on the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CIRCLE = "circle"
SPHERE = "sphere"
MANIFOLDS = (CIRCLE, SPHERE)

_POLE_GUARD = 1.0 - 1e-8
_E1 = np.array([1.0, 0.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])


class ManifoldMismatch(ValueError):
    """A point, frame or map lives on a different manifold than expected."""


def dim(manifold: str) -> int:
    if manifold == CIRCLE:
        return 1
    if manifold == SPHERE:
        return 2
    raise ValueError(f"unknown manifold {manifold!r}")


def ambient_dim(manifold: str) -> int:
    return 1 if manifold == CIRCLE else 3


def wrap(x):
    """Reduce angles mod 1 into ``[0, 1)``."""
    y = np.mod(x, 1.0)
    # np.mod can return exactly 1.0 for tiny negative inputs
    if np.ndim(y) == 0:
        return 0.0 if y >= 1.0 else float(y)
    y[y >= 1.0] = 0.0
    return y


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def circle_point(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 0:
        raise ManifoldMismatch(f"circle point must be a scalar, got shape {x.shape}")
    return wrap(float(x))


def sphere_point(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ManifoldMismatch(f"sphere point must have shape (3,), got {v.shape}")
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValueError("sphere point must be nonzero")
    return v / n


def manifold_of(x) -> str:
    """Manifold of a single point: scalar -> circle, 3-vector -> sphere."""
    shape = np.shape(x)
    if shape == ():
        return CIRCLE
    if shape == (3,):
        return SPHERE
    raise ManifoldMismatch(f"not a single point: shape {shape}")


def check_batch(manifold: str, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if manifold == CIRCLE and xs.ndim != 1:
        raise ManifoldMismatch(f"circle batch must be 1-d, got shape {xs.shape}")
    if manifold == SPHERE and (xs.ndim != 2 or xs.shape[1] != 3):
        raise ManifoldMismatch(f"sphere batch must have shape (n, 3), got {xs.shape}")
    return xs


def signed_diff(x, y):
    """Shortest signed arc from ``y`` to ``x`` on the circle, in ``[-1/2, 1/2)``."""
    return np.mod(np.asarray(x) - np.asarray(y) + 0.5, 1.0) - 0.5


def circle_distance(x, y):
    d = np.mod(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)), 1.0)
    return np.minimum(d, 1.0 - d)


def sphere_distance(u, v):
    """Great-circle angle, batched over the leading axes.

    ``atan2(|u x v|, u . v)`` keeps full relative precision for nearby points,
    where ``arccos`` of the dot product bottoms out near 1.5e-8.
    """
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    return np.arctan2(np.linalg.norm(np.cross(u, v), axis=-1), np.sum(u * v, axis=-1))


def distance(x, y) -> float:
    """Intrinsic distance between two points of the same manifold."""
    mx, my = manifold_of(x), manifold_of(y)
    if mx != my:
        raise ManifoldMismatch(f"cannot measure distance between {mx} and {my} points")
    if mx == CIRCLE:
        return float(circle_distance(x, y))
    return float(sphere_distance(x, y))


def batch_distance(manifold: str, xs, ys) -> np.ndarray:
    if manifold == CIRCLE:
        return circle_distance(xs, ys)
    return sphere_distance(xs, ys)


def sphere_frame(v):
    """Canonical orthonormal tangent basis at ``v``, shape ``(..., 2, 3)``.

    First vector is ``e3 x v`` normalized, second is ``v x`` the first; near
    the poles ``e1`` replaces ``e3``.
    """
    v = np.asarray(v, dtype=float)
    near_pole = np.abs(v[..., 2]) > _POLE_GUARD
    ref = np.where(near_pole[..., None], _E1, _E3)
    a = normalize(np.cross(ref, v))
    b = np.cross(v, a)
    b = normalize(b)
    return np.stack([a, b], axis=-2)


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Orthonormal basis of the tangent space at ``base``.

    ``basis`` has one row per tangent direction in ambient coordinates:
    shape ``(1, 1)`` on the circle (the entry is +1 or -1) and ``(2, 3)`` on
    the sphere.
    """

    base: float | np.ndarray
    basis: np.ndarray

    @property
    def manifold(self) -> str:
        return manifold_of(self.base)

    @classmethod
    def canonical(cls, x) -> "TangentFrame":
        if manifold_of(x) == CIRCLE:
            return cls(circle_point(x), np.ones((1, 1)))
        v = sphere_point(x)
        return cls(v, sphere_frame(v))

    def is_orthonormal(self, tol: float = 1e-10) -> bool:
        e = np.asarray(self.basis)
        gram = e @ e.T
        if not np.allclose(gram, np.eye(len(e)), atol=tol, rtol=0):
            return False
        if self.manifold == SPHERE:
            return bool(np.all(np.abs(e @ self.base) <= tol))
        return True


def rotation_matrix(axis_angle) -> np.ndarray:
    """Rodrigues rotation for axis-angle vectors, batched: ``(..., 3) -> (..., 3, 3)``."""
    a = np.asarray(axis_angle, dtype=float)
    theta = np.linalg.norm(a, axis=-1)
    safe = np.where(theta > 0, theta, 1.0)
    k = a / safe[..., None]
    kx, ky, kz = k[..., 0], k[..., 1], k[..., 2]
    zero = np.zeros_like(kx)
    K = np.stack(
        [
            np.stack([zero, -kz, ky], axis=-1),
            np.stack([kz, zero, -kx], axis=-1),
            np.stack([-ky, kx, zero], axis=-1),
        ],
        axis=-2,
    )
    s = np.sin(theta)[..., None, None]
    c = (1.0 - np.cos(theta))[..., None, None]
    eye = np.broadcast_to(np.eye(3), K.shape)
    return eye + s * K + c * (K @ K)


def rotate(axis_angle, v):
    """Rotate vectors ``v`` by per-row axis-angle vectors without building matrices."""
    a = np.asarray(axis_angle, dtype=float)
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(a, axis=-1, keepdims=True)
    safe = np.where(theta > 0, theta, 1.0)
    k = a / safe
    kv = np.cross(k, v)
    kdot = np.sum(k * v, axis=-1, keepdims=True)
    return v * np.cos(theta) + kv * np.sin(theta) + k * kdot * (1.0 - np.cos(theta))
