"""Catalog of circle and sphere diffeomorphisms with closed-form tangent maps.

Circle maps are described by their lift ``F: R -> R`` with ``F(x + 1) = F(x) + 1``
and positive derivative. Sphere maps act on unit vectors and expose their
ambient 3x3 Jacobian, which is only ever applied to tangent vectors.

All maps are frozen dataclasses and every method is vectorized over a batch.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .geometry import (
    CIRCLE,
    SPHERE,
    ManifoldMismatch,
    TangentFrame,
    circle_point,
    manifold_of,
    normalize,
    rotation_matrix,
    signed_diff,
    sphere_frame,
    sphere_point,
    wrap,
)

TWO_PI = 2.0 * math.pi
_GRID = np.linspace(0.0, 1.0, 10_000, endpoint=False)


class ParameterRangeError(ValueError):
    """A map or noise parameter lies outside its declared range."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.field = name


class Diffeo(ABC):
    manifold: str = ""

    @abstractmethod
    def apply(self, x):
        """Image of a batch of points."""

    @abstractmethod
    def jacobian(self, x):
        """Ambient derivative: ``F'(x)`` on the circle, ``(..., 3, 3)`` on the sphere."""

    @abstractmethod
    def to_dict(self) -> dict:
        ...

    def step(self, x):
        """Single-point image without canonical reduction; fast path for orbit loops."""
        return self.apply(x)

    def step_jacobian(self, x):
        return self.jacobian(x)


class CircleMap(Diffeo):
    manifold = CIRCLE

    @abstractmethod
    def lift(self, x):
        ...

    @abstractmethod
    def deriv(self, x):
        ...

    def apply(self, x):
        return wrap(self.lift(x))

    def jacobian(self, x):
        return self.deriv(x)

    def step(self, x: float) -> float:
        return float(self.lift(x))

    def step_jacobian(self, x: float) -> float:
        return float(self.deriv(x))

    def is_monotone(self) -> bool:
        return bool(np.all(self.deriv(_GRID) > 0))


class SphereMap(Diffeo):
    manifold = SPHERE


# ---------------------------------------------------------------- circle family


@dataclass(frozen=True)
class Rotation(CircleMap):
    alpha: float

    def lift(self, x):
        return x + self.alpha

    def deriv(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def step(self, x):
        return x + self.alpha

    def step_jacobian(self, x):
        return 1.0

    def to_dict(self):
        return {"type": "rotation", "alpha": self.alpha}


@dataclass(frozen=True)
class NorthSouthCircle(CircleMap):
    """``x + c sin(2 pi x)``: attracting fixed point 0, repelling fixed point 1/2."""

    c: float

    def __post_init__(self):
        if not -1.0 / TWO_PI < self.c < 0.0:
            raise ParameterRangeError("c", f"must lie in (-1/(2 pi), 0), got {self.c}")

    def lift(self, x):
        return x + self.c * np.sin(TWO_PI * x)

    def deriv(self, x):
        return 1.0 + TWO_PI * self.c * np.cos(TWO_PI * x)

    def step(self, x):
        return x + self.c * math.sin(TWO_PI * x)

    def step_jacobian(self, x):
        return 1.0 + TWO_PI * self.c * math.cos(TWO_PI * x)

    def second_deriv(self, x):
        return -TWO_PI * TWO_PI * self.c * np.sin(TWO_PI * x)

    def to_dict(self):
        return {"type": "north_south", "c": self.c}


@dataclass(frozen=True)
class EquivariantNS(CircleMap):
    """``x + c sin(4 pi x)``; commutes with the half-turn."""

    c: float

    def __post_init__(self):
        if not -1.0 / (2 * TWO_PI) < self.c < 0.0:
            raise ParameterRangeError("c", f"must lie in (-1/(4 pi), 0), got {self.c}")

    def lift(self, x):
        return x + self.c * np.sin(2 * TWO_PI * x)

    def deriv(self, x):
        return 1.0 + 2 * TWO_PI * self.c * np.cos(2 * TWO_PI * x)

    def step(self, x):
        return x + self.c * math.sin(2 * TWO_PI * x)

    def step_jacobian(self, x):
        return 1.0 + 2 * TWO_PI * self.c * math.cos(2 * TWO_PI * x)

    def to_dict(self):
        return {"type": "equivariant_ns", "c": self.c}


@dataclass(frozen=True)
class FlatNS(CircleMap):
    """North-south map with derivative forced to ``kappa0`` on ``|x| < r0``.

    On ``r0 <= |x| <= 2 r0`` the derivative is the C^1 cubic Hermite blend
    from ``kappa0`` to the north-south derivative plus a multiple of
    ``t^2 (1-t)^2``. That multiple is fixed so the lift meets the unmodified
    map at ``2 r0``, which keeps the degree equal to one.
    """

    c: float
    r0: float
    kappa0: float
    _blend: Polynomial = field(init=False, repr=False, compare=False)
    _blend_int: Polynomial = field(init=False, repr=False, compare=False)
    _coef: tuple = field(init=False, repr=False, compare=False)
    _int_coef: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ns = NorthSouthCircle(self.c)
        if not 0.0 < self.r0 < 0.25:
            raise ParameterRangeError("r0", f"must lie in (0, 1/4), got {self.r0}")
        if not 0.0 < self.kappa0 <= 1.0:
            raise ParameterRangeError("kappa0", f"must lie in (0, 1], got {self.kappa0}")
        h = self.r0
        y0, y1 = self.kappa0, ns.deriv(2 * h)
        m1 = ns.second_deriv(2 * h)
        t = Polynomial([0.0, 1.0])
        h00 = 2 * t**3 - 3 * t**2 + 1
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        bump = t**2 * (1 - t) ** 2
        hermite = y0 * h00 + y1 * h01 + h * m1 * h11
        # integrals over t in [0, 1] are scaled by h since ds = h dt
        target = ns.lift(2 * h) - self.kappa0 * h
        amp = (target - h * hermite.integ()(1.0)) / (h / 30.0)
        blend = hermite + amp * bump
        crit = [r.real for r in blend.deriv().roots() if abs(r.imag) < 1e-12 and 0 <= r.real <= 1]
        lowest = min(blend(np.array([0.0, 1.0, *crit])))
        if lowest <= 0:
            raise ParameterRangeError(
                "kappa0", f"blend derivative reaches {lowest:.3g} <= 0; map is not a diffeomorphism"
            )
        object.__setattr__(self, "_blend", blend)
        object.__setattr__(self, "_blend_int", blend.integ())
        # Horner coefficients, highest degree first
        object.__setattr__(self, "_coef", tuple(blend.coef[::-1]))
        object.__setattr__(self, "_int_coef", tuple(self._blend_int.coef[::-1]))

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        n = np.floor(x + 0.5)
        u = x - n
        return n, u, np.abs(u), np.sign(u)

    def lift(self, x):
        scalar = np.ndim(x) == 0
        n, u, s, sg = self._split(x)
        h = self.r0
        ns = u + self.c * np.sin(TWO_PI * u)
        flat = self.kappa0 * u
        t = np.clip((s - h) / h, 0.0, 1.0)
        mid = sg * (self.kappa0 * h + h * self._blend_int(t))
        out = np.where(s < h, flat, np.where(s < 2 * h, mid, ns)) + n
        return float(out) if scalar else out

    def deriv(self, x):
        scalar = np.ndim(x) == 0
        _, u, s, _ = self._split(x)
        h = self.r0
        t = np.clip((s - h) / h, 0.0, 1.0)
        ns = 1.0 + TWO_PI * self.c * np.cos(TWO_PI * u)
        out = np.where(s < h, self.kappa0, np.where(s < 2 * h, self._blend(t), ns))
        return float(out) if scalar else out

    def step(self, x):
        n = math.floor(x + 0.5)
        u = x - n
        s = abs(u)
        h = self.r0
        if s < h:
            return self.kappa0 * u + n
        if s < 2 * h:
            t = (s - h) / h
            acc = 0.0
            for c in self._int_coef:
                acc = acc * t + c
            return math.copysign(self.kappa0 * h + h * acc, u) + n
        return u + self.c * math.sin(TWO_PI * u) + n

    def step_jacobian(self, x):
        u = x - math.floor(x + 0.5)
        s = abs(u)
        h = self.r0
        if s < h:
            return self.kappa0
        if s < 2 * h:
            t = (s - h) / h
            acc = 0.0
            for c in self._coef:
                acc = acc * t + c
            return acc
        return 1.0 + TWO_PI * self.c * math.cos(TWO_PI * u)

    def to_dict(self):
        return {"type": "flat_ns", "c": self.c, "r0": self.r0, "kappa0": self.kappa0}


@dataclass(frozen=True)
class InverseCircle(CircleMap):
    """Inverse of a monotone circle map, evaluated by bisection on the lift."""

    base: CircleMap
    iterations: int = 80

    def lift(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g0 = self.base.lift(x) - x
        # F - id is periodic with oscillation < 1, so this brackets the root
        lo = x - g0 - 1.0
        hi = x - g0 + 1.0
        for _ in range(self.iterations):
            mid = 0.5 * (lo + hi)
            below = self.base.lift(mid) < x
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        y = 0.5 * (lo + hi)
        resid = np.max(np.abs(self.base.lift(y) - x), initial=0.0)
        if resid > 1e-12:
            raise ArithmeticError(f"bisection inverse did not converge (residual {resid:.3g})")
        return float(y[0]) if scalar else y

    def deriv(self, x):
        return 1.0 / self.base.deriv(self.lift(x))

    def to_dict(self):
        return {"type": "inverse", "base": self.base.to_dict()}


# ---------------------------------------------------------------- sphere family


@dataclass(frozen=True)
class SphereRotation(SphereMap):
    axis: tuple[float, float, float]
    angle: float
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        if a.shape != (3,) or not np.linalg.norm(a) > 0:
            raise ParameterRangeError("axis", "must be a nonzero 3-vector")
        object.__setattr__(self, "axis", tuple(float(c) for c in a / np.linalg.norm(a)))
        m = rotation_matrix(np.asarray(self.axis) * self.angle)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, v):
        return normalize(np.asarray(v, dtype=float) @ self.matrix.T)

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        return np.broadcast_to(self.matrix, v.shape[:-1] + (3, 3)).copy()

    def step(self, v):
        return self.matrix @ v

    def step_jacobian(self, v):
        return self.matrix

    def to_dict(self):
        return {"type": "sphere_rotation", "axis": list(self.axis), "angle": self.angle}


_FLIP = np.diag([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class SphereScale(SphereMap):
    """Stereographic scaling ``z -> lam z``: attracting south pole, repelling north pole.

    With ``swapped`` the roles of the poles are exchanged (conjugation by
    ``z3 -> -z3``), which is how the inverse is represented.
    """

    lam: float
    swapped: bool = False

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ParameterRangeError("lam", f"must lie in (0, 1), got {self.lam}")

    def _unswapped_apply(self, v):
        x, y, z = v[..., 0], v[..., 1], v[..., 2]
        north = z > 0
        # project from the far pole of the hemisphere the point lies in
        s = 1.0 / np.where(north, 1.0 + z, 1.0 - z)
        k = np.where(north, 1.0 / self.lam, self.lam)
        u, w = k * x * s, k * y * s
        q = u * u + w * w
        d = 1.0 + q
        zz = np.where(north, (1.0 - q) / d, (q - 1.0) / d)
        return normalize(np.stack([2 * u / d, 2 * w / d, zz], axis=-1))

    def _unswapped_jac(self, v):
        x, y, z = v[..., 0], v[..., 1], v[..., 2]
        north = z > 0
        sign = np.where(north, -1.0, 1.0)
        s = 1.0 / np.where(north, 1.0 + z, 1.0 - z)
        k = np.where(north, 1.0 / self.lam, self.lam)
        zeros = np.zeros_like(x)
        # d(u, w)/d(x, y, z) of the stereographic chart
        jp = np.stack(
            [
                np.stack([s, zeros, sign * x * s * s], axis=-1),
                np.stack([zeros, s, sign * y * s * s], axis=-1),
            ],
            axis=-2,
        )
        u, w = k * x * s, k * y * s
        d = 1.0 + u * u + w * w
        d2 = d * d
        js = np.stack(
            [
                np.stack([2 / d - 4 * u * u / d2, -4 * u * w / d2], axis=-1),
                np.stack([-4 * u * w / d2, 2 / d - 4 * w * w / d2], axis=-1),
                np.stack([sign * 4 * u / d2, sign * 4 * w / d2], axis=-1),
            ],
            axis=-2,
        )
        return k[..., None, None] * (js @ jp)

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        if self.swapped:
            return self._unswapped_apply(v @ _FLIP) @ _FLIP
        return self._unswapped_apply(v)

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        if self.swapped:
            return _FLIP @ self._unswapped_jac(v @ _FLIP) @ _FLIP
        return self._unswapped_jac(v)

    def step(self, v):
        x, y, z = v
        if self.swapped:
            z = -z
        if z > 0:
            s, k, sign = 1.0 / (1.0 + z), 1.0 / self.lam, -1.0
        else:
            s, k, sign = 1.0 / (1.0 - z), self.lam, 1.0
        u, w = k * x * s, k * y * s
        d = 1.0 + u * u + w * w
        zz = sign * (u * u + w * w - 1.0) / d
        out = np.array([2 * u / d, 2 * w / d, -zz if self.swapped else zz])
        return out / math.sqrt(out @ out)

    def step_jacobian(self, v):
        x, y, z = v
        if self.swapped:
            z = -z
        if z > 0:
            s, k, sign = 1.0 / (1.0 + z), 1.0 / self.lam, -1.0
        else:
            s, k, sign = 1.0 / (1.0 - z), self.lam, 1.0
        u, w = k * x * s, k * y * s
        d = 1.0 + u * u + w * w
        d2 = d * d
        jp = ((s, 0.0, sign * x * s * s), (0.0, s, sign * y * s * s))
        js = (
            (2 / d - 4 * u * u / d2, -4 * u * w / d2),
            (-4 * u * w / d2, 2 / d - 4 * w * w / d2),
            (sign * 4 * u / d2, sign * 4 * w / d2),
        )
        jac = np.array([[k * (a * jp[0][j] + b * jp[1][j]) for j in range(3)] for a, b in js])
        if self.swapped:
            jac[2, :] *= -1
            jac[:, 2] *= -1
        return jac

    def conformal_factor(self, v):
        """Spherical-metric stretch ``lam (1+|z|^2) / (1 + lam^2 |z|^2)``."""
        v = np.asarray(v, dtype=float)
        z3 = -v[..., 2] if self.swapped else v[..., 2]
        with np.errstate(divide="ignore"):
            r2 = (1.0 + z3) / (1.0 - z3)
        lam = self.lam
        return np.where(
            np.isfinite(r2), lam * (1 + r2) / (1 + lam * lam * r2), 1.0 / lam
        )

    def to_dict(self):
        return {"type": "sphere_scale", "lam": self.lam, "swapped": self.swapped}


# ---------------------------------------------------------------- combinators


def _check_same_manifold(maps) -> str:
    kinds = {m.manifold for m in maps}
    if len(kinds) != 1:
        raise ManifoldMismatch(f"maps on different manifolds: {sorted(kinds)}")
    return kinds.pop()


@dataclass(frozen=True)
class Composition(Diffeo):
    """Maps applied in list order: ``maps[0]`` first."""

    maps: tuple

    def __post_init__(self):
        if not self.maps:
            raise ParameterRangeError("maps", "composition needs at least one map")
        object.__setattr__(self, "maps", tuple(self.maps))
        _check_same_manifold(self.maps)

    @property
    def manifold(self):
        return self.maps[0].manifold

    def lift(self, x):
        for m in self.maps:
            x = m.lift(x)
        return x

    def deriv(self, x):
        out = 1.0
        for m in self.maps:
            out = out * m.deriv(x)
            x = m.lift(x)
        return out

    def apply(self, x):
        if self.manifold == CIRCLE:
            return wrap(self.lift(x))
        for m in self.maps:
            x = m.apply(x)
        return x

    def jacobian(self, x):
        if self.manifold == CIRCLE:
            return self.deriv(x)
        x = np.asarray(x, dtype=float)
        out = np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3))
        for m in self.maps:
            out = m.jacobian(x) @ out
            x = m.apply(x)
        return out

    def step(self, x):
        for m in self.maps:
            x = m.step(x)
        return x

    def step_jacobian(self, x):
        if self.manifold == CIRCLE:
            out = 1.0
            for m in self.maps:
                out *= m.step_jacobian(x)
                x = m.step(x)
            return out
        out = np.eye(3)
        for m in self.maps:
            out = m.step_jacobian(x) @ out
            x = m.step(x)
            x = x / math.sqrt(x @ x)
        return out

    def to_dict(self):
        return {"type": "composition", "maps": [m.to_dict() for m in self.maps]}


@dataclass(frozen=True)
class Translated(Diffeo):
    """``base`` followed by a rotation: by ``a`` revolutions, or by the axis-angle vector ``a``."""

    base: Diffeo
    a: float | tuple[float, float, float]
    _rot: np.ndarray = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.base.manifold == SPHERE:
            a = np.asarray(self.a, dtype=float)
            if a.shape != (3,):
                raise ParameterRangeError("a", "sphere translation must be an axis-angle 3-vector")
            object.__setattr__(self, "a", tuple(float(c) for c in a))
            m = rotation_matrix(a)
            m.setflags(write=False)
            object.__setattr__(self, "_rot", m)
        else:
            object.__setattr__(self, "a", float(self.a))

    @property
    def manifold(self):
        return self.base.manifold

    def lift(self, x):
        return self.base.lift(x) + self.a

    def deriv(self, x):
        return self.base.deriv(x)

    def apply(self, x):
        if self.manifold == CIRCLE:
            return wrap(self.lift(x))
        return normalize(self.base.apply(x) @ self._rot.T)

    def jacobian(self, x):
        if self.manifold == CIRCLE:
            return self.deriv(x)
        return self._rot @ self.base.jacobian(x)

    def step(self, x):
        if self.manifold == CIRCLE:
            return self.base.step(x) + self.a
        return self._rot @ self.base.step(x)

    def step_jacobian(self, x):
        if self.manifold == CIRCLE:
            return self.base.step_jacobian(x)
        return self._rot @ self.base.step_jacobian(x)

    def to_dict(self):
        a = list(self.a) if self.manifold == SPHERE else self.a
        return {"type": "translated", "base": self.base.to_dict(), "a": a}


# ---------------------------------------------------------------- noise


NOISE_KINDS = ("uniform", "triangular")


@dataclass(frozen=True)
class NoiseSpec:
    """Parameter law for additive (circle) or rotational (sphere) noise.

    Circle: ``a`` in ``[-delta, delta]``. Sphere: axis-angle vector in the
    ball of radius ``delta``; ``triangular`` there means the radial tent
    density ``1 - |a|/delta``.
    """

    dist: str
    delta: float

    def __post_init__(self):
        if self.dist not in NOISE_KINDS:
            raise ParameterRangeError("dist", f"must be one of {NOISE_KINDS}, got {self.dist!r}")
        if not self.delta >= 0.0:
            raise ParameterRangeError("delta", f"must be >= 0, got {self.delta}")

    def check(self, manifold: str) -> None:
        limit = 0.5 if manifold == CIRCLE else math.pi
        if self.delta > limit:
            raise ParameterRangeError("delta", f"must be <= {limit:g} on the {manifold}, got {self.delta}")

    def sample(self, n: int, rng: np.random.Generator, manifold: str) -> np.ndarray:
        self.check(manifold)
        d = self.delta
        if manifold == CIRCLE:
            if d == 0:
                return np.zeros(n)
            if self.dist == "uniform":
                return rng.uniform(-d, d, size=n)
            return rng.triangular(-d, 0.0, d, size=n)
        direction = normalize(rng.standard_normal((n, 3)))
        if self.dist == "uniform":
            r = d * rng.random(n) ** (1.0 / 3.0)
        else:
            r = d * rng.beta(3.0, 2.0, size=n)
        return direction * r[:, None]

    def density(self, a, manifold: str):
        d = self.delta
        if manifold == CIRCLE:
            a = np.abs(np.asarray(a, dtype=float))
            inside = a <= d
            if self.dist == "uniform":
                return np.where(inside, 1.0 / (2 * d), 0.0)
            return np.where(inside, (d - a) / d**2, 0.0)
        r = np.linalg.norm(np.asarray(a, dtype=float), axis=-1)
        inside = r <= d
        if self.dist == "uniform":
            return np.where(inside, 3.0 / (4 * math.pi * d**3), 0.0)
        return np.where(inside, 3.0 / (math.pi * d**3) * (1 - r / d), 0.0)

    def to_dict(self):
        return {"dist": self.dist, "delta": self.delta}


# ---------------------------------------------------------------- operations


def _require(map_: Diffeo, manifold: str) -> None:
    if map_.manifold != manifold:
        raise ManifoldMismatch(f"{type(map_).__name__} acts on the {map_.manifold}, not the {manifold}")


def evaluate(map_: Diffeo, x):
    """Image of one point, in canonical form."""
    _require(map_, manifold_of(x))
    if map_.manifold == CIRCLE:
        return circle_point(map_.apply(float(x)))
    return sphere_point(map_.apply(sphere_point(x)))


def tangent(map_: Diffeo, frame: TangentFrame) -> tuple[TangentFrame, np.ndarray]:
    """Derivative as a d x d matrix from ``frame`` to the canonical frame at the image."""
    _require(map_, frame.manifold)
    image = TangentFrame.canonical(evaluate(map_, frame.base))
    if map_.manifold == CIRCLE:
        jac = np.array([[float(map_.jacobian(float(frame.base)))]])
    else:
        jac = map_.jacobian(frame.base)
    return image, image.basis @ jac @ frame.basis.T


def tangent_fd(map_: Diffeo, frame: TangentFrame, h: float = 1e-6) -> np.ndarray:
    """Central-difference oracle for ``tangent`` in the same frame convention."""
    if not 0.0 < h <= 1e-4:
        raise ValueError(f"step h must lie in (0, 1e-4], got {h}")
    _require(map_, frame.manifold)
    image = TangentFrame.canonical(evaluate(map_, frame.base))
    if map_.manifold == CIRCLE:
        x, e = float(frame.base), float(frame.basis[0, 0])
        fp = map_.apply(x + e * h)
        fm = map_.apply(x - e * h)
        col = signed_diff(fp, fm) / (2 * h)
        return np.array([[image.basis[0, 0] * col]])
    v = frame.base
    cols = []
    for e in frame.basis:
        fp = map_.apply(math.cos(h) * v + math.sin(h) * e)
        fm = map_.apply(math.cos(h) * v - math.sin(h) * e)
        cols.append(image.basis @ (fp - fm) / (2 * h))
    return np.stack(cols, axis=1)


def inverse(map_: Diffeo) -> Diffeo:
    """Inverse map; closed form where the family allows, bisection otherwise."""
    if isinstance(map_, Rotation):
        return Rotation(-map_.alpha)
    if isinstance(map_, SphereRotation):
        return SphereRotation(map_.axis, -map_.angle)
    if isinstance(map_, SphereScale):
        return SphereScale(map_.lam, not map_.swapped)
    if isinstance(map_, InverseCircle):
        return map_.base
    if isinstance(map_, Composition):
        return Composition(tuple(inverse(m) for m in reversed(map_.maps)))
    if isinstance(map_, Translated):
        if map_.manifold == CIRCLE:
            undo = Rotation(-map_.a)
        else:
            a = np.asarray(map_.a)
            theta = float(np.linalg.norm(a))
            if theta == 0:
                return inverse(map_.base)
            undo = SphereRotation(tuple(a / theta), -theta)
        return Composition((undo, inverse(map_.base)))
    if isinstance(map_, CircleMap) or (map_.manifold == CIRCLE and hasattr(map_, "lift")):
        return InverseCircle(map_)
    raise TypeError(f"no inverse available for {type(map_).__name__}")


def sample_random_map(base: Diffeo, noise: NoiseSpec, rng: np.random.Generator) -> Diffeo:
    """``base`` followed by a rotation whose parameter is drawn from ``noise``."""
    noise.check(base.manifold)
    if noise.delta == 0:
        return base
    a = noise.sample(1, rng, base.manifold)[0]
    return Translated(base, a if base.manifold == CIRCLE else tuple(a))


# ---------------------------------------------------------------- serialization


_REGISTRY = {
    "rotation": lambda d: Rotation(float(d["alpha"])),
    "north_south": lambda d: NorthSouthCircle(float(d["c"])),
    "flat_ns": lambda d: FlatNS(float(d["c"]), float(d["r0"]), float(d["kappa0"])),
    "equivariant_ns": lambda d: EquivariantNS(float(d["c"])),
    "sphere_rotation": lambda d: SphereRotation(tuple(d["axis"]), float(d["angle"])),
    "sphere_scale": lambda d: SphereScale(float(d["lam"]), bool(d.get("swapped", False))),
    "composition": lambda d: Composition(tuple(diffeo_from_dict(m) for m in d["maps"])),
    "translated": lambda d: Translated(diffeo_from_dict(d["base"]), d["a"]),
    "inverse": lambda d: inverse(diffeo_from_dict(d["base"])),
}

DIFFEO_TYPES = tuple(_REGISTRY)


def diffeo_from_dict(d: dict) -> Diffeo:
    kind = d.get("type")
    if kind not in _REGISTRY:
        raise ParameterRangeError("type", f"unknown map type {kind!r}")
    return _REGISTRY[kind](d)


def noise_from_dict(d: dict) -> NoiseSpec:
    return NoiseSpec(str(d["dist"]), float(d["delta"]))


def canonical_frames(manifold: str, xs):
    """Canonical frame bases for a batch of points."""
    if manifold == CIRCLE:
        return np.ones((len(xs), 1, 1))
    return sphere_frame(xs)
