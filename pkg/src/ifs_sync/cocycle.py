"""Skew-product engine: fiber iteration along words and the QR derivative cocycle.

A *word* drives the fiber. For a :class:`FiniteIFS` it is an integer array of
symbols; for a :class:`RandomFamily` it is an array of drawn noise parameters,
shape ``(n,)`` on the circle and ``(n, 3)`` on the sphere. In both cases
``w[0]`` acts first.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .diffeos import Diffeo, NoiseSpec, Translated, diffeo_from_dict, noise_from_dict
from .driving import ProbabilityVector, as_probs, check_word, sample_word
from .geometry import (
    CIRCLE,
    SPHERE,
    ManifoldMismatch,
    TangentFrame,
    check_batch,
    circle_point,
    dim,
    manifold_of,
    normalize,
    rotate,
    rotation_matrix,
    sphere_point,
    wrap,
)

SINGULAR_TOL = 1e-300


def _reduce(manifold: str, x):
    if manifold == CIRCLE:
        x = x % 1.0
        # float mod maps tiny negatives to exactly 1.0
        return 0.0 if x >= 1.0 else x
    return x / math.sqrt(x @ x)


def _frame_at(v) -> np.ndarray:
    """Single-point version of :func:`geometry.sphere_frame`."""
    x, y, z = v
    if abs(z) > 1.0 - 1e-8:
        # e1 x v
        a = (0.0, -z, y)
    else:
        # e3 x v
        a = (-y, x, 0.0)
    na = math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
    a = (a[0] / na, a[1] / na, a[2] / na)
    b = (y * a[2] - z * a[1], z * a[0] - x * a[2], x * a[1] - y * a[0])
    nb = math.sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2])
    return np.array([a, (b[0] / nb, b[1] / nb, b[2] / nb)])


class SingularCocycle(ArithmeticError):
    """A derivative matrix had an R-diagonal entry below the singularity threshold."""


@dataclass(frozen=True, eq=False)
class FiniteIFS:
    maps: tuple
    p: ProbabilityVector

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "p", as_probs(self.p))
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        if len(self.maps) != self.p.k:
            raise ValueError(f"{len(self.maps)} maps but {self.p.k} probabilities")
        if len({m.manifold for m in self.maps}) != 1:
            raise ManifoldMismatch("all maps of an IFS must act on one manifold")

    @property
    def manifold(self) -> str:
        return self.maps[0].manifold

    @property
    def k(self) -> int:
        return len(self.maps)

    def sample_word(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_word(self.p, n, rng)

    def check_word(self, w) -> np.ndarray:
        return check_word(w, self.k)

    def map_for(self, s) -> Diffeo:
        return self.maps[int(s)]

    def apply_symbol(self, s, x):
        """Single point, canonical form."""
        return _reduce(self.manifold, self.maps[s].step(x))

    def jacobian_symbol(self, s, x):
        return self.maps[s].step_jacobian(x)

    def apply_batch(self, symbols, xs):
        """Apply ``maps[symbols[j]]`` to ``xs[j]`` for every row."""
        symbols = np.asarray(symbols)
        out = np.empty_like(xs)
        for i, m in enumerate(self.maps):
            sel = symbols == i
            if np.any(sel):
                out[sel] = m.apply(xs[sel])
        return out

    def jacobian_batch(self, symbols, xs):
        symbols = np.asarray(symbols)
        shape = xs.shape if self.manifold == CIRCLE else xs.shape[:-1] + (3, 3)
        out = np.empty(shape)
        for i, m in enumerate(self.maps):
            sel = symbols == i
            if np.any(sel):
                out[sel] = m.jacobian(xs[sel])
        return out

    def to_dict(self) -> dict:
        return {
            "manifold": self.manifold,
            "maps": [m.to_dict() for m in self.maps],
            "probs": self.p.tolist(),
        }


@dataclass(frozen=True, eq=False)
class RandomFamily:
    """``f_a = R_a o base`` with rotation parameter ``a`` drawn from ``noise``."""

    base: Diffeo
    noise: NoiseSpec

    def __post_init__(self):
        self.noise.check(self.base.manifold)

    @property
    def manifold(self) -> str:
        return self.base.manifold

    def sample_word(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.noise.sample(n, rng, self.manifold)

    def check_word(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self.manifold == SPHERE:
            return w.reshape(-1, 3)
        return w.reshape(-1)

    def map_for(self, a) -> Diffeo:
        return Translated(self.base, a if self.manifold == CIRCLE else tuple(a))

    def apply_symbol(self, a, x):
        """Single point, canonical form."""
        if self.manifold == CIRCLE:
            return _reduce(CIRCLE, self.base.step(x) + a)
        return _reduce(SPHERE, rotate(a, self.base.step(x)))

    def jacobian_symbol(self, a, x):
        if self.manifold == CIRCLE:
            return self.base.step_jacobian(x)
        return rotation_matrix(a) @ self.base.step_jacobian(x)

    def apply_batch(self, params, xs):
        if self.manifold == CIRCLE:
            return wrap(self.base.lift(xs) + params)
        return normalize(rotate(params, self.base.apply(xs)))

    def jacobian_batch(self, params, xs):
        if self.manifold == CIRCLE:
            return self.base.jacobian(xs)
        return rotation_matrix(params) @ self.base.jacobian(xs)

    def to_dict(self) -> dict:
        return {
            "manifold": self.manifold,
            "maps": [self.base.to_dict()],
            "noise": self.noise.to_dict(),
        }


SystemSpec = Union[FiniteIFS, RandomFamily]


def system_from_dict(d: dict) -> SystemSpec:
    maps = [diffeo_from_dict(m) for m in d["maps"]]
    for m in maps:
        if m.manifold != d["manifold"]:
            raise ManifoldMismatch(f"map {m.to_dict()['type']} does not act on the {d['manifold']}")
    if d.get("noise") is not None:
        if len(maps) != 1:
            raise ValueError("a random family takes exactly one base map")
        return RandomFamily(maps[0], noise_from_dict(d["noise"]))
    return FiniteIFS(tuple(maps), ProbabilityVector(d["probs"]))


def _point(sys: SystemSpec, x):
    if manifold_of(x) != sys.manifold:
        raise ManifoldMismatch(f"point on the {manifold_of(x)}, system on the {sys.manifold}")
    return circle_point(x) if sys.manifold == CIRCLE else sphere_point(x)


def iterate_word(sys: SystemSpec, w, x):
    """``f_{w(n-1)} o ... o f_{w(0)} (x)``."""
    x = _point(sys, x)
    for s in sys.check_word(w):
        x = sys.apply_symbol(s, x)
    return circle_point(x) if sys.manifold == CIRCLE else x


def trajectory(sys: SystemSpec, w, x) -> np.ndarray:
    """All ``n + 1`` states visited by :func:`iterate_word`, starting with ``x``."""
    x = _point(sys, x)
    w = sys.check_word(w)
    out = np.empty((len(w) + 1,) + np.shape(x))
    out[0] = x
    for j, s in enumerate(w):
        x = sys.apply_symbol(s, x)
        out[j + 1] = x
    return out


def pullback_compose(sys: SystemSpec, w, ensemble) -> np.ndarray:
    """Push a point cloud through a past block.

    ``w`` lists the past in chronological order, ``w[j] = omega(-n + j)``, so
    the result is ``f_{omega(-1)} o ... o f_{omega(-n)}`` applied to each point.
    """
    xs = check_batch(sys.manifold, ensemble).copy()
    for s in sys.check_word(w):
        xs = sys.apply_batch(np.broadcast_to(s, (len(xs),) + np.shape(s)), xs)
    return xs


def qr_positive(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization with a positive R-diagonal (orientation sign kept in Q)."""
    if a.shape == (1, 1):
        r = abs(a[0, 0])
        return np.array([[np.sign(a[0, 0]) or 1.0]]), np.array([[r]])
    if a.shape == (2, 2):
        c0 = a[:, 0]
        r11 = np.hypot(c0[0], c0[1])
        if r11 < SINGULAR_TOL:
            raise SingularCocycle(f"R-diagonal entry {r11:.3g} below {SINGULAR_TOL}")
        q1 = c0 / r11
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        sgn = 1.0 if det >= 0 else -1.0
        q2 = sgn * np.array([-q1[1], q1[0]])
        q = np.column_stack([q1, q2])
        r = np.array([[r11, q1 @ a[:, 1]], [0.0, abs(det) / r11]])
        return q, r
    q, r = np.linalg.qr(a)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs, r * signs[:, None]


@dataclass(frozen=True, eq=False)
class CocycleAccumulator:
    """State of a QR run: current point and frame, summed log R-diagonals, steps taken."""

    point: float | np.ndarray
    frame: TangentFrame
    log_sums: np.ndarray
    steps: int = 0
    step_logs: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def start(cls, x, frame: TangentFrame | None = None) -> "CocycleAccumulator":
        frame = frame if frame is not None else TangentFrame.canonical(x)
        d = dim(frame.manifold)
        return cls(frame.base, frame, np.zeros(d), 0)

    @property
    def exponents(self) -> np.ndarray:
        return self.log_sums / max(self.steps, 1)

    def extend(self, sys: SystemSpec, w, keep_steps: bool = False) -> "CocycleAccumulator":
        """Continue the run along ``w``; sums add, the final frame is carried over."""
        w = sys.check_word(w)
        if sys.manifold == CIRCLE:
            point, basis, logs = _circle_run(sys, w, self.point, self.frame.basis)
        else:
            point, basis, logs = _sphere_run(sys, w, self.point, self.frame.basis)
        return CocycleAccumulator(
            point,
            TangentFrame(point, basis),
            self.log_sums + logs.sum(axis=0),
            self.steps + len(w),
            logs if keep_steps else None,
        )


def _circle_run(sys, w, x, basis):
    traj = trajectory(sys, w, float(x))
    if len(w) == 0:
        return traj[-1], basis, np.zeros((0, 1))
    d = np.asarray(sys.jacobian_batch(w, traj[:-1]), dtype=float)
    r = np.abs(d)
    if np.any(r < SINGULAR_TOL):
        raise SingularCocycle("circle derivative vanished along the orbit")
    sign = np.prod(np.sign(d))
    return float(traj[-1]), basis * sign, np.log(r)[:, None]


def _sphere_run(sys, w, v, basis):
    logs = np.empty((len(w), 2))
    for j, s in enumerate(w):
        jac = sys.jacobian_symbol(s, v)
        v = sys.apply_symbol(s, v)
        out_basis = _frame_at(v)
        q, r = qr_positive(out_basis @ jac @ basis.T)
        diag = np.diag(r)
        if np.any(diag < SINGULAR_TOL):
            raise SingularCocycle(f"R-diagonal entry {diag.min():.3g} below {SINGULAR_TOL}")
        logs[j] = np.log(diag)
        basis = q.T @ out_basis
    return v, basis, logs


def qr_cocycle(sys: SystemSpec, w, x, frame: TangentFrame | None = None, keep_steps: bool = False) -> CocycleAccumulator:
    """Run the derivative cocycle along ``w`` from ``x`` with QR re-orthonormalization."""
    x = _point(sys, x)
    if frame is not None and frame.manifold != sys.manifold:
        raise ManifoldMismatch("frame and system live on different manifolds")
    return CocycleAccumulator.start(x, frame).extend(sys, w, keep_steps=keep_steps)
