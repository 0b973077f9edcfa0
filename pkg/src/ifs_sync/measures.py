"""Measures on the fiber and the transfer operator ``m -> sum_i p_i f_i m``.

Two representations are used: equal-weight point clouds
(:class:`EmpiricalMeasure`) and cell masses on a fixed partition
(:class:`UlamHistogram`). The Ulam matrix discretizes the transfer operator on
a partition; its left fixed vector approximates the stationary measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from ._parallel import ordered_map
from .cocycle import FiniteIFS, SystemSpec, trajectory
from .geometry import CIRCLE, SPHERE, check_batch, normalize, wrap

ULAM_CHUNK = 16


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PartitionSpec:
    """Circle: ``n`` equal arcs. Sphere: ``n_lat`` equal-area bands times ``n_lon`` sectors."""

    manifold: str
    n: int
    n_lon: int = 1

    @property
    def cells(self) -> int:
        return self.n * self.n_lon

    def cell_of(self, xs) -> np.ndarray:
        xs = check_batch(self.manifold, xs)
        if self.manifold == CIRCLE:
            return np.minimum((wrap(xs) * self.n).astype(np.int64), self.n - 1)
        z = np.clip(xs[:, 2], -1.0, 1.0)
        band = np.minimum(((z + 1.0) * 0.5 * self.n).astype(np.int64), self.n - 1)
        phi = np.mod(np.arctan2(xs[:, 1], xs[:, 0]), 2 * math.pi)
        sector = np.minimum((phi / (2 * math.pi) * self.n_lon).astype(np.int64), self.n_lon - 1)
        return band * self.n_lon + sector

    def sample_cell(self, c: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform (Lebesgue) samples inside cell ``c``."""
        if self.manifold == CIRCLE:
            return (c + rng.random(size)) / self.n
        band, sector = divmod(c, self.n_lon)
        # uniform z on a slice gives uniform area (Archimedes)
        z = -1.0 + 2.0 * (band + rng.random(size)) / self.n
        phi = 2 * math.pi * (sector + rng.random(size)) / self.n_lon
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])

    def cell_areas(self) -> np.ndarray:
        """Cell measures as fractions of the whole manifold.

        Sphere cells use the zone formula: the band between heights ``z0 < z1``
        has area ``2 pi (z1 - z0)``.
        """
        if self.manifold == CIRCLE:
            return np.diff(np.linspace(0.0, 1.0, self.n + 1))
        zones = 2 * math.pi * np.diff(np.linspace(-1.0, 1.0, self.n + 1))
        return np.repeat(zones / self.n_lon, self.n_lon) / (4 * math.pi)


def make_partition(manifold: str, resolution) -> PartitionSpec:
    """Circle: ``resolution`` arcs. Sphere: ``(n_lat, n_lon)`` or an int ``r`` meaning ``(r, 2r)``."""
    if manifold == CIRCLE:
        n = int(resolution)
        if n < 2:
            raise ValueError(f"resolution must be >= 2, got {resolution}")
        return PartitionSpec(CIRCLE, n)
    if manifold == SPHERE:
        if np.ndim(resolution) == 0:
            n_lat, n_lon = int(resolution), 2 * int(resolution)
        else:
            n_lat, n_lon = (int(r) for r in resolution)
        if n_lat < 2 or n_lon < 2:
            raise ValueError(f"resolution must be >= 2, got {resolution}")
        return PartitionSpec(SPHERE, n_lat, n_lon)
    raise ValueError(f"unknown manifold {manifold!r}")


@dataclass(frozen=True, eq=False)
class UlamHistogram:
    partition: PartitionSpec | None
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if np.any(mass < 0):
            raise ValueError("histogram masses must be nonnegative")
        if abs(mass.sum() - 1.0) > 1e-12:
            raise ValueError(f"histogram masses sum to {mass.sum():.15g}")
        if self.partition is not None and len(mass) != self.partition.cells:
            raise ValueError("histogram size does not match the partition")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform(cls, partition: PartitionSpec) -> "UlamHistogram":
        return cls(partition, partition.cell_areas())


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Equal-weight point cloud."""

    manifold: str
    points: np.ndarray

    def __post_init__(self):
        pts = check_batch(self.manifold, self.points)
        if len(pts) == 0:
            raise ValueError("an empirical measure needs at least one point")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def histogram(self, partition: PartitionSpec) -> UlamHistogram:
        if partition.manifold != self.manifold:
            raise ValueError("partition and measure live on different manifolds")
        counts = np.bincount(partition.cell_of(self.points), minlength=partition.cells)
        mass = counts / counts.sum()
        return UlamHistogram(partition, mass / mass.sum())


@dataclass(frozen=True)
class InitialLaw:
    """Law of the first orbit point.

    ``kind`` is ``uniform``, ``delta`` (``params = point``) or ``arc``
    (``params = (a, b)`` on the circle; ``(center..., radius)`` cap on the sphere).
    """

    kind: str
    params: tuple = ()

    def sample(self, manifold: str, rng: np.random.Generator):
        if self.kind == "uniform":
            return uniform_points(manifold, 1, rng)[0]
        if self.kind == "delta":
            if manifold == CIRCLE:
                return wrap(float(self.params[0]))
            return normalize(np.asarray(self.params[:3], dtype=float))
        if self.kind == "arc":
            if manifold == CIRCLE:
                a, b = self.params
                return wrap(float(a + (b - a) * rng.random()))
            center = normalize(np.asarray(self.params[:3], dtype=float))
            radius = float(self.params[3])
            while True:
                v = uniform_points(SPHERE, 1, rng)[0]
                if np.arccos(np.clip(v @ center, -1, 1)) <= radius:
                    return v
        raise ValueError(f"unknown initial law {self.kind!r}")


def uniform_points(manifold: str, n: int, rng: np.random.Generator) -> np.ndarray:
    if manifold == CIRCLE:
        return rng.random(n)
    return normalize(rng.standard_normal((n, 3)))


def ulam_matrix(sys: SystemSpec, part: PartitionSpec, samples_per_cell: int, rng, threads=None) -> np.ndarray:
    """Row-stochastic Ulam discretization of the transfer operator.

    Entry ``[c, c']`` estimates the probability that one random step moves a
    Lebesgue-uniform point of cell ``c`` into cell ``c'``. Each cell draws its
    samples from its own substream, so the matrix does not depend on ``threads``.
    """
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be >= 1")
    if part.manifold != sys.manifold:
        raise ValueError("partition and system live on different manifolds")
    seed = rngmod.child_seed(rngmod.as_generator(rng))
    n = part.cells

    def rows(chunk):
        start, stop = chunk
        out = np.zeros((stop - start, n))
        for c in range(start, stop):
            g = rngmod.stream(seed, c)
            xs = part.sample_cell(c, samples_per_cell, g)
            if isinstance(sys, FiniteIFS):
                for m, p in zip(sys.maps, sys.p.p):
                    counts = np.bincount(part.cell_of(m.apply(xs)), minlength=n)
                    out[c - start] += p * counts / samples_per_cell
            else:
                params = sys.sample_word(samples_per_cell, g)
                counts = np.bincount(part.cell_of(sys.apply_batch(params, xs)), minlength=n)
                out[c - start] += counts / samples_per_cell
        return out

    chunks = [(s, min(s + ULAM_CHUNK, n)) for s in range(0, n, ULAM_CHUNK)]
    return np.vstack(ordered_map(rows, chunks, threads))


def transfer_push(sys: SystemSpec, m: EmpiricalMeasure, rng: np.random.Generator) -> EmpiricalMeasure:
    """Move every point one random step, each with its own independent symbol."""
    symbols = sys.sample_word(len(m), rng)
    return EmpiricalMeasure(m.manifold, sys.apply_batch(symbols, m.points))


def stationary_power(matrix, tol: float = 1e-10, max_iter: int = 1_000_000, block: int = 64, partition=None) -> UlamHistogram:
    """Left fixed vector of a row-stochastic matrix by restarted Cesaro averaging.

    Starting from the uniform vector, each round replaces ``v`` by the mean of
    ``v, vM, ..., vM^(block-1)``; rounds repeat until two successive averages
    differ by at most ``tol`` in L1. Averaging over a block kills the periodic
    part of the spectrum, so permutation-like matrices converge as well.
    """
    M = np.asarray(matrix, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or np.any(np.abs(M.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("matrix must be square and row-stochastic")
    prev = np.full(n, 1.0 / n)
    used = 0
    while used < max_iter:
        v = prev
        acc = np.zeros(n)
        for _ in range(block):
            acc += v
            v = v @ M
        used += block
        avg = acc / acc.sum()
        if np.abs(avg - prev).sum() <= tol:
            return UlamHistogram(partition, np.maximum(avg, 0.0) / np.maximum(avg, 0.0).sum())
        prev = avg
    raise ConvergenceError(f"no Cesaro fixed point within {max_iter} iterations (tol {tol})")


def stationary_mc(sys: SystemSpec, n_burn: int, n_keep: int, rng, init: InitialLaw | None = None) -> EmpiricalMeasure:
    """Sample the stationary measure along one long random orbit."""
    if n_keep < 1:
        raise ValueError("n_keep must be >= 1")
    g = rngmod.as_generator(rng)
    law = init if init is not None else InitialLaw("uniform")
    x0 = law.sample(sys.manifold, g)
    w = sys.sample_word(n_burn + n_keep - 1, g)
    traj = trajectory(sys, w, x0)
    return EmpiricalMeasure(sys.manifold, traj[n_burn:])


def wasserstein1_circle(a, b) -> float:
    """Exact W1 between two point clouds on the circle.

    With ``D = F_a - F_b`` the difference of the cumulative distribution
    functions, W1 is the minimum over ``t`` of the integral of ``|D - t|``;
    the minimizer is a weighted median of ``D``.
    """
    a = np.sort(wrap(np.asarray(a, dtype=float)))
    b = np.sort(wrap(np.asarray(b, dtype=float)))
    grid = np.unique(np.concatenate([[0.0], a, b, [1.0]]))
    left = grid[:-1]
    widths = np.diff(grid)
    d = np.searchsorted(a, left, side="right") / len(a) - np.searchsorted(b, left, side="right") / len(b)
    order = np.argsort(d, kind="stable")
    cum = np.cumsum(widths[order])
    t = d[order][np.searchsorted(cum, 0.5 * cum[-1])]
    return float(np.sum(widths * np.abs(d - t)))


def tv_distance(a: UlamHistogram, b: UlamHistogram) -> float:
    if a.partition != b.partition:
        raise ValueError("total variation needs identical partitions")
    return 0.5 * float(np.abs(a.mass - b.mass).sum())


def measure_distance(a, b, kind: str = "wasserstein1_circle") -> float:
    """``wasserstein1_circle`` for circle point clouds, ``tv_histogram`` for histograms."""
    if kind == "wasserstein1_circle":
        pa = a.points if isinstance(a, EmpiricalMeasure) else a
        pb = b.points if isinstance(b, EmpiricalMeasure) else b
        for m in (a, b):
            if isinstance(m, EmpiricalMeasure) and m.manifold != CIRCLE:
                raise ValueError("wasserstein1_circle is only defined on the circle")
        return wasserstein1_circle(pa, pb)
    if kind == "tv_histogram":
        return tv_distance(a, b)
    raise ValueError(f"unknown distance kind {kind!r}")


def support_coverage(h: UlamHistogram, floor: float) -> float:
    """Fraction of cells whose mass exceeds ``floor`` times the uniform cell mass."""
    if not 0.0 <= floor < 1.0:
        raise ValueError("floor must lie in [0, 1)")
    return float(np.mean(h.mass > floor / len(h.mass)))
