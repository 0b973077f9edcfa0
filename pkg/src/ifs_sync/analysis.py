"""Experiments on random dynamical systems of circle and sphere diffeomorphisms.

Each experiment returns a small report dataclass with a ``to_dict`` suitable for
JSON emission. Randomness enters only through the ``rng`` argument; work that
fans out over pairs or draws uses substreams keyed by task index so results do
not depend on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist, squareform

from . import rng as rngmod
from ._parallel import ordered_map
from .cocycle import FiniteIFS, RandomFamily, SystemSpec, pullback_compose, qr_cocycle
from .diffeos import Diffeo, NoiseSpec
from .geometry import CIRCLE, SPHERE, batch_distance, normalize, sphere_distance, sphere_frame, wrap
from .measures import (
    EmpiricalMeasure,
    InitialLaw,
    make_partition,
    stationary_mc,
    tv_distance,
    uniform_points,
    wasserstein1_circle,
)

SYNC_CHUNK = 64
DEFAULT_RADIUS = {CIRCLE: 1e-4, SPHERE: 1e-3}


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------- Lyapunov


@dataclass
class LyapunovEstimate:
    exponents: np.ndarray
    stderr: np.ndarray
    steps: int
    burn: int
    blocks: int

    @property
    def top(self) -> float:
        return float(self.exponents[0])

    def to_dict(self):
        return {
            "exponents": [float(e) for e in self.exponents],
            "stderr": [float(e) for e in self.stderr],
            "steps": self.steps,
            "burn": self.burn,
            "blocks": self.blocks,
        }


def _start_point(sys, x0, g):
    return x0 if x0 is not None else uniform_points(sys.manifold, 1, g)[0]


def lyapunov_spectrum(sys: SystemSpec, n: int, burn: int, blocks: int, rng, x0=None) -> LyapunovEstimate:
    """All fiber exponents from one random orbit, with block-mean standard errors."""
    if not n >= blocks >= 2:
        raise ValueError(f"need n >= blocks >= 2, got n={n}, blocks={blocks}")
    g = rngmod.as_generator(rng)
    x = _start_point(sys, x0, g)
    w = sys.sample_word(burn + n, g)
    acc = qr_cocycle(sys, w[:burn], x)
    acc = acc.extend(sys, w[burn:], keep_steps=True)
    logs = acc.step_logs
    means = logs.mean(axis=0)
    block_means = np.array([b.mean(axis=0) for b in np.array_split(logs, blocks)])
    se = block_means.std(axis=0, ddof=1) / math.sqrt(blocks)
    order = np.argsort(-means, kind="stable")
    return LyapunovEstimate(means[order], se[order], n, burn, blocks)


def lyapunov_top(sys: SystemSpec, n: int, burn: int, blocks: int, rng, x0=None) -> LyapunovEstimate:
    est = lyapunov_spectrum(sys, n, burn, blocks, rng, x0)
    return LyapunovEstimate(est.exponents[:1], est.stderr[:1], n, burn, blocks)


def _log_norms(m: Diffeo, xs) -> np.ndarray:
    if m.manifold == CIRCLE:
        return np.log(np.abs(m.jacobian(xs)))
    # operator norm of the derivative restricted to the tangent plane
    restricted = m.jacobian(xs) @ np.swapaxes(sphere_frame(xs), -1, -2)
    return np.log(np.linalg.norm(restricted, ord=2, axis=(-2, -1)))


def lyapunov_upper_bound(sys: SystemSpec, m: EmpiricalMeasure) -> float:
    """``sum_i p_i * mean over m of ln ||Df_i||``, an upper bound for the top exponent.

    Post-rotation does not change the norm, so a random family reduces to its base map.
    """
    if isinstance(sys, RandomFamily):
        return float(np.mean(_log_norms(sys.base, m.points)))
    return float(sum(p * np.mean(_log_norms(f, m.points)) for f, p in zip(sys.maps, sys.p.p)))


# ---------------------------------------------------------------- pull-back atoms


@dataclass
class PullbackReport:
    depth: int
    atoms: int
    centers: np.ndarray
    weights: np.ndarray
    sizes: np.ndarray
    max_diameter: float
    min_separation: float
    spread: float
    cluster_radius: float

    @property
    def atomic(self) -> bool:
        """Clusters are tight and every cluster actually merged several points."""
        return bool(self.max_diameter <= 10 * self.cluster_radius and np.all(self.sizes >= 2))

    def to_dict(self):
        return {
            "depth": self.depth,
            "atoms": self.atoms,
            "centers": np.asarray(self.centers, dtype=float).tolist(),
            "weights": [float(w) for w in self.weights],
            "sizes": [int(s) for s in self.sizes],
            "max_diameter": float(self.max_diameter),
            "min_separation": _json_float(self.min_separation),
            "spread": float(self.spread),
            "cluster_radius": self.cluster_radius,
            "atomic": self.atomic,
        }


def _circle_clusters(xs, radius):
    order = np.argsort(xs, kind="stable")
    pts = xs[order]
    n = len(pts)
    gaps = np.diff(np.concatenate([pts, [pts[0] + 1.0]]))  # gaps[i] follows pts[i]
    cuts = np.flatnonzero(gaps > radius)
    if len(cuts) == 0:
        return [pts], math.inf
    groups = []
    for j, c in enumerate(cuts):
        start = (c + 1) % n
        stop = cuts[(j + 1) % len(cuts)]
        idx = np.arange(start, stop + 1 if stop >= start else stop + 1 + n) % n
        groups.append(pts[idx])
    # a single cut leaves one cluster that does not close around the circle
    return groups, float(gaps[cuts].min()) if len(cuts) > 1 else math.inf


def _cluster(manifold, xs, radius):
    """Single-linkage clusters: lists of member arrays, plus the min inter-cluster distance."""
    if manifold == CIRCLE:
        return _circle_clusters(xs, radius)
    if len(xs) == 1:
        return [xs], math.inf
    dist = pdist(xs, lambda u, v: float(sphere_distance(u, v)))
    labels = fcluster(linkage(dist, method="single"), t=radius, criterion="distance")
    groups = [xs[labels == lab] for lab in np.unique(labels)]
    if len(groups) == 1:
        return groups, math.inf
    full = squareform(dist)
    cross = full[labels[:, None] != labels[None, :]]
    return groups, float(cross.min())


def _center_and_diameter(manifold, pts):
    if manifold == CIRCLE:
        off = np.mod(pts - pts[0] + 0.5, 1.0) - 0.5
        extent = off.max() - off.min()
        return wrap(pts[0] + off.mean()), min(extent, 0.5)
    center = normalize(pts.mean(axis=0))
    if len(pts) == 1:
        return center, 0.0
    return center, _sphere_diameter(pts)


def _sphere_diameter(pts):
    return float(max(sphere_distance(p, pts).max() for p in pts))


def _spread(manifold, xs):
    if manifold == CIRCLE:
        pts = np.sort(xs)
        gaps = np.diff(np.concatenate([pts, [pts[0] + 1.0]]))
        return float(min(1.0 - gaps.max(), 0.5))
    return _sphere_diameter(xs)


def cluster_report(manifold: str, xs, radius: float, depth: int = 0) -> PullbackReport:
    groups, sep = _cluster(manifold, xs, radius)
    cd = [_center_and_diameter(manifold, g) for g in groups]
    centers = np.array([c for c, _ in cd])
    order = np.lexsort(centers.T[::-1]) if manifold == SPHERE else np.argsort(centers, kind="stable")
    sizes = np.array([len(groups[i]) for i in order])
    return PullbackReport(
        depth=depth,
        atoms=len(groups),
        centers=centers[order],
        weights=sizes / sizes.sum(),
        sizes=sizes,
        max_diameter=max(d for _, d in cd),
        min_separation=sep,
        spread=_spread(manifold, xs),
        cluster_radius=radius,
    )


def pullback_atoms(sys: SystemSpec, m: EmpiricalMeasure, n: int, cluster_radius: float | None, rng) -> PullbackReport:
    """Push a stationary sample through a random past block and cluster the image.

    When the top exponent is negative the image concentrates on finitely many
    atoms of equal weight; the report gives their count, centers and weights.
    """
    radius = DEFAULT_RADIUS[sys.manifold] if cluster_radius is None else cluster_radius
    if not radius > 0:
        raise ValueError("cluster_radius must be > 0")
    if len(m) < 20:
        raise ValueError("pull-back ensemble needs at least 20 points")
    g = rngmod.as_generator(rng)
    w = sys.sample_word(n, g)
    images = pullback_compose(sys, w, m.points)
    return cluster_report(sys.manifold, images, radius, depth=n)


def pullback_diameters(sys, m, n, draws, cluster_radius, rng, threads=None) -> np.ndarray:
    """Max intra-cluster diameter for ``draws`` independent past words of length ``n``."""
    seed = rngmod.child_seed(rngmod.as_generator(rng))
    return np.array(
        ordered_map(
            lambda i: pullback_atoms(sys, m, n, cluster_radius, rngmod.stream(seed, i)).max_diameter,
            range(draws),
            threads,
        )
    )


# ---------------------------------------------------------------- synchronization


@dataclass
class SyncReport:
    pairs: int
    steps: int
    tol: float
    synced_fraction: float
    median_first_sync: float | None
    decay_rate: float | None
    pooled_rate: float | None
    rate_fits: int
    traces: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "pairs": self.pairs,
            "steps": self.steps,
            "tol": self.tol,
            "synced_fraction": self.synced_fraction,
            "median_first_sync": self.median_first_sync,
            "decay_rate": self.decay_rate,
            "pooled_rate": self.pooled_rate,
            "rate_fits": self.rate_fits,
        }


def _decay_segment(trace, tol):
    """Pre-floor segment: from the first step below ``d0 / 10`` to the first step at or below ``10 tol``."""
    below = np.flatnonzero(trace < trace[0] / 10)
    floor = np.flatnonzero(trace <= 10 * tol)
    if len(below) == 0 or len(floor) == 0 or floor[0] - below[0] < 2:
        return None
    return np.arange(below[0], floor[0] + 1)


def sync_experiment(sys: SystemSpec, pairs: int, N: int, tol: float, rng, initial=None, threads=None) -> SyncReport:
    """Drive independent pairs with one shared word each and record their distance.

    ``initial`` optionally fixes the starting pairs as an array of shape
    ``(pairs, 2)`` (circle) or ``(pairs, 2, 3)`` (sphere); otherwise both
    points are uniform.
    """
    if pairs < 1 or N < 2:
        raise ValueError("need pairs >= 1 and N >= 2")
    seed = rngmod.child_seed(rngmod.as_generator(rng))

    def run(chunk):
        start, stop = chunk
        xs, ys, words = [], [], []
        for i in range(start, stop):
            g = rngmod.stream(seed, i)
            if initial is None:
                x, y = uniform_points(sys.manifold, 2, g)
            else:
                x, y = initial[i]
            xs.append(x)
            ys.append(y)
            words.append(sys.sample_word(N, g))
        xs, ys, words = np.array(xs, dtype=float), np.array(ys, dtype=float), np.stack(words)
        traces = np.empty((stop - start, N + 1))
        traces[:, 0] = batch_distance(sys.manifold, xs, ys)
        for j in range(N):
            xs = sys.apply_batch(words[:, j], xs)
            ys = sys.apply_batch(words[:, j], ys)
            traces[:, j + 1] = batch_distance(sys.manifold, xs, ys)
        return traces

    chunks = [(s, min(s + SYNC_CHUNK, pairs)) for s in range(0, pairs, SYNC_CHUNK)]
    traces = np.vstack(ordered_map(run, chunks, threads))
    synced = traces[:, -1] < tol
    first = [int(np.argmax(t < tol)) for t in traces[synced]]
    slopes, drop, span = [], 0.0, 0
    for t in traces:
        seg = _decay_segment(t, tol)
        if seg is not None:
            slopes.append(float(np.polyfit(seg, np.log(t[seg]), 1)[0]))
            drop += math.log(t[seg[-1]] / t[seg[0]])
            span += len(seg) - 1
    return SyncReport(
        pairs=pairs,
        steps=N,
        tol=tol,
        synced_fraction=float(synced.mean()),
        median_first_sync=float(np.median(first)) if first else None,
        decay_rate=float(np.median(slopes)) if slopes else None,
        pooled_rate=drop / span if span else None,
        rate_fits=len(slopes),
        traces=traces,
    )


# ---------------------------------------------------------------- minimality


@dataclass
class MinimalityReport:
    resolution: float
    budget: int
    covered_fraction: float
    steps_to_full: int | None
    rounds_run: int

    def to_dict(self):
        return asdict(self)


def reachability_cover(sys: FiniteIFS, x0: float, s: float, T: int) -> MinimalityReport:
    """Cell-resolution reachability of the orbit of ``x0`` under all branches.

    Each round applies every map to the current frontier and keeps one point
    per cell, so the frontier never exceeds the cell count. A covered cell is
    hit by an actual branch point; full coverage certifies a dense branch at
    resolution ``s``.
    """
    if not isinstance(sys, FiniteIFS) or sys.manifold != CIRCLE:
        raise ValueError("reachability_cover needs a finite IFS on the circle")
    N = int(round(1.0 / s))
    if N < 2 or N > 10**7:
        raise ValueError(f"resolution s={s} out of range")
    if not 1 <= T <= 10**7:
        raise ValueError(f"step budget T={T} out of range")
    covered = np.zeros(N, dtype=bool)
    frontier = np.array([wrap(float(x0))])
    covered[min(int(frontier[0] * N), N - 1)] = True
    full_at = 1 if N == 1 else None
    rounds = 0
    for r in range(1, T + 1):
        rounds = r
        images = np.concatenate([m.apply(frontier) for m in sys.maps])
        cells = np.minimum((images * N).astype(np.int64), N - 1)
        uniq, first = np.unique(cells, return_index=True)
        frontier = images[np.sort(first)]
        covered[uniq] = True
        if covered.all():
            full_at = r
            break
    return MinimalityReport(1.0 / N, T, float(covered.mean()), full_at, rounds)


def _arc_pieces(start, length):
    """Pieces of the arc [start, start + length] inside [0, 1) coordinates."""
    if length >= 1.0:
        return [(0.0, 1.0)]
    s = start % 1.0
    if s + length <= 1.0:
        return [(s, s + length)]
    return [(s, 1.0), (0.0, s + length - 1.0)]


def covering_check(f: Diffeo, g: Diffeo, B, guard: float = 1e-10) -> bool:
    """True iff the arc ``B`` lies inside ``f(B)`` union ``f(g(B))``.

    ``B = (a, b)`` is a lift interval with ``0 < b - a < 1``; images of monotone
    maps are decided from endpoint images; ``B`` is shrunk by ``guard`` at both
    ends so that exact endpoint coincidences count as covered.
    """
    a, b = float(B[0]), float(B[1])
    if not 0.0 < b - a < 1.0:
        raise ValueError(f"arc must satisfy 0 < b - a < 1, got {B}")
    if f.manifold != CIRCLE or g.manifold != CIRCLE:
        raise ValueError("covering_check works on the circle")
    lo = a + guard
    target = (b - a) - 2 * guard
    pieces = []
    for lift in (f.lift, lambda x: f.lift(g.lift(x))):
        fa, fb = float(lift(a)), float(lift(b))
        # coordinates relative to the shrunk left end of B
        pieces += _arc_pieces(fa - lo, fb - fa)
    reach = 0.0
    for s0, s1 in sorted(pieces):
        if s0 > reach:
            break
        reach = max(reach, s1)
    return reach >= target


def isolating_check(base: Diffeo, noise: NoiseSpec, U, n_samples: int, rng, margin: float = 1e-9) -> bool:
    """True iff ``f_a(U)`` lies inside ``U`` with ``margin`` to spare for every drawn ``a``."""
    a, b = float(U[0]), float(U[1])
    if base.manifold != CIRCLE:
        raise ValueError("isolating_check works on the circle")
    if not 0.0 < b - a < 1.0:
        raise ValueError(f"arc must satisfy 0 < b - a < 1, got {U}")
    g = rngmod.as_generator(rng)
    params = np.concatenate([[0.0], noise.sample(n_samples, g, CIRCLE)]) if noise.delta > 0 else np.zeros(1)
    fa = float(base.lift(a))
    fb = float(base.lift(b))
    length = fb - fa
    if length > (b - a) - 2 * margin:
        return False
    offsets = np.mod(fa + params - a, 1.0)
    return bool(np.all((offsets >= margin) & (offsets + length <= (b - a) - margin)))


# ---------------------------------------------------------------- uniqueness


def uniqueness_probe(sys: SystemSpec, inits, n_burn: int, n_keep: int, rng, resolution=8, threads=None) -> float:
    """Largest pairwise distance between stationary samples started from different laws.

    Circle: W1 between point clouds. Sphere: total variation between histograms.
    """
    inits = [i if isinstance(i, InitialLaw) else InitialLaw(*i) for i in inits]
    if len(inits) < 2:
        raise ValueError("need at least two initial laws")
    seed = rngmod.child_seed(rngmod.as_generator(rng))
    samples = ordered_map(
        lambda j: stationary_mc(sys, n_burn, n_keep, rngmod.stream(seed, j), inits[j]),
        range(len(inits)),
        threads,
    )
    if sys.manifold == SPHERE:
        part = make_partition(SPHERE, resolution)
        hists = [m.histogram(part) for m in samples]
        dist = lambda i, j: tv_distance(hists[i], hists[j])
    else:
        dist = lambda i, j: wasserstein1_circle(samples[i].points, samples[j].points)
    return max(dist(i, j) for i in range(len(samples)) for j in range(i + 1, len(samples)))
