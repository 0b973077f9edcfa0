"""Bernoulli driving: symbol words, the generalized Baker map and itinerary encodings.

Symbol ``i`` owns the strip ``I_i = [l_i, l_i + p_i)`` of the unit interval,
with ``l_i = p_0 + ... + p_{i-1}``. The Baker map stretches each vertical strip
to the full width and stacks it at height ``l_i``:

    (y, z) -> ((y - l_i) / p_i, p_i z + l_i)

Futures are stored oldest symbol first. Pasts for :func:`encode_full` are
stored most recent first, so ``past[0]`` is the symbol at time -1.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

_BELOW_ONE = np.nextafter(1.0, 0.0)


class BakerState(NamedTuple):
    """Point of the unit square; fields may be scalars or equal-length arrays."""

    y: float | np.ndarray
    z: float | np.ndarray


class ProbabilityVector:
    """Symbol probabilities ``p_i > 0`` summing to one, with strip left ends ``l_i``."""

    def __init__(self, p):
        p = np.asarray(p, dtype=float).copy()
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("probability vector must be a nonempty 1-d sequence")
        if np.any(~(p > 0)):
            raise ValueError(f"probabilities must be positive, got {p.tolist()}")
        total = float(p.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total:.12g}")
        p.setflags(write=False)
        self.p = p
        self.left = np.concatenate([[0.0], np.cumsum(p)[:-1]])
        self.left.setflags(write=False)

    @property
    def k(self) -> int:
        return len(self.p)

    def __len__(self):
        return len(self.p)

    def __eq__(self, other):
        return isinstance(other, ProbabilityVector) and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(self.p.tobytes())

    def __repr__(self):
        return f"ProbabilityVector({self.p.tolist()})"

    def tolist(self) -> list[float]:
        return self.p.tolist()


def as_probs(p) -> ProbabilityVector:
    return p if isinstance(p, ProbabilityVector) else ProbabilityVector(p)


def check_word(w, k: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.int64).reshape(-1)
    if np.any((w < 0) | (w >= k)):
        raise ValueError(f"word contains symbols outside 0..{k - 1}")
    return w


def sample_word(p, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. symbols with law ``p``."""
    p = as_probs(p)
    if n < 0:
        raise ValueError("word length must be >= 0")
    if p.k == 1:
        return np.zeros(n, dtype=np.int64)
    return rng.choice(p.k, size=n, p=p.p).astype(np.int64)


def strip_index(y, p):
    """Index ``i`` with ``y`` in ``[l_i, l_i + p_i)``; vectorized."""
    p = as_probs(p)
    i = np.searchsorted(p.left, y, side="right") - 1
    return np.clip(i, 0, p.k - 1)


def _below_one(a):
    return np.minimum(a, _BELOW_ONE)


def baker_forward(s, p) -> BakerState:
    p = as_probs(p)
    y, z = s
    i = strip_index(y, p)
    pi, li = p.p[i], p.left[i]
    return BakerState(_below_one((y - li) / pi), _below_one(pi * z + li))


def baker_backward(s, p) -> BakerState:
    p = as_probs(p)
    y, z = s
    i = strip_index(z, p)
    pi, li = p.p[i], p.left[i]
    return BakerState(_below_one(pi * y + li), _below_one((z - li) / pi))


def encode_plus(w, p) -> tuple[float, float]:
    """Truncated itinerary sum and its tail bound.

    Returns ``y = sum_i l_{w(i)} prod_{j<i} p_{w(j)}`` and
    ``err = prod_j p_{w(j)}``; the infinite-word value lies in ``[y, y + err]``.
    """
    p = as_probs(p)
    w = check_word(w, p.k)
    if len(w) == 0:
        raise ValueError("word must be nonempty")
    scale = np.concatenate([[1.0], np.cumprod(p.p[w])])
    return float(np.dot(p.left[w], scale[:-1])), float(scale[-1])


def encode_full(past, future, p) -> BakerState:
    """Point ``(y, z)`` of the unit square coding a two-sided word."""
    y, _ = encode_plus(future, p)
    z, _ = encode_plus(past, p)
    return BakerState(y, z)


def semiconjugacy_residual(w, p) -> float:
    """``|B_+(h_+(w)) - h_+(sigma w)|`` with both sides truncated consistently.

    For a word of length n the truncated sums satisfy the conjugacy exactly, so
    the residual is pure rounding; the infinite-word values differ from the
    truncated ones by at most the tail bound of :func:`encode_plus`.
    """
    p = as_probs(p)
    w = check_word(w, p.k)
    if len(w) < 2:
        raise ValueError("word must have length >= 2")
    y, _ = encode_plus(w, p)
    yb = baker_forward((y, 0.0), p).y
    ys, _ = encode_plus(w[1:], p)
    return abs(float(yb) - ys)


def full_semiconjugacy_residual(past, future, p) -> float:
    """Max coordinate error of ``B(h(w)) = h(sigma w)`` for a two-sided word."""
    p = as_probs(p)
    past = check_word(past, p.k)
    future = check_word(future, p.k)
    if len(future) < 2 or len(past) < 1:
        raise ValueError("need a past of length >= 1 and a future of length >= 2")
    yb, zb = baker_forward(encode_full(past, future, p), p)
    ys, zs = encode_full(np.concatenate([future[:1], past]), future[1:], p)
    return max(abs(float(yb) - ys), abs(float(zb) - zs))
