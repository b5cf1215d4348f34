"""Directional finite differences on a pixel grid with validity masking.

An order-k difference along an orientation ``theta`` from the ring of
Chebyshev radius k is the k-fold composition of first differences taken with
step ``theta / k``.  Lattice steps (axes and diagonals) are exact integer
arithmetic; any other step lands between pixels and is sampled bilinearly.
A difference is *absent* (``None``) whenever one of the pixels it reads lies
outside the image or is not available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 3


@dataclass(frozen=True)
class DirectionSet:
    """The ``8k`` ring offsets of order ``k``, counter-clockwise from 0 degrees."""

    order: int
    directions: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)


def _angle(d):
    di, dj = d
    # rows grow downwards, so "up" is -di
    return math.atan2(-di, dj) % (2 * math.pi)


@lru_cache(maxsize=None)
def direction_set(k: int) -> DirectionSet:
    if k < 1:
        raise ValueError("finite-difference order must be >= 1")
    ring = [(a, b) for a in range(-k, k + 1) for b in range(-k, k + 1) if max(abs(a), abs(b)) == k]
    ring.sort(key=_angle)
    return DirectionSet(k, tuple(ring))


def direction_count(k: int) -> int:
    return 8 * k


def ring_normalizer(k: int) -> int:
    """R_k = #dirs * (#dirs - 1), i.e. 8k(8k - 1)."""
    n = direction_count(k)
    return n * (n - 1)


def order_weight(k: int) -> float:
    """beta_k = 2^-k."""
    return 2.0 ** -k


def range_divisor(k: int, bit_depth: int = 8) -> int:
    """Largest possible gap between two order-k differences: 2^k (2^W - 1)."""
    return (1 << k) * ((1 << bit_depth) - 1)


def is_lattice(theta, k: int) -> bool:
    di, dj = theta
    return di % k == 0 and dj % k == 0


def bilinear_weights(y: float, x: float) -> list[tuple[tuple[int, int], float]]:
    """Pixels and weights of bilinear interpolation at fractional ``(y, x)``.

    Only nonzero weights are returned; they sum to one.
    """
    y0, x0 = math.floor(y), math.floor(x)
    fy, fx = y - y0, x - x0
    out = []
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            w = wy * wx
            if w != 0.0:
                out.append(((y0 + dy, x0 + dx), w))
    return out


@lru_cache(maxsize=None)
def sample_stencil(theta: tuple[int, int], k: int):
    """Relative sample pixels for each of the k+1 points along ``theta``.

    Returns a tuple over ``t = 0..k`` of tuples ``((di, dj), weight)``.
    """
    di, dj = theta
    points = []
    for t in range(k + 1):
        y, x = t * di / k, t * dj / k
        if t * di % k == 0 and t * dj % k == 0:
            points.append((((t * di // k, t * dj // k), 1.0),))
        else:
            points.append(tuple(bilinear_weights(y, x)))
    return tuple(points)


def off_axis_samples(p, theta, k: int):
    """Sample points from ``p`` to ``p + theta`` with their interpolation weights.

    Returns ``k + 1`` entries ``((y, x), [((row, col), weight), ...])``.
    """
    pi, pj = p
    out = []
    for t, stencil in enumerate(sample_stencil(tuple(theta), k)):
        pos = (pi + t * theta[0] / k, pj + t * theta[1] / k)
        out.append((pos, [((pi + a, pj + b), w) for (a, b), w in stencil]))
    return out


def _sample_values(img, avail, p, theta, k):
    M, N = img.shape
    pi, pj = p
    vals = []
    for stencil in sample_stencil(tuple(theta), k):
        acc = 0
        for (a, b), w in stencil:
            r, c = pi + a, pj + b
            if r < 0 or c < 0 or r >= M or c >= N:
                return None
            if avail is not None and not avail[r, c]:
                return None
            if w == 1.0:
                acc += int(img[r, c])
            else:
                acc += w * float(img[r, c])
        vals.append(acc)
    return vals


def delta(img, avail, p, theta, k: int):
    """Order-k forward difference at ``p`` along ``theta`` or ``None`` if absent.

    ``img`` is a 2-D array, ``avail`` a boolean grid of usable pixels (or
    ``None`` to accept every in-image pixel).  ``theta`` is taken from the
    order-k ring; it is applied in ``k`` equal steps.
    """
    if k < 1:
        raise ValueError("order must be >= 1")
    vals = _sample_values(img, avail, p, theta, k)
    if vals is None:
        return None
    for _ in range(k):
        vals = [b - a for a, b in zip(vals, vals[1:])]
    return vals[0]


def expand_binomial(img, avail, p, step, k: int):
    """Order-k difference from pointwise differences with Pascal coefficients.

    Uses ``D(k) = [I(p + k s) - I(p)] - sum_{j<k} C(k, j) D(j)`` on the lattice
    step ``s``.  Integer inputs give integer outputs.
    """
    si, sj = step
    if max(abs(si), abs(sj)) != 1:
        raise ValueError("expand_binomial works on unit lattice steps")
    M, N = img.shape
    pi, pj = p
    samples = []
    for t in range(k + 1):
        r, c = pi + t * si, pj + t * sj
        if r < 0 or c < 0 or r >= M or c >= N:
            return None
        if avail is not None and not avail[r, c]:
            return None
        samples.append(int(img[r, c]))
    orders = [None]
    for m in range(1, k + 1):
        value = samples[m] - samples[0]
        for j in range(1, m):
            value -= math.comb(m, j) * orders[j]
        orders.append(value)
    return orders[k]


def pascal_coefficients(k: int) -> list[int]:
    """``a_{k,j}`` for ``j = 1..k-1``."""
    return [math.comb(k, j) for j in range(1, k)]


def telescope_check(img, r: int, i: int, k: int) -> bool:
    """``I(r,i) + sum of first differences up to i+k-1 == I(r,i+k)``."""
    row = np.asarray(img)[r]
    if i < 0 or k < 1 or i + k >= row.shape[0]:
        raise IndexError(f"samples {i}..{i + k} fall outside a row of length {row.shape[0]}")
    total = int(row[i])
    for t in range(k):
        total += int(row[i + t + 1]) - int(row[i + t])
    return total == int(row[i + k])


def _shift(arr, di, dj, fill):
    """out[r, c] = arr[r + di, c + dj], ``fill`` outside."""
    M, N = arr.shape
    out = np.full(arr.shape, fill, dtype=arr.dtype)
    r0, r1 = max(0, -di), min(M, M - di)
    c0, c1 = max(0, -dj), min(N, N - dj)
    if r0 < r1 and c0 < c1:
        out[r0:r1, c0:c1] = arr[r0 + di:r1 + di, c0 + dj:c1 + dj]
    return out


def difference_map(img, avail, theta, k: int) -> np.ndarray:
    """``delta`` evaluated at every pixel; NaN where the difference is absent."""
    img = np.asarray(img, dtype=np.float64)
    ok = np.ones(img.shape, dtype=bool) if avail is None else np.asarray(avail, dtype=bool)
    result = np.zeros(img.shape)
    valid = np.ones(img.shape, dtype=bool)
    for t, stencil in enumerate(sample_stencil(tuple(theta), k)):
        coef = (-1) ** (k - t) * math.comb(k, t)
        sample = np.zeros(img.shape)
        for (a, b), w in stencil:
            sample += w * _shift(img, a, b, 0.0)
            valid &= _shift(ok, a, b, False)
        result += coef * sample
    result[~valid] = np.nan
    return result
