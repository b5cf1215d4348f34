"""Confidence field, structural data term and fill priority."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NEIGHBOURS_8, InpaintMask, PatchSpec, RasterImage

# ring of the 3x3 window walked clockwise from the top-left corner
_RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
# axes through the centre: 0, 45, 90 and 135 degrees
_AXES = ((0, 1), (-1, 1), (-1, 0), (-1, -1))


class ConfidenceField:
    """Per-pixel trustability in ``[0, 1]``: 1 outside the region, 0 inside."""

    def __init__(self, values):
        values = np.array(values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ValueError("confidence field must be two-dimensional")
        self.values = values

    @classmethod
    def initial(cls, mask: InpaintMask) -> "ConfidenceField":
        return cls(np.where(mask.omega, 0.0, 1.0))

    def __getitem__(self, pixel):
        return self.values[pixel]

    def copy(self) -> "ConfidenceField":
        return ConfidenceField(self.values)


@dataclass(frozen=True)
class PriorityRecord:
    pixel: tuple
    c_patch: float
    d_m: float
    e_t_best: float | None
    p_star: float

    @property
    def deferred(self) -> bool:
        return self.p_star == -math.inf


def patch_confidence(conf: ConfidenceField, pixel, spec: PatchSpec) -> float:
    """Mean confidence over the full window; cells off the image count as 0."""
    L = spec.half_width
    i, j = pixel
    M, N = conf.values.shape
    window = conf.values[max(i - L, 0):min(i + L + 1, M), max(j - L, 0):min(j + L + 1, N)]
    return float(window.sum()) / spec.size


def data_term(img, mask: InpaintMask, pixel) -> float:
    """Largest first-order variation visible around a pixel of unknown value.

    Two kinds of evidence are combined: central differences across the pixel
    on each of the four axes whose two opposite neighbours are available,
    halved to a per-step variation, and the first differences between
    consecutive available cells of the surrounding 3x3 ring.  Returns 0 when
    neither is computable.
    """
    plane = img.data if isinstance(img, RasterImage) else np.asarray(img)
    avail = mask.available
    M, N = plane.shape
    i, j = pixel

    def value(di, dj):
        r, c = i + di, j + dj
        if 0 <= r < M and 0 <= c < N and avail[r, c] and (di, dj) != (0, 0):
            return int(plane[r, c])
        return None

    best = 0.0
    for di, dj in _AXES:
        fwd, back = value(di, dj), value(-di, -dj)
        if fwd is not None and back is not None:
            best = max(best, abs(fwd - back) / 2)
    ring = [value(di, dj) for di, dj in _RING]
    for a, b in zip(ring, ring[1:] + ring[:1]):
        if a is not None and b is not None:
            best = max(best, float(abs(a - b)))
    return best


def priority_star(conf: ConfidenceField, img, mask: InpaintMask, pixel, e_t_best, spec: PatchSpec,
                  invert_energy: bool = False, bit_depth: int = 8) -> PriorityRecord:
    """``(C + C/alpha * D_M) * C * E_T``; ``e_t_best=None`` marks a deferred pixel.

    With ``invert_energy`` the energy factor becomes ``1 - e_t/2`` so that
    well-matched pixels come first.
    """
    c = patch_confidence(conf, pixel, spec)
    d_m = data_term(img, mask, pixel)
    if e_t_best is None:
        return PriorityRecord(tuple(pixel), c, d_m, None, -math.inf)
    alpha = (1 << bit_depth) - 1
    energy = 1.0 - e_t_best / 2.0 if invert_energy else e_t_best
    p_star = (c + (c / alpha) * d_m) * (c * energy)
    return PriorityRecord(tuple(pixel), c, d_m, e_t_best, p_star)


def propagate_confidence(conf: ConfidenceField, mask: InpaintMask, pixel, c_patch: float,
                         e_t_norm: float, update_known: bool = True) -> ConfidenceField:
    """Spread the outcome of a commit to the 8 bordering pixels, in place.

    The committed pixel takes ``c_patch * (1 - e_t_norm)``.  Neighbours in the
    region are lifted by an eighth of that; Known neighbours are damped by
    ``1 - e_t_norm / 8``.  ``update_known=False`` leaves Known pixels at
    their current value.
    """
    if not 0.0 <= e_t_norm <= 1.0:
        raise ValueError("normalised energy must lie in [0, 1]")
    values = conf.values
    M, N = values.shape
    i, j = pixel
    c_new = min(1.0, max(0.0, c_patch * (1.0 - e_t_norm)))
    values[i, j] = c_new
    omega = mask.omega
    for di, dj in NEIGHBOURS_8:
        r, c = i + di, j + dj
        if not (0 <= r < M and 0 <= c < N):
            continue
        if omega[r, c]:
            values[r, c] = min(1.0, values[r, c] + c_new / 8.0)
        elif update_known:
            values[r, c] = max(0.0, values[r, c] * (1.0 - e_t_norm / 8.0))
    return conf
