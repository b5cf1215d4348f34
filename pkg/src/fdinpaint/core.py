"""Image, mask and patch-geometry data model, file I/O and synthetic images.

Coordinates are ``(row, col)`` and 0-based throughout the API.  Printed
documentation that follows the 1-based matrix convention shifts every index
by one; nothing else changes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

Pixel = tuple[int, int]

# 8-neighbourhood, raster order
NEIGHBOURS_8: tuple[Pixel, ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


class ImageFormatError(OSError):
    """Raised when an image file cannot be represented as a RasterImage."""


@dataclass(frozen=True)
class RasterImage:
    """A W-bit image with one or three channels.

    ``data`` has shape ``(M, N)`` for single-channel images and ``(M, N, 3)``
    for RGB.  The array is stored read-only; use :meth:`to_array` for a
    writable copy.
    """

    data: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
            raise ValueError(f"expected an (M, N) or (M, N, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if not 1 <= self.bit_depth <= 16:
            raise ValueError(f"unsupported bit depth {self.bit_depth}")
        maxval = (1 << self.bit_depth) - 1
        if arr.size and (arr.min() < 0 or arr.max() > maxval):
            raise ValueError(f"samples must lie in [0, {maxval}]")
        dtype = np.uint8 if self.bit_depth <= 8 else np.uint16
        arr = np.array(arr, dtype=dtype, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    @property
    def maxval(self) -> int:
        return (1 << self.bit_depth) - 1

    def to_array(self) -> np.ndarray:
        return np.array(self.data, copy=True)

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.data, other.data)

    __hash__ = None


class PixelState(enum.IntEnum):
    KNOWN = 0
    MISSING = 1
    FILLED = 2


class InpaintMask:
    """Per-pixel state over the image grid.

    ``MISSING`` and ``FILLED`` pixels together form the region to inpaint.
    A pixel only moves from ``MISSING`` to ``FILLED``; there is no way back.
    """

    def __init__(self, states):
        states = np.array(states, dtype=np.int8, copy=True)
        if states.ndim != 2:
            raise ValueError("mask must be two-dimensional")
        if not np.isin(states, [s.value for s in PixelState]).all():
            raise ValueError("mask contains unknown pixel states")
        self._states = states

    @classmethod
    def from_missing(cls, missing) -> "InpaintMask":
        missing = np.asarray(missing, dtype=bool)
        return cls(np.where(missing, PixelState.MISSING, PixelState.KNOWN))

    @classmethod
    def from_pixels(cls, shape: tuple[int, int], pixels: Iterable[Pixel]) -> "InpaintMask":
        missing = np.zeros(shape, dtype=bool)
        for i, j in pixels:
            missing[i, j] = True
        return cls.from_missing(missing)

    @property
    def shape(self) -> tuple[int, int]:
        return self._states.shape

    @property
    def states(self) -> np.ndarray:
        view = self._states.view()
        view.setflags(write=False)
        return view

    @property
    def omega(self) -> np.ndarray:
        return self._states != PixelState.KNOWN

    @property
    def missing(self) -> np.ndarray:
        return self._states == PixelState.MISSING

    @property
    def known(self) -> np.ndarray:
        return self._states == PixelState.KNOWN

    @property
    def available(self) -> np.ndarray:
        """Pixels whose value may enter an energy term (Known or Filled)."""
        return self._states != PixelState.MISSING

    def state(self, pixel: Pixel) -> PixelState:
        return PixelState(int(self._states[pixel]))

    def is_missing(self, pixel: Pixel) -> bool:
        return self._states[pixel] == PixelState.MISSING

    def count_missing(self) -> int:
        return int(np.count_nonzero(self._states == PixelState.MISSING))

    def count_omega(self) -> int:
        return int(np.count_nonzero(self._states != PixelState.KNOWN))

    def commit(self, pixel: Pixel) -> None:
        if self._states[pixel] != PixelState.MISSING:
            raise ValueError(f"pixel {pixel} is not missing")
        self._states[pixel] = PixelState.FILLED

    def check_image(self, img: RasterImage) -> None:
        if img.shape != self.shape:
            raise ValueError(f"mask shape {self.shape} does not match image shape {img.shape}")

    def copy(self) -> "InpaintMask":
        return InpaintMask(self._states)

    def __repr__(self):
        return (f"InpaintMask(shape={self.shape}, missing={self.count_missing()}, "
                f"omega={self.count_omega()})")


@dataclass(frozen=True)
class PatchSpec:
    """Square neighbourhood of side ``2L + 1`` centred on a pixel."""

    half_width: int

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise ValueError("patch half-width L must be a positive integer")

    @classmethod
    def from_side(cls, side: int) -> "PatchSpec":
        if side % 2 == 0:
            raise ValueError("patch side must be odd")
        if side < 3:
            raise ValueError("patch side must be at least 3")
        return cls((side - 1) // 2)

    @property
    def side(self) -> int:
        return 2 * self.half_width + 1

    @property
    def size(self) -> int:
        return self.side * self.side

    def offsets(self) -> list[Pixel]:
        """All ``(a, b)`` in ``[-L, L]^2`` except the centre, raster order."""
        L = self.half_width
        return [(a, b) for a in range(-L, L + 1) for b in range(-L, L + 1) if (a, b) != (0, 0)]


@dataclass(frozen=True)
class TrainingSet:
    """Candidate patch centres whose extended windows lie in known data.

    ``reach`` is the Chebyshev radius every candidate window must cover:
    ``L`` for the patch plus the maximum finite-difference order.
    """

    centers: np.ndarray
    reach: int
    provenance: str = "image"
    regions: tuple = field(default=())

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.intp).reshape(-1, 2)
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def rows(self) -> np.ndarray:
        return self.centers[:, 0]

    @property
    def cols(self) -> np.ndarray:
        return self.centers[:, 1]


def valid_window_centers(allowed: np.ndarray, reach: int) -> np.ndarray:
    """Centres whose ``(2*reach+1)^2`` window is entirely ``allowed``."""
    allowed = np.asarray(allowed, dtype=bool)
    M, N = allowed.shape
    side = 2 * reach + 1
    if M < side or N < side:
        return np.zeros((0, 2), dtype=np.intp)
    windows = np.lib.stride_tricks.sliding_window_view(allowed, (side, side))
    ok = windows.all(axis=(2, 3))
    rows, cols = np.nonzero(ok)
    return np.stack([rows + reach, cols + reach], axis=1).astype(np.intp)


def build_training_set(mask: InpaintMask, spec: PatchSpec, order: int = 1,
                       rects: Sequence[tuple[int, int, int, int]] | None = None,
                       region: np.ndarray | None = None) -> TrainingSet:
    """Collect candidate centres from known data.

    ``rects`` are ``(x, y, w, h)`` boxes in column/row pixel units and
    ``region`` is a boolean grid; either restricts where candidate windows
    may lie.  With neither, every valid window of the known image is used.
    """
    reach = spec.half_width + max(order, 0)
    allowed = mask.known.copy()
    provenance = "image"
    regions: tuple = ()
    if rects:
        box = np.zeros(mask.shape, dtype=bool)
        for x, y, w, h in rects:
            if w <= 0 or h <= 0:
                raise ValueError(f"training rectangle {x},{y},{w},{h} is empty")
            box[max(y, 0):y + h, max(x, 0):x + w] = True
        allowed &= box
        provenance = "rects"
        regions = tuple(tuple(r) for r in rects)
    if region is not None:
        region = np.asarray(region, dtype=bool)
        if region.shape != mask.shape:
            raise ValueError("training-set mask does not match the image size")
        allowed &= region
        provenance = "mask" if provenance == "image" else provenance + "+mask"
    return TrainingSet(valid_window_centers(allowed, reach), reach, provenance, regions)


def boundary(mask: InpaintMask) -> list[Pixel]:
    """Missing pixels with at least one Known or Filled 8-neighbour, raster order."""
    missing = mask.missing
    avail = np.pad(~missing, 1, constant_values=False)
    M, N = missing.shape
    touch = np.zeros_like(missing)
    for da, db in NEIGHBOURS_8:
        touch |= avail[1 + da:1 + da + M, 1 + db:1 + db + N]
    rows, cols = np.nonzero(missing & touch)
    return list(zip(rows.tolist(), cols.tolist()))


def split_channels(img: RasterImage) -> list[RasterImage]:
    if img.channels == 1:
        return [img]
    return [RasterImage(img.data[:, :, c], img.bit_depth) for c in range(img.channels)]


def merge_channels(planes: Sequence[RasterImage]) -> RasterImage:
    if not planes:
        raise ValueError("no planes to merge")
    if len(planes) == 1:
        return planes[0]
    first = planes[0]
    for p in planes[1:]:
        if p.shape != first.shape:
            raise ValueError(f"cannot merge planes of shapes {first.shape} and {p.shape}")
        if p.bit_depth != first.bit_depth:
            raise ValueError("cannot merge planes of different bit depth")
    if len(planes) != 3:
        raise ValueError("RGB merge needs exactly three planes")
    return RasterImage(np.stack([p.data for p in planes], axis=2), first.bit_depth)


def _image_from_pil(im: Image.Image, path) -> RasterImage:
    fmt = im.format or "unknown"
    if im.mode == "L":
        return RasterImage(np.asarray(im), 8)
    if im.mode == "RGB":
        return RasterImage(np.asarray(im), 8)
    if im.mode in ("I", "I;16", "I;16B", "I;16L"):
        raise ImageFormatError(f"{path}: unsupported bit depth (16-bit {fmt})")
    if im.mode == "P":
        return RasterImage(np.asarray(im.convert("RGB")), 8)
    raise ImageFormatError(f"{path}: unsupported {fmt} image mode {im.mode!r}")


def load_image(path) -> RasterImage:
    """Read an 8-bit PGM or an 8-bit gray / 24-bit RGB PNG."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in ("PPM", "PNG"):
                raise ImageFormatError(f"{path}: unsupported format {im.format}")
            if im.format == "PPM" and im.mode not in ("L", "I", "I;16", "I;16B"):
                raise ImageFormatError(f"{path}: only P5 grayscale PGM is supported")
            im.load()
            return _image_from_pil(im, path)
    except ImageFormatError:
        raise
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise ImageFormatError(f"{path}: cannot read image ({exc})") from exc


def save_image(img: RasterImage, path) -> Path:
    path = Path(path)
    if img.bit_depth != 8:
        raise ImageFormatError("only 8-bit images can be written")
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if img.channels != 1:
            raise ImageFormatError("PGM output needs a single-channel image")
        Image.fromarray(img.data, mode="L").save(path, format="PPM")
    elif suffix == ".png":
        Image.fromarray(img.data, mode="L" if img.channels == 1 else "RGB").save(path, format="PNG")
    else:
        raise ImageFormatError(f"{path}: unsupported output extension {suffix!r}")
    return path


def load_mask(path, shape: tuple[int, int] | None = None) -> InpaintMask:
    """Read a mask image: any nonzero sample marks a missing pixel."""
    img = load_image(path)
    data = img.data if img.channels == 1 else img.data.max(axis=2)
    if shape is not None and data.shape != tuple(shape):
        raise ValueError(f"mask size {data.shape} does not match image size {tuple(shape)}")
    return InpaintMask.from_missing(data != 0)


def mask_image(mask: InpaintMask) -> RasterImage:
    return RasterImage(np.where(mask.omega, 255, 0).astype(np.uint8))


def synthesize(kind: str, size: tuple[int, int], bit_depth: int = 8, **params) -> RasterImage:
    """Deterministic synthetic test images.

    kinds: ``chessboard`` (cell), ``line`` (thickness, angle in degrees),
    ``triangle`` (apex-up filled triangle), ``kanizsa_triangle``,
    ``solid`` (value).
    """
    M, N = size
    if M <= 0 or N <= 0:
        raise ValueError("image dimensions must be positive")
    top = (1 << bit_depth) - 1
    rows, cols = np.mgrid[0:M, 0:N]

    if kind == "chessboard":
        cell = int(params.get("cell", 5))
        if cell <= 0 or M % cell or N % cell:
            raise ValueError(f"cell size {cell} must divide the image size {M}x{N}")
        cells = params.get("cells")
        if cells is not None and cells * cell not in (M, N):
            raise ValueError("cells * cell must match the image size")
        white = ((rows // cell) + (cols // cell)) % 2 == 0
        data = np.where(white, top, 0)
    elif kind == "solid":
        value = int(params.get("value", 0))
        if not 0 <= value <= top:
            raise ValueError("solid value out of range")
        data = np.full((M, N), value)
    elif kind == "line":
        thickness = float(params.get("thickness", 1))
        angle = math.radians(float(params.get("angle", 0.0)))
        ci, cj = (M - 1) / 2, (N - 1) / 2
        # distance from the line through the centre with direction (cos, -sin)
        dist = np.abs((rows - ci) * math.cos(angle) + (cols - cj) * math.sin(angle))
        data = np.where(dist <= thickness / 2, 0, top)
    elif kind == "triangle":
        apex_row = float(params.get("apex_row", M * 0.2))
        base_row = float(params.get("base_row", M * 0.8))
        half_base = float(params.get("half_base", N * 0.3))
        cj = (N - 1) / 2
        t = (rows - apex_row) / max(base_row - apex_row, 1e-9)
        inside = (t >= 0) & (t <= 1) & (np.abs(cols - cj) <= t * half_base)
        data = np.where(inside, int(params.get("value", 0)), top)
    elif kind == "kanizsa_triangle":
        radius = float(params.get("radius", min(M, N) * 0.12))
        ci, cj = (M - 1) / 2, (N - 1) / 2
        R = min(M, N) * 0.32
        verts = [(ci - R, cj), (ci + R / 2, cj - R * math.sqrt(3) / 2),
                 (ci + R / 2, cj + R * math.sqrt(3) / 2)]
        data = np.full((M, N), top)
        for vi, vj in verts:
            disk = (rows - vi) ** 2 + (cols - vj) ** 2 <= radius ** 2
            # wedge of 60 degrees pointing at the centroid is cut out
            ang_to_c = math.atan2(ci - vi, cj - vj)
            ang = np.arctan2(rows - vi, cols - vj)
            diff = np.abs((ang - ang_to_c + np.pi) % (2 * np.pi) - np.pi)
            data[disk & (diff > math.pi / 6)] = 0
    else:
        raise ValueError(f"unknown synthetic image kind {kind!r}")
    return RasterImage(data, bit_depth)
