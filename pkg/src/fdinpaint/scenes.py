"""Bundled deterministic scenes used by the benchmark command and the tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import InpaintMask, RasterImage, synthesize


@dataclass(frozen=True)
class Scene:
    name: str
    image: RasterImage
    missing: np.ndarray = field(repr=False)
    description: str = ""
    probe: tuple | None = None

    @property
    def mask(self) -> InpaintMask:
        return InpaintMask.from_missing(self.missing)

    @property
    def masked_image(self) -> RasterImage:
        """The scene image with the region blanked to zero."""
        data = self.image.to_array()
        data[self.missing] = 0
        return RasterImage(data, self.image.bit_depth)


def rect_mask(shape, top: int, left: int, height: int, width: int) -> np.ndarray:
    miss = np.zeros(shape, dtype=bool)
    miss[top:top + height, left:left + width] = True
    return miss


def weave_texture(size=(64, 64), block: int = 6, light: int = 190, dark: int = 80) -> np.ndarray:
    """Basket weave of one-pixel threads.

    Square blocks alternate between horizontal and vertical threads, and the
    threads alternate light and dark.
    """
    rows, cols = np.mgrid[0:size[0], 0:size[1]]
    horizontal = ((rows // block) + (cols // block)) % 2 == 0
    thread = np.where(horizontal, rows % block, cols % block)
    return np.where(thread % 2 == 0, light, dark)


def interference_texture(size=(81, 81), periods=(5, 7), seed: int = 5,
                         base: int = 40, amplitudes=(100, 60)) -> np.ndarray:
    """Sum of two random binary tilings with coprime periods.

    The joint pattern repeats only every ``periods[0] * periods[1]`` pixels,
    so small windows recur far more often than large ones.
    """
    rng = np.random.default_rng(seed)
    tiles = [rng.integers(0, 2, (p, p)) for p in periods]
    rows, cols = np.mgrid[0:size[0], 0:size[1]]
    out = np.full(size, base, dtype=np.int64)
    for tile, p, amp in zip(tiles, periods, amplitudes):
        out += amp * tile[rows % p, cols % p]
    return out


def tiled_noise(size=(64, 64), tile: int = 16, seed: int = 161) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = rng.integers(0, 256, (tile, tile))
    reps = (size[0] // tile + 1, size[1] // tile + 1)
    return np.tile(t, reps)[:size[0], :size[1]]


def chessboard() -> Scene:
    img = synthesize("chessboard", (50, 50), cell=5)
    miss = np.zeros(img.shape, dtype=bool)
    miss[24, 24] = True
    return Scene("chessboard", img, miss, "50x50 board of 5-pixel cells, one white corner pixel missing")


def perfect_copy() -> Scene:
    img = RasterImage(tiled_noise())
    return Scene("perfect_copy", img, rect_mask(img.shape, 26, 25, 12, 14),
                 "random 16x16 tile repeated over 64x64, 12x14 hole with exact copies elsewhere")


def weave() -> Scene:
    img = RasterImage(weave_texture())
    return Scene("weave", img, rect_mask(img.shape, 26, 25, 12, 14),
                 "64x64 basket weave of one-pixel threads, 12x14 hole")


def texture81() -> Scene:
    img = RasterImage(interference_texture())
    miss = np.zeros(img.shape, dtype=bool)
    miss[40, 40] = True
    return Scene("texture81", img, miss, "81x81 interference of period-5 and period-7 tilings, centre probe",
                 probe=(40, 40))


def triangle() -> Scene:
    img = synthesize("triangle", (64, 64), apex_row=10, base_row=54, half_base=22)
    return Scene("triangle", img, rect_mask(img.shape, 4, 25, 12, 14),
                 "dark triangle on white with its apex hidden by a 12x14 hole")


def line() -> Scene:
    img = synthesize("line", (41, 41), thickness=1, angle=30)
    return Scene("line", img, rect_mask(img.shape, 13, 13, 15, 15),
                 "one-pixel line at 30 degrees crossing a 15x15 hole")


def binary_noise() -> Scene:
    rng = np.random.default_rng(0)
    img = RasterImage(rng.integers(0, 2, (32, 32)) * 255)
    return Scene("binary_noise", img, rect_mask(img.shape, 11, 11, 10, 10),
                 "32x32 random black and white pixels, 10x10 hole without exact copies")


def kanizsa() -> Scene:
    img = synthesize("kanizsa_triangle", (64, 64))
    return Scene("kanizsa", img, rect_mask(img.shape, 26, 26, 12, 12),
                 "three notched disks around an illusory triangle, centre hidden")


SCENES = {
    "chessboard": chessboard,
    "perfect_copy": perfect_copy,
    "weave": weave,
    "texture81": texture81,
    "triangle": triangle,
    "line": line,
    "kanizsa": kanizsa,
    "binary_noise": binary_noise,
}


def scene_names() -> list[str]:
    return list(SCENES)


def load_scene(name: str) -> Scene:
    try:
        return SCENES[name]()
    except KeyError:
        raise KeyError(f"unknown scene {name!r}; available: {', '.join(SCENES)}") from None
