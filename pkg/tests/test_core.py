import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from fdinpaint.core import (
    ImageFormatError,
    InpaintMask,
    PatchSpec,
    PixelState,
    RasterImage,
    boundary,
    build_training_set,
    load_image,
    load_mask,
    mask_image,
    merge_channels,
    save_image,
    split_channels,
    synthesize,
    valid_window_centers,
)


# -- RasterImage ---------------------------------------------------------------

def test_raster_image_is_read_only_copy():
    src = np.array([[1, 2], [3, 4]])
    img = RasterImage(src)
    src[0, 0] = 99
    assert img.data[0, 0] == 1
    with pytest.raises(ValueError):
        img.data[0, 0] = 5
    arr = img.to_array()
    arr[0, 0] = 7
    assert img.data[0, 0] == 1


@pytest.mark.parametrize("data, depth", [
    (np.array([[256]]), 8),
    (np.array([[-1]]), 8),
    (np.zeros((2, 2, 2)), 8),
    (np.zeros(4), 8),
    (np.zeros((2, 2)), 0),
])
def test_raster_image_validation(data, depth):
    with pytest.raises(ValueError):
        RasterImage(data, depth)


def test_raster_image_properties_and_equality():
    rgb = RasterImage(np.zeros((3, 4, 3), dtype=int))
    assert rgb.channels == 3 and rgb.shape == (3, 4) and rgb.maxval == 255
    deep = RasterImage(np.full((2, 2), 1000), bit_depth=12)
    assert deep.data.dtype == np.uint16 and deep.maxval == 4095
    assert RasterImage(np.ones((2, 2))) == RasterImage(np.ones((2, 2), dtype=np.uint8))
    assert RasterImage(np.ones((2, 2))) != RasterImage(np.zeros((2, 2)))


# -- InpaintMask ---------------------------------------------------------------

def test_mask_states_and_commit():
    m = InpaintMask.from_pixels((3, 3), [(1, 1), (0, 2)])
    assert m.count_missing() == 2 and m.count_omega() == 2
    m.commit((1, 1))
    assert m.state((1, 1)) is PixelState.FILLED
    assert m.count_missing() == 1 and m.count_omega() == 2
    assert m.available[1, 1] and not m.known[1, 1] and m.omega[1, 1]
    with pytest.raises(ValueError):
        m.commit((1, 1))
    with pytest.raises(ValueError):
        m.commit((0, 0))


def test_mask_rejects_bad_states_and_copy_is_independent():
    with pytest.raises(ValueError):
        InpaintMask(np.full((2, 2), 7))
    with pytest.raises(ValueError):
        InpaintMask(np.zeros(3))
    m = InpaintMask.from_pixels((2, 2), [(0, 0)])
    c = m.copy()
    c.commit((0, 0))
    assert m.is_missing((0, 0))
    with pytest.raises(ValueError):
        m.states[0, 0] = 0


def test_mask_shape_check():
    with pytest.raises(ValueError):
        InpaintMask.from_pixels((3, 3), []).check_image(RasterImage(np.zeros((3, 4))))


# -- PatchSpec -----------------------------------------------------------------

def test_patch_spec_from_side():
    spec = PatchSpec.from_side(5)
    assert spec.half_width == 2 and spec.side == 5 and spec.size == 25
    with pytest.raises(ValueError, match="patch side must be odd"):
        PatchSpec.from_side(4)
    with pytest.raises(ValueError):
        PatchSpec.from_side(1)
    with pytest.raises(ValueError):
        PatchSpec(0)


def test_offsets_raster_order_without_centre():
    assert PatchSpec(1).offsets() == [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    assert len(PatchSpec(3).offsets()) == 48


# -- training set --------------------------------------------------------------

def _tset_oracle(known, reach, box=None):
    M, N = known.shape
    out = []
    for r in range(M):
        for c in range(N):
            ok = True
            for a in range(-reach, reach + 1):
                for b in range(-reach, reach + 1):
                    p, q = r + a, c + b
                    if not (0 <= p < M and 0 <= q < N) or not known[p, q]:
                        ok = False
                    elif box is not None and not box[p, q]:
                        ok = False
            if ok:
                out.append((r, c))
    return out


@given(arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12))), st.integers(1, 2), st.integers(1, 3))
def test_training_set_matches_brute_force(missing, L, order):
    mask = InpaintMask.from_missing(missing)
    tset = build_training_set(mask, PatchSpec(L), order)
    assert tset.reach == L + order
    assert [tuple(c) for c in tset.centers.tolist()] == _tset_oracle(~missing, L + order)


def test_training_set_rect_restriction():
    missing = np.zeros((20, 20), dtype=bool)
    missing[8:12, 8:12] = True
    mask = InpaintMask.from_missing(missing)
    # x=0, y=0, width 10, height 6 covers rows 0..5 and cols 0..9
    tset = build_training_set(mask, PatchSpec(1), 1, rects=[(0, 0, 10, 6)])
    box = np.zeros((20, 20), dtype=bool)
    box[0:6, 0:10] = True
    assert [tuple(c) for c in tset.centers.tolist()] == _tset_oracle(~missing, 2, box)
    assert tset.provenance == "rects" and len(tset) == 2 * 6
    with pytest.raises(ValueError):
        build_training_set(mask, PatchSpec(1), 1, rects=[(0, 0, 0, 5)])


def test_training_set_region_restriction():
    mask = InpaintMask.from_pixels((10, 10), [(5, 5)])
    region = np.zeros((10, 10), dtype=bool)
    region[:5, :5] = True
    tset = build_training_set(mask, PatchSpec(1), 1, region=region)
    assert [tuple(c) for c in tset.centers.tolist()] == [(2, 2)]
    with pytest.raises(ValueError):
        build_training_set(mask, PatchSpec(1), 1, region=np.ones((3, 3), dtype=bool))


def test_window_centres_on_small_grid():
    assert valid_window_centers(np.ones((3, 3), dtype=bool), 2).shape == (0, 2)
    assert valid_window_centers(np.ones((5, 5), dtype=bool), 2).tolist() == [[2, 2]]


# -- boundary ------------------------------------------------------------------

def test_boundary_of_block():
    missing = np.zeros((7, 7), dtype=bool)
    missing[2:5, 2:5] = True
    front = boundary(InpaintMask.from_missing(missing))
    assert (3, 3) not in front and len(front) == 8
    assert front == sorted(front)


def test_boundary_empty_when_everything_missing():
    assert boundary(InpaintMask.from_missing(np.ones((3, 3), dtype=bool))) == []


# -- channels ------------------------------------------------------------------

def test_split_merge_roundtrip(rng):
    img = RasterImage(rng.integers(0, 256, (4, 5, 3)))
    planes = split_channels(img)
    assert [p.channels for p in planes] == [1, 1, 1]
    assert merge_channels(planes) == img
    gray = RasterImage(rng.integers(0, 256, (4, 5)))
    assert split_channels(gray) == [gray]


def test_merge_rejects_mismatched_planes():
    with pytest.raises(ValueError):
        merge_channels([RasterImage(np.zeros((2, 2))), RasterImage(np.zeros((2, 3))),
                        RasterImage(np.zeros((2, 2)))])
    with pytest.raises(ValueError):
        merge_channels([])


# -- file I/O ------------------------------------------------------------------

@pytest.mark.parametrize("suffix", [".pgm", ".png"])
def test_gray_roundtrip(tmp_path, rng, suffix):
    img = RasterImage(rng.integers(0, 256, (6, 7)))
    path = save_image(img, tmp_path / f"g{suffix}")
    assert load_image(path) == img


def test_rgb_png_roundtrip(tmp_path, rng):
    img = RasterImage(rng.integers(0, 256, (5, 4, 3)))
    assert load_image(save_image(img, tmp_path / "c.png")) == img


def test_unsupported_files(tmp_path):
    Image.new("L", (3, 3)).save(tmp_path / "x.bmp")
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "x.bmp")
    Image.fromarray(np.full((3, 3), 40000, dtype=np.uint16)).save(tmp_path / "deep.png")
    with pytest.raises(ImageFormatError, match="bit depth"):
        load_image(tmp_path / "deep.png")
    (tmp_path / "junk.png").write_bytes(b"not an image")
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "junk.png")
    with pytest.raises(ImageFormatError):
        save_image(RasterImage(np.zeros((2, 2))), tmp_path / "x.jpg")
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "missing.png")


def test_mask_file_roundtrip(tmp_path):
    mask = InpaintMask.from_pixels((4, 4), [(1, 2), (3, 3)])
    path = save_image(mask_image(mask), tmp_path / "m.png")
    back = load_mask(path)
    assert np.array_equal(back.missing, mask.missing)
    with pytest.raises(ValueError):
        load_mask(path, shape=(5, 5))


# -- synthetic images ----------------------------------------------------------

def test_chessboard_colouring():
    board = synthesize("chessboard", (50, 50), cell=5)
    assert board.data[0, 0] == 255 and board.data[0, 5] == 0 and board.data[24, 24] == 255
    assert board.data[25, 25] == 255 and board.data[24, 25] == 0
    with pytest.raises(ValueError):
        synthesize("chessboard", (50, 50), cell=7)


def test_synthetic_kinds():
    assert np.all(synthesize("solid", (3, 3), value=9).data == 9)
    line = synthesize("line", (21, 21), thickness=1, angle=0)
    assert np.array_equal(np.nonzero(line.data == 0)[0], np.full(21, 10))
    tri = synthesize("triangle", (40, 40), apex_row=5, base_row=35, half_base=12)
    assert tri.data[4, 19] == 255 and tri.data[30, 19] == 0
    kan = synthesize("kanizsa_triangle", (64, 64))
    assert set(np.unique(kan.data)) == {0, 255}
    with pytest.raises(ValueError):
        synthesize("spiral", (4, 4))
    with pytest.raises(ValueError):
        synthesize("solid", (0, 4))
