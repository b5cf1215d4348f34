import numpy as np
import pytest

from fdinpaint.scenes import (
    interference_texture,
    load_scene,
    rect_mask,
    scene_names,
    tiled_noise,
    weave_texture,
)


@pytest.mark.parametrize("name", scene_names())
def test_scene_is_well_formed(name):
    scene = load_scene(name)
    assert scene.name == name and scene.description
    assert scene.missing.shape == scene.image.shape[:2]
    assert scene.missing.any()
    assert np.all(scene.masked_image.data[scene.missing] == 0)
    assert scene.mask.count_missing() == scene.missing.sum()


def test_scenes_are_deterministic():
    for name in scene_names():
        assert np.array_equal(load_scene(name).image.data, load_scene(name).image.data)


def test_unknown_scene():
    with pytest.raises(KeyError):
        load_scene("nothing")


def test_rect_mask():
    m = rect_mask((6, 7), 1, 2, 3, 4)
    assert m.sum() == 12 and m[1, 2] and m[3, 5] and not m[4, 2]


def test_texture_generators():
    weave = weave_texture()
    assert set(np.unique(weave)) == {80, 190}
    inter = interference_texture()
    assert np.array_equal(inter[:35], inter[35:70])
    tiles = tiled_noise()
    assert np.array_equal(tiles[:16, :16], tiles[16:32, 32:48])


def test_perfect_copy_hole_has_a_duplicate():
    scene = load_scene("perfect_copy")
    img = scene.image.data
    block = img[26:38, 25:39]
    assert np.array_equal(block, img[26 - 16:38 - 16, 25:39])
