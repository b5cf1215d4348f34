import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdinpaint.core import InpaintMask, PatchSpec, RasterImage, boundary
from fdinpaint.engine import EngineConfig, _Engine
from fdinpaint.priority import (
    ConfidenceField,
    PriorityRecord,
    data_term,
    patch_confidence,
    priority_star,
    propagate_confidence,
)

L1 = PatchSpec(1)


def _mask_block(shape, rows, cols):
    missing = np.zeros(shape, dtype=bool)
    missing[rows, cols] = True
    return InpaintMask.from_missing(missing)


def test_initial_field():
    mask = _mask_block((5, 5), slice(1, 3), slice(1, 3))
    conf = ConfidenceField.initial(mask)
    assert conf[(0, 0)] == 1.0 and conf[(1, 1)] == 0.0
    with pytest.raises(ValueError):
        ConfidenceField(np.zeros(3))


def test_patch_confidence_examples():
    single = InpaintMask.from_pixels((7, 7), [(3, 3)])
    assert patch_confidence(ConfidenceField.initial(single), (3, 3), L1) == pytest.approx(8 / 9)
    big = _mask_block((15, 15), slice(2, 13), slice(2, 13))
    assert patch_confidence(ConfidenceField.initial(big), (7, 7), L1) == 0.0
    edge = _mask_block((9, 9), slice(0, 9), slice(4, 5))
    assert patch_confidence(ConfidenceField.initial(edge), (4, 4), L1) == pytest.approx(6 / 9)


def test_patch_confidence_counts_off_image_cells_as_zero():
    mask = InpaintMask.from_pixels((5, 5), [(0, 0)])
    assert patch_confidence(ConfidenceField.initial(mask), (0, 0), L1) == pytest.approx(3 / 9)


def test_data_term_examples():
    img = np.full((5, 5), 80)
    mask = InpaintMask.from_pixels((5, 5), [(2, 2)])
    assert data_term(img, mask, (2, 2)) == 0.0

    edge = np.zeros((3, 3), dtype=int)
    edge[:, 2] = 255
    only_sides = np.ones((3, 3), dtype=bool)
    only_sides[1, 0] = only_sides[1, 2] = False
    assert data_term(edge, InpaintMask.from_missing(only_sides), (1, 1)) == 127.5

    full_ring = InpaintMask.from_pixels((3, 3), [(1, 1)])
    assert data_term(edge, full_ring, (1, 1)) == 255.0

    alone = InpaintMask.from_missing(np.ones((3, 3), dtype=bool))
    assert data_term(edge, alone, (1, 1)) == 0.0


def test_priority_examples():
    conf = ConfidenceField(np.zeros((5, 5)))
    mask = InpaintMask.from_pixels((5, 5), [(2, 2)])
    img = np.zeros((5, 5), dtype=int)
    assert priority_star(conf, img, mask, (2, 2), 0.9, L1).p_star == 0.0

    conf = ConfidenceField.initial(mask)
    rec = priority_star(conf, img, mask, (2, 2), 0.5, L1)
    assert rec.p_star == pytest.approx((8 / 9) ** 2 * 0.5)
    assert rec.p_star == pytest.approx(0.395, abs=1e-3)

    deferred = priority_star(conf, img, mask, (2, 2), None, L1)
    assert deferred.deferred and deferred.p_star == -math.inf


def test_inverted_energy_factor():
    mask = InpaintMask.from_pixels((5, 5), [(2, 2)])
    conf = ConfidenceField.initial(mask)
    img = np.zeros((5, 5), dtype=int)
    good = priority_star(conf, img, mask, (2, 2), 0.1, L1, invert_energy=True).p_star
    bad = priority_star(conf, img, mask, (2, 2), 0.9, L1, invert_energy=True).p_star
    assert good > bad
    assert priority_star(conf, img, mask, (2, 2), 0.1, L1).p_star < priority_star(conf, img, mask, (2, 2), 0.9, L1).p_star


def test_larger_structure_term_raises_priority():
    mask = InpaintMask.from_pixels((5, 5), [(2, 2)])
    conf = ConfidenceField.initial(mask)
    flat = np.zeros((5, 5), dtype=int)
    edge = flat.copy()
    edge[:, 3:] = 200
    p_flat = priority_star(conf, flat, mask, (2, 2), 0.3, L1)
    p_edge = priority_star(conf, edge, mask, (2, 2), 0.3, L1)
    assert p_edge.d_m > p_flat.d_m and p_edge.p_star > p_flat.p_star


def test_deferred_pixels_lose_to_any_scored_pixel():
    recs = [PriorityRecord((0, 0), 0.9, 10, None, -math.inf), PriorityRecord((0, 1), 0.0, 0, 0.0, 0.0)]
    best = max(recs, key=lambda r: (r.p_star, r.c_patch, -r.pixel[0], -r.pixel[1]))
    assert not best.deferred


def test_propagation_examples():
    mask = InpaintMask.from_pixels((5, 5), [(2, 2), (2, 3)])
    conf = ConfidenceField.initial(mask)
    mask.commit((2, 2))
    before = conf.values.copy()
    propagate_confidence(conf, mask, (2, 2), 1.0, 0.0)
    known = mask.known
    assert np.array_equal(conf.values[known], before[known])
    assert conf[(2, 2)] == 1.0 and conf[(2, 3)] == pytest.approx(1 / 8)

    conf = ConfidenceField.initial(mask)
    propagate_confidence(conf, mask, (2, 2), 1.0, 1.0)
    assert conf[(2, 2)] == 0.0
    assert conf[(1, 1)] == pytest.approx(7 / 8) and conf[(3, 3)] == pytest.approx(7 / 8)
    assert conf[(0, 0)] == 1.0
    assert conf[(2, 3)] == 0.0


def test_propagation_without_known_updates():
    mask = InpaintMask.from_pixels((5, 5), [(2, 2)])
    conf = ConfidenceField.initial(mask)
    mask.commit((2, 2))
    propagate_confidence(conf, mask, (2, 2), 0.8, 0.6, update_known=False)
    assert np.all(conf.values[mask.known] == 1.0)
    assert conf[(2, 2)] == pytest.approx(0.8 * 0.4)


def test_propagation_rejects_unnormalised_energy():
    mask = InpaintMask.from_pixels((3, 3), [(1, 1)])
    with pytest.raises(ValueError):
        propagate_confidence(ConfidenceField.initial(mask), mask, (1, 1), 1.0, 1.5)


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.floats(0, 1), st.floats(0, 1)),
                min_size=1, max_size=40))
def test_field_stays_in_unit_interval(steps):
    missing = np.zeros((6, 6), dtype=bool)
    missing[1:5, 1:5] = True
    mask = InpaintMask.from_missing(missing)
    conf = ConfidenceField.initial(mask)
    for i, j, c, e in steps:
        propagate_confidence(conf, mask, (i, j), c, e)
        assert conf.values.min() >= 0.0 and conf.values.max() <= 1.0


def test_zero_energy_commits_equal_no_propagation_baseline(rng):
    img = np.tile(rng.integers(0, 256, (6, 6)), (5, 5))
    missing = np.zeros(img.shape, dtype=bool)
    missing[12:17, 13:18] = True
    fields = []
    for prop in (True, False):
        eng = _Engine(RasterImage(img), InpaintMask.from_missing(missing), EngineConfig(propagation=prop))
        eng.fill_scan()
        assert all(c.e_t == 0 for c in eng.trace.commits)
        fields.append(eng.conf.values)
    assert np.array_equal(fields[0], fields[1])


def _first_choice(img, missing, bit_depth):
    eng = _Engine(RasterImage(img, bit_depth), InpaintMask.from_missing(missing), EngineConfig())
    recs = [eng._evaluate(p)[1] for p in boundary(eng.mask)]
    best = max(recs, key=lambda r: (r.p_star, r.c_patch, -r.pixel[0], -r.pixel[1]))
    return best.pixel, {r.pixel: r.p_star for r in recs}


@pytest.mark.parametrize("seed", range(3))
def test_argmax_survives_rescaling_to_a_deeper_range(seed):
    rng = np.random.default_rng(seed)
    img = np.where(np.add.outer(np.arange(24), np.arange(24)) < 24, 30, 200) + rng.integers(0, 20, (24, 24))
    missing = np.zeros(img.shape, dtype=bool)
    missing[8:15, 9:16] = True
    p8, s8 = _first_choice(img, missing, 8)
    p16, s16 = _first_choice(img * 257, missing, 16)
    assert p8 == p16
    for px, v in s8.items():
        assert s16[px] == pytest.approx(v, rel=1e-9, abs=1e-15)
