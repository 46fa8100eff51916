import math

import numpy as np
import pytest

from houghfbp.errors import DimensionError, ParameterError
from houghfbp.types import Image, LineClass, Linogram, Sinogram, is_power_of_two, rmse


def test_image_is_read_only_copy():
    src = np.ones((4, 4))
    img = Image(src)
    src[0, 0] = 5
    assert img.data[0, 0] == 1
    with pytest.raises(ValueError):
        img.data[0, 0] = 2


@pytest.mark.parametrize("shape", [(3, 4), (0, 0), (4,)])
def test_image_rejects_bad_shapes(shape):
    with pytest.raises(DimensionError):
        Image(np.zeros(shape))


def test_image_rejects_nan():
    a = np.zeros((2, 2))
    a[1, 1] = np.nan
    with pytest.raises(ParameterError):
        Image(a)


def test_adopt_shares_memory_and_freezes():
    a = np.arange(9.0).reshape(3, 3).copy()
    img = Image.adopt(a)
    assert np.shares_memory(img.data, a)
    assert not a.flags.writeable


def test_adopt_copies_views():
    base = np.zeros((4, 8))
    img = Image.adopt(base[:, :4])
    assert not np.shares_memory(img.data, base)


def test_sinogram_geometry():
    s = Sinogram(np.zeros((4, 6)))
    assert s.num_angles == 4 and s.num_bins == 6
    np.testing.assert_allclose(s.angles, [0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
    np.testing.assert_array_equal(s.bin_positions, [-3, -2, -1, 0, 1, 2])
    assert np.all(np.diff(s.angles) > 0)


def test_sinogram_with_data_checks_shape():
    s = Sinogram(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        s.with_data(np.zeros((3, 2)))


def test_line_class_ranges_partition_half_turn():
    ranges = sorted(c.angle_range for c in LineClass)
    assert ranges[0][0] == 0.0
    assert ranges[-1][1] == pytest.approx(math.pi)
    for (_, hi), (lo, _) in zip(ranges, ranges[1:]):
        assert hi == lo


def test_line_class_parse():
    assert LineClass.parse("Lv+") is LineClass.VERTICAL_POS
    assert LineClass.parse("HORIZONTAL_NEG") is LineClass.HORIZONTAL_NEG
    with pytest.raises(ParameterError):
        LineClass.parse("Lx")


def test_linogram_layout_and_stacking(rng):
    n = 4
    blocks = {c: rng.random((n, 2 * n)) for c in LineClass}
    lin = Linogram(n, blocks)
    again = Linogram.from_stacked(lin.stacked())
    for c in LineClass:
        np.testing.assert_array_equal(again[c], lin[c])
    assert lin.at(LineClass.VERTICAL_POS, 1, -n) == blocks[LineClass.VERTICAL_POS][1, 0]
    assert lin.at(LineClass.VERTICAL_NEG, 1, 0) == blocks[LineClass.VERTICAL_NEG][1, 0]
    np.testing.assert_array_equal(lin.intercepts(LineClass.VERTICAL_POS), np.arange(-n, n))
    with pytest.raises(ParameterError):
        lin.at(LineClass.VERTICAL_NEG, n, 0)


def test_linogram_rejects_wrong_blocks():
    with pytest.raises(DimensionError):
        Linogram(2, {LineClass.VERTICAL_POS: np.zeros((2, 4))})
    bad = {c: np.zeros((2, 4)) for c in LineClass}
    bad[LineClass.HORIZONTAL_POS] = np.zeros((2, 2))
    with pytest.raises(DimensionError):
        Linogram(2, bad)


def test_rmse_examples():
    x = np.random.default_rng(0).random((5, 5))
    assert rmse(x, x) == 0.0
    assert rmse(np.zeros((4, 4)), np.ones((4, 4))) == 1.0
    with pytest.raises(DimensionError):
        rmse(np.zeros((2, 2)), np.zeros((3, 3)))


@pytest.mark.parametrize("n,ok", [(1, True), (2, True), (64, True), (0, False), (6, False), (96, False)])
def test_is_power_of_two(n, ok):
    assert is_power_of_two(n) is ok
