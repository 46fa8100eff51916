import math

import numpy as np
import pytest

from houghfbp import _backend
from houghfbp.counting import OpCount
from houghfbp.errors import DimensionError, PlanError
from houghfbp.fht import (
    back_plan,
    back_projection_weights,
    brute_force_linogram,
    dyadic_offsets,
    fht_back_project,
    fht_forward,
    forward_plan,
)
from houghfbp.linogram import sinogram_to_linogram
from houghfbp.pipeline import phantom_sinogram
from houghfbp.radon import back_project_direct
from houghfbp.types import Image, Linogram, LineClass

from oracles import pattern_offsets, pattern_sums


@pytest.mark.parametrize("h", [1, 2, 4, 8, 16, 32])
def test_offsets_match_oracle(h):
    for t in range(h):
        offs = dyadic_offsets(h, t)
        assert offs == pattern_offsets(h, t)
        assert offs[0] == 0 and offs[-1] == t
        assert all(0 <= b - a <= 1 for a, b in zip(offs, offs[1:]))


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_forward_matches_oracle_exactly(backend, rng, n):
    img = rng.integers(-50, 50, size=(n, n)).astype(np.float64)
    lin = fht_forward(Image(img), backend=backend)
    for cls in LineClass:
        src = img if cls.vertical else img.T
        np.testing.assert_array_equal(lin[cls], pattern_sums(src, cls.sign))


def test_brute_force_agrees_with_oracle(rng):
    img = rng.integers(0, 9, size=(8, 8)).astype(np.float64)
    lin = brute_force_linogram(img)
    np.testing.assert_array_equal(lin[LineClass.VERTICAL_NEG], pattern_sums(img, -1))
    np.testing.assert_array_equal(lin[LineClass.HORIZONTAL_POS], pattern_sums(img.T, 1))


def test_each_shift_partitions_the_image(backend, rng):
    n = 32
    img = rng.integers(0, 100, size=(n, n)).astype(np.float64)
    lin = fht_forward(Image(img), backend=backend)
    for cls in LineClass:
        np.testing.assert_array_equal(lin[cls].sum(axis=1), np.full(n, img.sum()))


@pytest.mark.parametrize("n", [4, 32, 64, 128])
def test_forward_addition_count(n):
    c = OpCount()
    fht_forward(Image(np.zeros((n, n))), c)
    k = int(math.log2(n))
    per_block = n * n * k - (n // 2) * k
    assert c.adds == 4 * per_block == 4 * forward_plan(n).additions
    assert c.mults == 0


def test_back_projection_counts_every_term():
    n = 64
    c = OpCount()
    fht_back_project(Linogram.zeros(n), c)
    assert c.adds == 4 * back_plan(n).additions + 3 * n * n
    assert c.mults == 4 * n * 2 * n


def test_weights_cover_a_quarter_turn():
    for n in (1, 2, 16, 256):
        w = back_projection_weights(n)
        k = np.sqrt(1 + (np.arange(n) / max(n - 1, 1)) ** 2)
        assert (w / k).sum() == pytest.approx(math.pi / 4, rel=1e-14)
        assert np.all(w > 0)


def test_delta_back_projects_to_its_pixel(backend):
    n = 32
    img = np.zeros((n, n))
    img[20, 9] = 1.0
    back = fht_back_project(fht_forward(Image(img), backend=backend), backend=backend).data
    assert np.unravel_index(np.argmax(back), back.shape) == (20, 9)
    # every line through the pixel crosses it once: the weights of all four classes
    assert back[20, 9] == pytest.approx(4 * back_projection_weights(n).sum(), rel=1e-12)


def test_back_projection_is_linear(backend, rng):
    n = 16
    a = Linogram.from_stacked(rng.standard_normal((4 * n, 2 * n)))
    b = Linogram.from_stacked(rng.standard_normal((4 * n, 2 * n)))
    ab = Linogram.from_stacked(a.stacked() - 0.5 * b.stacked())
    got = fht_back_project(ab, backend=backend).data
    want = fht_back_project(a, backend=backend).data - 0.5 * fht_back_project(b, backend=backend).data
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_back_projection_is_a_weighted_transpose(rng):
    n = 8
    img = rng.standard_normal((n, n))
    lin = Linogram.from_stacked(rng.standard_normal((4 * n, 2 * n)))
    w = back_projection_weights(n)[:, None]
    lhs = sum(np.vdot(fht_forward(Image(img))[c], w * lin[c]) for c in LineClass)
    rhs = np.vdot(img, fht_back_project(lin).data)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("n", [32, 64, 128])
def test_close_to_direct_back_projection(n):
    _, sino = phantom_sinogram(n, n)
    direct = back_project_direct(sino, n).data
    fast = fht_back_project(sinogram_to_linogram(sino, n)).data
    assert np.linalg.norm(fast - direct) / np.linalg.norm(direct) < 0.01


def test_backends_bit_exact(rng):
    if len(_backend.available()) < 2:
        pytest.skip("compiled kernels not built")
    n = 64
    img = Image(rng.standard_normal((n, n)))
    a, b = fht_forward(img, backend="python"), fht_forward(img, backend="cython")
    for cls in LineClass:
        np.testing.assert_array_equal(a[cls], b[cls])
    np.testing.assert_array_equal(
        fht_back_project(a, backend="python").data, fht_back_project(a, backend="cython").data
    )


def test_result_does_not_alias_scratch():
    lin = fht_forward(Image(np.eye(16)))
    first = fht_back_project(lin)
    keep = first.data.copy()
    fht_back_project(Linogram.zeros(16))
    np.testing.assert_array_equal(first.data, keep)


@pytest.mark.parametrize("n", [3, 6, 12])
def test_non_power_of_two_rejected(n):
    with pytest.raises(PlanError):
        fht_forward(Image(np.zeros((n, n))))
    with pytest.raises(PlanError):
        forward_plan(n)


def test_back_projection_needs_linogram():
    with pytest.raises(DimensionError):
        fht_back_project(np.zeros((16, 8)))
