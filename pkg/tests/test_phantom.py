import numpy as np
import pytest

from houghfbp.errors import ParameterError
from houghfbp.phantom import SHEPP_LOGAN, Ellipse, generate_shepp_logan, pixel_coordinates

from oracles import point_in_ellipse_phantom


def test_corners_are_outside_the_head():
    img = generate_shepp_logan(4).data
    assert img[0, 0] == img[0, 3] == img[3, 0] == img[3, 3] == 0.0


def test_matches_point_in_ellipse_oracle():
    img = generate_shepp_logan(64).data
    ref = point_in_ellipse_phantom(64)
    assert img.sum() == pytest.approx(ref.sum(), rel=0, abs=1e-9)
    np.testing.assert_allclose(img, ref, atol=1e-12)


def _boundary_mask(n, width):
    u, v = pixel_coordinates(n)
    mask = np.zeros((n, n), dtype=bool)
    for e in SHEPP_LOGAN:
        c, s = np.cos(e.phi), np.sin(e.phi)
        du, dv = u - e.x0, v - e.y0
        p = (du * c + dv * s) / e.a
        q = (-du * s + dv * c) / e.b
        rho = np.sqrt(p * p + q * q)
        mask |= np.abs(rho - 1.0) * min(e.a, e.b) < width
    return mask


def test_mirror_symmetry_away_from_boundaries():
    n = 64
    img = generate_shepp_logan(n).data
    mirrored = img[:, ::-1]
    # only the small off-axis features break left-right symmetry
    skip = _boundary_mask(n, 4.0 / n)
    skip |= skip[:, ::-1]
    diff = np.abs(img - mirrored)
    asym = {(0.22, 0.0), (-0.22, 0.0), (-0.08, -0.605), (0.06, -0.605)}
    u, v = pixel_coordinates(n)
    for e in SHEPP_LOGAN:
        if (e.x0, e.y0) in asym:
            r = max(e.a, e.b) + 4.0 / n
            skip |= (np.hypot(u - e.x0, v - e.y0) < r) | (np.hypot(u + e.x0, v - e.y0) < r)
    assert diff[~skip].max() == 0.0


def test_values_bounded_and_supported_in_disc():
    n = 128
    img = generate_shepp_logan(n).data
    assert np.all(np.isfinite(img))
    assert img.max() <= sum(e.rho for e in SHEPP_LOGAN if e.rho > 0)
    u, v = pixel_coordinates(n)
    assert np.all(img[np.hypot(u, v) > 1.0] == 0)


def test_refinement_converges():
    errs = []
    for n in (32, 64, 128):
        coarse = generate_shepp_logan(n).data
        fine = generate_shepp_logan(2 * n).data
        down = fine.reshape(n, 2, n, 2).mean(axis=(1, 3))
        errs.append(np.abs(down - coarse).mean())
    assert errs[0] > errs[1] > errs[2]


def test_orientation_row_zero_is_bottom():
    # the ellipse centred at v = +0.35 must appear in the upper half
    n = 200
    img = generate_shepp_logan(n).data
    col = n // 2
    up = int((0.35 + 1) / 2 * n)
    down = int((-0.35 + 1) / 2 * n)
    assert img[up, col] == pytest.approx(1.03)
    assert img[down, col] == pytest.approx(1.02)


@pytest.mark.parametrize("n", [0, 1, 2.5])
def test_rejects_bad_size(n):
    with pytest.raises(ParameterError):
        generate_shepp_logan(n)


def test_ellipse_validation():
    with pytest.raises(ParameterError):
        Ellipse(0, 0, 0.0, 1.0, 0.0, 1.0)
