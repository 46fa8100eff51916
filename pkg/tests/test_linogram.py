import math

import numpy as np
import pytest

from houghfbp.counting import OpCount
from houghfbp.errors import DimensionError, GeometryError, ParameterError
from houghfbp.fht import fht_forward
from houghfbp.linogram import (
    StLine,
    linogram_lines,
    scaling_factor,
    sinogram_to_linogram,
    st_to_rtheta,
)
from houghfbp.pipeline import phantom_sinogram
from houghfbp.types import LineClass, Sinogram


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_st_to_rtheta_diagonal():
    r, th = st_to_rtheta(StLine(LineClass.HORIZONTAL_NEG, 2.0, -4.0), 4)
    assert th == pytest.approx(math.pi / 4)
    assert r == pytest.approx(math.sqrt(2))


def test_st_to_rtheta_axis_lines():
    r, th = st_to_rtheta(StLine(LineClass.VERTICAL_NEG, 3.0, 0.0), 8)
    assert (r, th) == pytest.approx((3.0, 0.0))
    r, th = st_to_rtheta(StLine(LineClass.HORIZONTAL_POS, 5.0, 0.0), 8)
    assert (r, th) == pytest.approx((5.0, math.pi / 2))


@pytest.mark.parametrize("cls", list(LineClass))
def test_st_to_rtheta_endpoints_on_line(cls):
    n, s = 16.0, 3.0
    for t in (cls.sign * 0.0, cls.sign * 5.0, cls.sign * 16.0):
        r, th = st_to_rtheta(StLine(cls, s, t), n)
        ends = [(s, 0.0), (s + t, n)] if cls.vertical else [(0.0, s), (n, s + t)]
        for x, y in ends:
            assert x * math.cos(th) + y * math.sin(th) == pytest.approx(r, abs=1e-12)
        assert 0.0 <= th < math.pi


def test_st_to_rtheta_rejects_bad_shift():
    with pytest.raises(ParameterError):
        st_to_rtheta(StLine(LineClass.VERTICAL_POS, 0.0, -1.0), 8)
    with pytest.raises(ParameterError):
        st_to_rtheta(StLine(LineClass.VERTICAL_NEG, 0.0, -9.0), 8)


def test_scaling_factor_values():
    assert scaling_factor(0, 64) == 1.0
    assert scaling_factor(64, 64) == pytest.approx(math.sqrt(2))
    assert scaling_factor(-64, 64) == pytest.approx(math.sqrt(2))
    np.testing.assert_allclose(scaling_factor(np.array([3.0, 4.0]), 4.0), [1.25, math.sqrt(2)])


@pytest.mark.parametrize("cls", list(LineClass))
def test_lines_stay_in_class_range(cls):
    n = 16
    theta, r, k = linogram_lines(n, cls)
    lo, hi = cls.angle_range
    th = theta[1:]  # t = 0 sits on the shared boundary
    if cls is LineClass.VERTICAL_POS:
        assert np.all((th >= lo - 1e-12) & (th <= hi))
    else:
        assert np.all((th >= lo - 1e-12) & (th <= hi + 1e-12))
    np.testing.assert_allclose(k[:, 0], scaling_factor(np.arange(n), n - 1))
    assert theta.shape == r.shape == (n, 2 * n)


def test_zero_sinogram_gives_zero_linogram(backend):
    lin = sinogram_to_linogram(Sinogram(np.zeros((16, 26))), 16, backend=backend)
    for cls in LineClass:
        assert not lin[cls].any()


@pytest.mark.parametrize("interp", ["cubic", "linear"])
def test_resampling_is_linear(backend, rng, interp):
    a = Sinogram(rng.standard_normal((12, 26)))
    b = Sinogram(rng.standard_normal((12, 26)))
    both = Sinogram(2.0 * a.data - 3.0 * b.data)
    la, lb, lab = (sinogram_to_linogram(s, 16, interpolation=interp, backend=backend) for s in (a, b, both))
    for cls in LineClass:
        np.testing.assert_allclose(lab[cls], 2.0 * la[cls] - 3.0 * lb[cls], atol=1e-12)


def test_backends_agree(rng):
    from houghfbp import _backend

    if len(_backend.available()) < 2:
        pytest.skip("compiled kernels not built")
    sino = Sinogram(rng.standard_normal((20, 30)))
    a = sinogram_to_linogram(sino, 16, backend="python")
    b = sinogram_to_linogram(sino, 16, backend="cython")
    for cls in LineClass:
        np.testing.assert_allclose(a[cls], b[cls], atol=1e-13)


def test_resampling_approaches_exact_line_sums():
    errs = []
    for n in (32, 64, 128):
        ph, sino = phantom_sinogram(n, n)
        exact = fht_forward(ph)
        lin = sinogram_to_linogram(sino, n)
        errs.append(max(_rel(lin[c], exact[c]) for c in LineClass))
    assert errs[1] < 0.05 and errs[2] < 0.025
    assert errs[0] > errs[1] > errs[2]


def test_each_shift_keeps_the_mass():
    n = 128
    ph, sino = phantom_sinogram(n, n)
    mass = ph.data.sum()
    lin = sinogram_to_linogram(sino, n)
    for cls in LineClass:
        np.testing.assert_allclose(lin[cls].sum(axis=1), mass, rtol=1e-4)


def test_cubic_beats_linear():
    n = 64
    ph, sino = phantom_sinogram(n, n)
    exact = fht_forward(ph)
    cub = sinogram_to_linogram(sino, n, interpolation="cubic")
    lin = sinogram_to_linogram(sino, n, interpolation="linear")
    assert _rel(cub.stacked(), exact.stacked()) < _rel(lin.stacked(), exact.stacked())


def test_counts_are_linear_in_samples():
    c = OpCount()
    sinogram_to_linogram(Sinogram(np.zeros((8, 14))), 8, c, interpolation="linear")
    samples = 4 * 2 * 64
    assert c.adds == samples * 5 and c.mults == samples * 7


def test_input_checks():
    with pytest.raises(DimensionError):
        sinogram_to_linogram(np.zeros((8, 14)), 8)
    with pytest.raises(DimensionError):
        sinogram_to_linogram(Sinogram(np.zeros((8, 14))), 0)
    with pytest.raises(GeometryError):
        sinogram_to_linogram(Sinogram(np.zeros((1, 14))), 8)
    with pytest.raises(ParameterError):
        sinogram_to_linogram(Sinogram(np.zeros((8, 14))), 8, interpolation="nearest")
