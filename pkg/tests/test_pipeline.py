import numpy as np
import pytest

from houghfbp.counting import OpCount
from houghfbp.errors import ConfigError, FittingError
from houghfbp.filters import IirFilterPair, ramp_kernel
from houghfbp.pipeline import (
    BenchRecord,
    FitOptions,
    ReconstructionConfig,
    fitted_ramp_filters,
    phantom_sinogram,
    reconstruct,
    run_order_sweep,
    run_size_sweep,
    time_call,
    with_mode,
)
from houghfbp.radon import RadonGeometry, forward_radon
from houghfbp.types import Image, Sinogram, rmse

FAST_FIT = FitOptions(restarts=2)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 0},
        {"n": 2.5},
        {"n": 16, "num_angles": 0},
        {"n": 16, "filter_mode": "fft"},
        {"n": 16, "backproj_mode": "fourier"},
        {"n": 24, "backproj_mode": "fht"},
        {"n": 16, "filter_mode": "iir", "iir_order": 0},
        {"n": 16, "fir_half_length": -1},
    ],
)
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        ReconstructionConfig(**kwargs)


def test_config_defaults():
    cfg = ReconstructionConfig(32)
    assert (cfg.angles, cfg.half_length, cfg.horizon) == (32, 32, 32)
    assert with_mode(cfg, backproj_mode="fht").backproj_mode == "fht"


def test_angle_count_must_match():
    with pytest.raises(ConfigError):
        reconstruct(Sinogram(np.zeros((8, 30))), ReconstructionConfig(16, 16))
    with pytest.raises(ConfigError):
        reconstruct(np.zeros((16, 30)), ReconstructionConfig(16))


@pytest.mark.parametrize("mode", ["direct", "fht"])
@pytest.mark.parametrize("filt", ["fir", "iir"])
def test_zero_sinogram_reconstructs_zero(mode, filt):
    cfg = ReconstructionConfig(16, filter_mode=filt, backproj_mode=mode, iir=IirFilterPair([0.2], [-0.3]))
    out = reconstruct(Sinogram(np.zeros((16, 26))), cfg)
    assert not out.data.any()


@pytest.mark.parametrize("mode", ["direct", "fht"])
def test_point_reconstructs_at_its_pixel(mode):
    n = 32
    img = np.zeros((n, n))
    img[11, 21] = 1.0
    sino = forward_radon(Image(img), RadonGeometry.for_size(n))
    out = reconstruct(sino, ReconstructionConfig(n, backproj_mode=mode)).data
    assert np.unravel_index(np.argmax(out), out.shape) == (11, 21)
    # the band-limited ramp spreads the point over its neighbours but keeps its mass
    assert out.sum() == pytest.approx(1.0, abs=0.02)
    assert out[10:13, 20:23].sum() == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize("mode", ["direct", "fht"])
def test_phantom_reconstruction_quality(mode):
    ph, sino = phantom_sinogram(64)
    out = reconstruct(sino, ReconstructionConfig(64, backproj_mode=mode))
    assert rmse(out, ph) < 0.2
    assert out.data.sum() == pytest.approx(ph.data.sum(), rel=1e-3)
    assert np.isfinite(out.data).all()


def test_reconstruction_is_deterministic():
    _, sino = phantom_sinogram(32)
    cfg = ReconstructionConfig(32, filter_mode="iir", iir_order=2, backproj_mode="fht", fit=FAST_FIT)
    np.testing.assert_array_equal(reconstruct(sino, cfg).data, reconstruct(sino, cfg).data)


def test_iir_multiplications_scale_quadratically():
    mults = []
    for n in (32, 64):
        _, sino = phantom_sinogram(n)
        ops = OpCount()
        cfg = ReconstructionConfig(n, filter_mode="iir", iir=IirFilterPair([0.3, 0.1], [-0.2]), backproj_mode="fht")
        reconstruct(sino, cfg, ops)
        mults.append(ops.mults)
    assert mults[1] / mults[0] == pytest.approx(4.0, rel=0.05)


def test_fit_chain_is_cached_and_ordered():
    chain = fitted_ramp_filters(3, FAST_FIT, 32)
    assert chain is fitted_ramp_filters(3, FAST_FIT, 32)
    assert [p.feedforward_order for p, _ in chain] == [1, 2, 3]
    mses = [r.mse for _, r in chain]
    assert mses[0] >= mses[1] >= mses[2]


def test_fit_failure_propagates(monkeypatch):
    import houghfbp.pipeline as pipeline

    def boom(*a, **k):
        raise FittingError("no stable fit")

    monkeypatch.setattr(pipeline, "fit_iir", boom)
    opts = FitOptions(restarts=1, seed=987)
    cfg = ReconstructionConfig(16, filter_mode="iir", iir_order=1, fit=opts)
    with pytest.raises(FittingError):
        reconstruct(Sinogram(np.zeros((16, 26))), cfg)
    rows = run_order_sweep(16, None, [1], opts)
    assert rows[0]["status"] == "fitting" and np.isnan(rows[0]["rmse"])
    assert rows[-1]["order"] == "fir" and rows[-1]["status"] == "ok"


def test_order_sweep_rows():
    rows = run_order_sweep(32, None, [1, 2], FAST_FIT)
    assert [r["order"] for r in rows] == [1, 2, "fir"]
    assert all(r["status"] == "ok" and r["rmse"] > 0 for r in rows)
    with pytest.raises(ConfigError):
        run_order_sweep(32, None, [])


def test_size_sweep_records():
    recs = run_size_sweep([16, 32], repeats=1)
    assert [(r.n, r.mode) for r in recs] == [(16, "direct"), (16, "fht"), (32, "direct"), (32, "fht")]
    for r in recs:
        assert r.seconds > 0 and r.backproj_seconds > 0 and r.additions > 0
        assert set(r.as_row()) == {"n", "mode", "seconds", "backproj_seconds", "additions", "multiplications", "rmse"}
    with pytest.raises(ValueError):
        BenchRecord(1, "direct", 0.0, 0.0, 0, 0, 0.0)


def test_time_call_returns_result():
    calls = []
    best, out = time_call(lambda x: calls.append(x) or x * 2, 3, repeats=2, warmup=1)
    assert out == 6 and len(calls) == 3 and best >= 0
