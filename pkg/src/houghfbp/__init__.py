"""Fast filtered back projection with recursive ramp filters and the Fast Hough Transform.

Names are imported lazily so that ``houghfbp.cli`` can configure threading
before numpy loads.
"""
import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "Image": "types",
    "Sinogram": "types",
    "Linogram": "types",
    "LineClass": "types",
    "rmse": "types",
    "OpCount": "counting",
    "generate_shepp_logan": "phantom",
    "RadonGeometry": "radon",
    "forward_radon": "radon",
    "back_project_direct": "radon",
    "fbp_reference": "radon",
    "FirKernel": "filters",
    "IirFilterPair": "filters",
    "FitReport": "filters",
    "ramp_kernel": "filters",
    "fir_filter_row": "filters",
    "causal_target": "filters",
    "iir_impulse_response": "filters",
    "fit_iir": "filters",
    "apply_iir_symmetric": "filters",
    "StLine": "linogram",
    "st_to_rtheta": "linogram",
    "scaling_factor": "linogram",
    "sinogram_to_linogram": "linogram",
    "fht_forward": "fht",
    "fht_back_project": "fht",
    "ReconstructionConfig": "pipeline",
    "FitOptions": "pipeline",
    "reconstruct": "pipeline",
    "run_order_sweep": "pipeline",
    "run_size_sweep": "pipeline",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    if name in _EXPORTS:
        return getattr(importlib.import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module 'houghfbp' has no attribute {name!r}")
