"""Coherent-state frames, FBI transforms and semiclassical quantization on the flat torus."""

__version__ = "0.1.0"

from .coherent import CoherentPoint, alpha, coherent_coeffs, coherent_samples, euclid_gaussian_ft
from .dynamics import Superposition, ell_radius, invariance_experiment, propagate
from .errors import (
    BandLimitError,
    ConfigError,
    QuantizationError,
    ResourceCapError,
    SolverError,
    TorusError,
    UnattainableToleranceError,
)
from .fbi import (
    PhaseSpaceField,
    analyze,
    frame_constant,
    frame_multiplier,
    husimi,
    reconstruct_error,
    synthesize,
    truncation_radius,
)
from .grid import FourierField, TorusGrid, forward_coeffs, inner_product, inverse_samples, periodize
from .quantize import OperatorMatrix, apply_kn, ellipticity_check, kn_matrix, symbol_coeff, weyl_matrix
from .spectral import EigenDecomposition, count_states, eigendecompose, localization_radius, sublevel_volume
from .symbols import Symbol, symbol_from_spec

__all__ = [
    "BandLimitError",
    "CoherentPoint",
    "ConfigError",
    "EigenDecomposition",
    "FourierField",
    "OperatorMatrix",
    "PhaseSpaceField",
    "QuantizationError",
    "ResourceCapError",
    "SolverError",
    "Superposition",
    "Symbol",
    "TorusError",
    "TorusGrid",
    "UnattainableToleranceError",
    "alpha",
    "analyze",
    "apply_kn",
    "coherent_coeffs",
    "coherent_samples",
    "count_states",
    "eigendecompose",
    "ell_radius",
    "ellipticity_check",
    "euclid_gaussian_ft",
    "forward_coeffs",
    "frame_constant",
    "frame_multiplier",
    "husimi",
    "inner_product",
    "invariance_experiment",
    "inverse_samples",
    "kn_matrix",
    "localization_radius",
    "periodize",
    "propagate",
    "reconstruct_error",
    "symbol_coeff",
    "symbol_from_spec",
    "sublevel_volume",
    "synthesize",
    "truncation_radius",
    "weyl_matrix",
]
