"""Spatial mode characterization of high-gain parametric down-conversion.

The package models the far-field correlation kernel of a strongly pumped
type-I down-conversion source, decomposes it into spatial modes, generates
pseudothermal frame stacks with the same statistics, and recovers the mode
structure back from intensity covariances along diametric cuts. A brute
force pixel-pair baseline validates the fast estimator.
"""

from .errors import (
    ContractError,
    DataError,
    DegenerateInputError,
    DomainError,
    EvanescentError,
    FormatError,
    GeometryError,
    NotMeasurableError,
    PhaseMatchingError,
    QuadratureError,
    ResourceError,
    SpdcError,
)
from .optics import (
    CrystalPumpConfig,
    calibrate_c2,
    collinear_angle,
    effective_pump_index,
    gain_kernel,
    longitudinal_mismatch,
    parametric_rate,
    reference_config,
    sellmeier_indices,
)
from .simulate import (
    CoherenceCurve,
    CorrelationMatrix,
    IntensityProfile,
    QuadratureSettings,
    WavevectorGrid,
    coherence_degree,
    far_field_intensity,
    g1_slice,
    gaussian_schell_correlation,
)
from .schmidt import (
    OneDDecomposition,
    SchmidtResult,
    diagonalize_1d,
    mode_fwhm,
    profile_fwhm,
    schmidt_number,
    tensor_mode,
    tensor_spectrum,
)
from .synth import ImageStack, SynthesisSpec, sample_field_frame, synthesize_stack
from .recon import (
    CovariancePair,
    SliceSet,
    accumulate_covariances,
    centroid_center,
    estimate_from_stack,
    estimate_g1_slice,
    extract_diametric_slice,
    extract_slices,
    reconstruct_pipeline,
)
from .bench import (
    BenchReport,
    Full4DResult,
    compare_methods,
    full4d_decompose,
    full4d_estimate,
)
from .stackio import read_stack, write_stack

__version__ = "0.1.0"
