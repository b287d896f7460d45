"""Shared fixtures: one reference theory kernel and one Schell-model kernel.

Both are expensive enough (or reused widely enough) to warrant session
scope; tests must not mutate them.
"""

import pytest

from spdcmodes.optics import reference_config
from spdcmodes.schmidt import diagonalize_1d, tensor_spectrum
from spdcmodes.simulate import (
    QuadratureSettings,
    WavevectorGrid,
    g1_slice,
    gaussian_schell_correlation,
)


@pytest.fixture(scope="session")
def ref_config():
    return reference_config(g=1.49)


@pytest.fixture(scope="session")
def grid64():
    return WavevectorGrid(n_points=64, pitch_mrad=0.625)


@pytest.fixture(scope="session")
def theory64(ref_config, grid64):
    return g1_slice(ref_config, grid64, QuadratureSettings())


@pytest.fixture(scope="session")
def one_d64(theory64):
    return diagonalize_1d(theory64)


@pytest.fixture(scope="session")
def result64(one_d64):
    return tensor_spectrum(one_d64)


@pytest.fixture(scope="session")
def gsm_grid():
    return WavevectorGrid(n_points=32, pitch_mrad=0.625)


@pytest.fixture(scope="session")
def gsm_kernel(gsm_grid):
    # widths scale with the grid span so the speckle grain is resolved
    span = gsm_grid.n_points * gsm_grid.pitch_mrad
    return gaussian_schell_correlation(
        gsm_grid,
        sigma_intensity_mrad=0.15 * span,
        sigma_coherence_mrad=0.1 * span,
        amplitude=1000.0,
    )


@pytest.fixture(scope="session")
def gsm_one_d(gsm_kernel):
    return diagonalize_1d(gsm_kernel)
