"""Grid, quadrature, and correlation-kernel behavior.

The low-gain shape oracle is closed-form: as the drive vanishes the
radial integral factorizes and the far-field intensity reduces to
sinc^2 of the half-mismatch phase over the longitudinal components.
"""

import numpy as np
import pytest

from spdcmodes.errors import (
    DataError,
    DegenerateInputError,
    DomainError,
    QuadratureError,
)
from spdcmodes.optics import (
    idler_wavenumber,
    longitudinal_mismatch,
    reference_config,
    signal_wavenumber,
)
from spdcmodes.simulate import (
    CorrelationMatrix,
    IntensityProfile,
    QuadratureSettings,
    WavevectorGrid,
    coherence_degree,
    far_field_intensity,
    g1_slice,
    gaussian_schell_correlation,
)


class TestWavevectorGrid:
    def test_centering(self):
        grid = WavevectorGrid(n_points=5, pitch_mrad=0.5)
        assert grid.center_index == 2
        np.testing.assert_allclose(
            grid.angles_mrad(), [-1.0, -0.5, 0.0, 0.5, 1.0]
        )

    def test_even_count_center(self):
        grid = WavevectorGrid(n_points=4, pitch_mrad=1.0)
        assert grid.center_index == 2
        assert grid.angles_mrad()[2] == 0.0

    def test_q_conversion(self):
        grid = WavevectorGrid(n_points=3, pitch_mrad=2.0)
        config = reference_config()
        expected = np.array([-2.0, 0.0, 2.0]) * 1e-3 * signal_wavenumber(config)
        np.testing.assert_allclose(grid.q_values(config), expected)

    @pytest.mark.parametrize("kwargs", [dict(n_points=2), dict(pitch_mrad=0.0),
                                        dict(pitch_mrad=-1.0)])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(DomainError):
            WavevectorGrid(**{"n_points": 8, "pitch_mrad": 0.5, **kwargs})


class TestQuadratureSettings:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(nodes=7), dict(rel_tol=0.0), dict(max_doublings=-1),
         dict(cutoff_waists=0.0)],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(DomainError):
            QuadratureSettings(**kwargs)


class TestCorrelationMatrix:
    def _grid(self, n=4):
        return WavevectorGrid(n_points=n, pitch_mrad=1.0)

    def test_rejects_non_square(self):
        with pytest.raises(DataError):
            CorrelationMatrix(np.ones((3, 4)), self._grid(3))

    def test_rejects_grid_mismatch(self):
        with pytest.raises(DataError):
            CorrelationMatrix(np.eye(3), self._grid(4))

    def test_rejects_asymmetry(self):
        m = np.eye(4)
        m[0, 1] = 0.5
        with pytest.raises(DataError):
            CorrelationMatrix(m, self._grid())

    def test_rejects_negative_diagonal(self):
        m = -np.eye(4)
        with pytest.raises(DataError):
            CorrelationMatrix(m, self._grid())

    def test_rejects_nan(self):
        m = np.eye(4)
        m[2, 2] = np.nan
        with pytest.raises(DataError):
            CorrelationMatrix(m, self._grid())

    def test_rejects_unknown_provenance(self):
        with pytest.raises(DataError):
            CorrelationMatrix(np.eye(4), self._grid(), provenance="guessed")

    def test_diagonal_intensity_view(self):
        m = np.diag([1.0, 2.0, 3.0, 4.0])
        corr = CorrelationMatrix(m, self._grid(), metadata={"tag": 1})
        prof = corr.diagonal_intensity()
        np.testing.assert_allclose(prof.values, [1.0, 2.0, 3.0, 4.0])
        assert prof.metadata["tag"] == 1


class TestIntensityProfile:
    def test_total_uses_polar_weight(self):
        grid = WavevectorGrid(n_points=5, pitch_mrad=0.5)
        vals = np.array([1.0, 2.0, 3.0, 2.0, 1.0])
        prof = IntensityProfile(vals, grid)
        expected = np.pi * np.sum(vals * np.abs(grid.angles_mrad())) * 0.5
        assert prof.total() == pytest.approx(expected)
        assert prof.line_total() == pytest.approx(vals.sum() * 0.5)

    def test_rejects_negative_values(self):
        grid = WavevectorGrid(n_points=3, pitch_mrad=1.0)
        with pytest.raises(DataError):
            IntensityProfile(np.array([1.0, -0.1, 1.0]), grid)

    def test_rejects_length_mismatch(self):
        grid = WavevectorGrid(n_points=3, pitch_mrad=1.0)
        with pytest.raises(DataError):
            IntensityProfile(np.ones(4), grid)


class TestTheoryKernel:
    def test_symmetric_positive_diagonal(self, theory64):
        m = theory64.matrix
        np.testing.assert_allclose(m, m.T, atol=1e-12 * np.abs(m).max())
        assert np.all(np.diag(m) > 0.0)
        assert theory64.provenance == "theory"

    def test_metadata_records_quadrature(self, theory64):
        assert theory64.metadata["gain"] == 1.49
        assert theory64.metadata["quad_nodes"] >= 256
        assert theory64.metadata["quad_change"] < 1e-6

    def test_diagonal_matches_intensity_shortcut(self, ref_config, grid64):
        prof = far_field_intensity(ref_config, grid64, QuadratureSettings())
        diag = g1_slice(ref_config, grid64, QuadratureSettings()).matrix.diagonal()
        np.testing.assert_allclose(prof.values, diag, rtol=1e-9)

    def test_low_gain_shape_is_sinc_squared(self):
        config = reference_config(g=1e-4)
        grid = WavevectorGrid(n_points=64, pitch_mrad=0.625)
        prof = far_field_intensity(config, grid, QuadratureSettings())
        vals = prof.values / prof.values.max()

        q = np.abs(grid.q_values(config))
        ks, ki = signal_wavenumber(config), idler_wavenumber(config)
        ksz = np.sqrt(ks * ks - q * q)
        kiz = np.sqrt(ki * ki - q * q)
        phase = longitudinal_mismatch(q, config) * config.L / 2
        ref = np.sinc(phase / np.pi) ** 2 / (ksz * kiz)
        ref = ref / ref.max()
        assert np.abs(vals - ref).max() < 1e-4

    def test_intensity_grows_with_gain(self, grid64):
        quad = QuadratureSettings()
        lo = far_field_intensity(reference_config(g=1.0), grid64, quad)
        hi = far_field_intensity(reference_config(g=2.0), grid64, quad)
        assert hi.total() > lo.total()


class TestQuadratureControl:
    def test_failure_carries_best_estimate(self, ref_config):
        grid = WavevectorGrid(n_points=16, pitch_mrad=0.625)
        quad = QuadratureSettings(nodes=8, rel_tol=1e-16, max_doublings=1)
        with pytest.raises(QuadratureError) as info:
            g1_slice(ref_config, grid, quad)
        assert info.value.estimate is not None
        assert info.value.achieved_change > 1e-16

    def test_zero_doublings_returns_initial(self, ref_config):
        grid = WavevectorGrid(n_points=16, pitch_mrad=0.625)
        quad = QuadratureSettings(nodes=64, rel_tol=1e-16, max_doublings=0)
        corr = g1_slice(ref_config, grid, quad)
        assert corr.metadata["quad_nodes"] == 64

    def test_converged_result_stable_under_more_nodes(self, ref_config):
        grid = WavevectorGrid(n_points=16, pitch_mrad=0.625)
        a = g1_slice(ref_config, grid, QuadratureSettings())
        b = g1_slice(ref_config, grid, QuadratureSettings(nodes=1024))
        scale = np.abs(a.matrix).max()
        assert np.abs(a.matrix - b.matrix).max() < 1e-5 * scale


class TestSchellModel:
    def test_matrix_form(self):
        grid = WavevectorGrid(n_points=5, pitch_mrad=1.0)
        corr = gaussian_schell_correlation(grid, 2.0, 1.0, amplitude=3.0)
        x = grid.angles_mrad()
        i, j = 1, 4
        expected = (
            3.0
            * np.exp(-(x[i] ** 2 + x[j] ** 2) / (4 * 2.0**2))
            * np.exp(-((x[i] - x[j]) ** 2) / (2 * 1.0**2))
        )
        assert corr.matrix[i, j] == pytest.approx(expected, rel=1e-12)
        assert corr.metadata["sigma_intensity_mrad"] == 2.0
        assert corr.metadata["sigma_coherence_mrad"] == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [dict(sigma_intensity_mrad=0.0), dict(sigma_coherence_mrad=-1.0),
         dict(amplitude=0.0)],
    )
    def test_invalid_rejected(self, kwargs):
        grid = WavevectorGrid(n_points=8, pitch_mrad=1.0)
        args = dict(sigma_intensity_mrad=2.0, sigma_coherence_mrad=1.0,
                    amplitude=1.0)
        args.update(kwargs)
        with pytest.raises(DomainError):
            gaussian_schell_correlation(grid, **args)


class TestCoherenceDegree:
    def test_schell_kernel_is_exactly_homogeneous(self, gsm_kernel):
        curve = coherence_degree(gsm_kernel)
        assert curve.residual < 1e-10
        assert curve.degree[0] == pytest.approx(1.0)
        assert np.all(np.diff(curve.degree) < 1e-12)

    def test_theory_kernel_close_to_homogeneous(self, theory64):
        curve = coherence_degree(theory64)
        assert curve.residual < 0.1

    def test_zero_kernel_rejected(self):
        grid = WavevectorGrid(n_points=4, pitch_mrad=1.0)
        corr = CorrelationMatrix(np.zeros((4, 4)), grid)
        with pytest.raises(DegenerateInputError):
            coherence_degree(corr)
