"""Eigendecomposition and product-spectrum checks.

The Schell-model kernel has a closed-form geometric eigenvalue ladder:
with a = 1/(4 s_I^2), b = 1/(2 s_c^2), c = sqrt(a^2 + 2ab) the continuum
ratio of consecutive eigenvalues is b / (a + b + c) and the leading
eigenvalue is A sqrt(pi / (a + b + c)) / pitch on a fine grid.  Both are
independent of the solver under test.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdcmodes.errors import (
    ContractError,
    DataError,
    DegenerateInputError,
    DomainError,
    NotMeasurableError,
)
from spdcmodes.schmidt import (
    diagonalize_1d,
    mode_fwhm,
    profile_fwhm,
    schmidt_number,
    tensor_mode,
    tensor_spectrum,
)
from spdcmodes.simulate import (
    CorrelationMatrix,
    WavevectorGrid,
    gaussian_schell_correlation,
)


def _random_kernel(seed, n=12):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    m = a @ a.T  # PSD with generic spectrum
    m = m - np.diag(np.diag(m)) + np.diag(np.abs(np.diag(m)))
    grid = WavevectorGrid(n_points=n, pitch_mrad=1.0)
    return CorrelationMatrix(0.5 * (m + m.T), grid)


class TestDiagonalize1D:
    def test_descending_nonnegative(self, one_d64):
        mu = one_d64.eigenvalues
        assert np.all(np.diff(mu) <= 0.0)
        assert np.all(mu >= 0.0)

    def test_modes_orthonormal(self, one_d64):
        v = one_d64.modes
        gram = v.T @ v
        assert np.abs(gram - np.eye(v.shape[1])).max() < 1e-10

    def test_round_trip(self, theory64, one_d64):
        rebuilt = (one_d64.modes * one_d64.eigenvalues) @ one_d64.modes.T
        err = np.linalg.norm(rebuilt - theory64.matrix)
        assert err < 1e-8 * max(1.0, np.linalg.norm(theory64.matrix))

    def test_sign_convention(self, one_d64):
        for k in range(6):
            v = one_d64.mode(k)
            assert v[np.argmax(np.abs(v))] > 0.0

    def test_exact_spectrum_on_diagonal_kernel(self):
        grid = WavevectorGrid(n_points=4, pitch_mrad=1.0)
        corr = CorrelationMatrix(np.diag([4.0, 1.0, 3.0, 2.0]), grid)
        one_d = diagonalize_1d(corr)
        np.testing.assert_allclose(one_d.eigenvalues, [4.0, 3.0, 2.0, 1.0])
        assert one_d.negative_mass == 0.0

    def test_metadata_carried_over(self):
        grid = WavevectorGrid(n_points=3, pitch_mrad=1.0)
        corr = CorrelationMatrix(np.eye(3), grid, metadata={"origin": "unit"})
        assert diagonalize_1d(corr).metadata["origin"] == "unit"

    def test_schell_ladder_matches_closed_form(self):
        grid = WavevectorGrid(n_points=128, pitch_mrad=0.2)
        corr = gaussian_schell_correlation(grid, 4.0, 2.0, amplitude=3.0)
        mu = diagonalize_1d(corr).eigenvalues
        a = 1.0 / (4 * 4.0**2)
        b = 1.0 / (2 * 2.0**2)
        c = np.sqrt(a * a + 2 * a * b)
        ratio = b / (a + b + c)
        np.testing.assert_allclose(mu[1:5] / mu[:4], ratio, rtol=1e-4)
        lam0 = 3.0 * np.sqrt(np.pi / (a + b + c)) / 0.2
        assert mu[0] == pytest.approx(lam0, rel=1e-6)

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_random_kernel_round_trip(self, seed):
        corr = _random_kernel(seed)
        one_d = diagonalize_1d(corr)
        rebuilt = (one_d.modes * one_d.eigenvalues) @ one_d.modes.T
        scale = max(1.0, np.abs(corr.matrix).max())
        # negative eigenvalues are clamped, so allow their mass back
        assert (
            np.abs(rebuilt - corr.matrix).max()
            <= one_d.negative_mass + 1e-9 * scale
        )


class TestTensorSpectrum:
    def test_normalized_and_sorted(self, result64):
        lam = result64.lambdas
        assert lam.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(lam) <= 1e-15)

    def test_product_structure(self, one_d64, result64):
        mu = one_d64.eigenvalues / one_d64.eigenvalues.sum()
        for k in range(10):
            i, j = result64.index_pairs[k]
            assert result64.lambdas[k] == pytest.approx(mu[i] * mu[j], rel=1e-12)

    def test_swapped_pairs_are_degenerate(self, result64):
        lam = result64.lambdas
        pairs = {tuple(p): lam[k] for k, p in enumerate(result64.index_pairs)}
        for (i, j), val in list(pairs.items())[:50]:
            assert pairs[(j, i)] == pytest.approx(val, rel=1e-12)

    def test_off_diagonal_weights_pair_up(self, result64):
        lam = result64.lambdas
        off = [k for k in range(lam.size) if result64.index_pairs[k][0]
               != result64.index_pairs[k][1]]
        # weights come in (i,j)/(j,i) twins, so sorted off-diagonal values
        # match themselves shifted by one inside each twin
        vals = np.sort(lam[off])
        np.testing.assert_allclose(vals[0::2], vals[1::2], rtol=1e-9)

    def test_empty_spectrum_rejected(self):
        grid = WavevectorGrid(n_points=3, pitch_mrad=1.0)
        corr = CorrelationMatrix(np.zeros((3, 3)), grid)
        with pytest.raises(DegenerateInputError):
            tensor_spectrum(diagonalize_1d(corr))

    def test_top_view(self, result64):
        np.testing.assert_array_equal(result64.top(5), result64.lambdas[:5])


class TestTensorMode:
    def test_outer_product_form(self, result64):
        k = 3
        i, j = result64.index_pairs[k]
        expected = np.outer(result64.one_d.mode(i), result64.one_d.mode(j))
        np.testing.assert_array_equal(tensor_mode(result64, k), expected)

    def test_transpose_relation(self, result64):
        pairs = [tuple(p) for p in result64.index_pairs]
        k = next(idx for idx, (i, j) in enumerate(pairs) if i != j)
        i, j = pairs[k]
        k_swap = pairs.index((j, i))
        np.testing.assert_array_equal(
            tensor_mode(result64, k), tensor_mode(result64, k_swap).T
        )

    def test_orthonormal_as_flattened_vectors(self, result64):
        vecs = np.stack([tensor_mode(result64, k).ravel() for k in range(8)])
        gram = vecs @ vecs.T
        assert np.abs(gram - np.eye(8)).max() < 1e-10


class TestSchmidtNumber:
    def test_square_of_1d_count(self, one_d64, result64):
        mu = one_d64.eigenvalues / one_d64.eigenvalues.sum()
        k1 = 1.0 / np.sum(mu * mu)
        assert schmidt_number(result64) == pytest.approx(k1 * k1, rel=1e-9)

    def test_single_mode_gives_one(self):
        grid = WavevectorGrid(n_points=3, pitch_mrad=1.0)
        corr = CorrelationMatrix(np.diag([2.0, 0.0, 0.0]), grid)
        result = tensor_spectrum(diagonalize_1d(corr))
        assert schmidt_number(result) == pytest.approx(1.0)

    def test_unnormalized_spectrum_rejected(self, result64):
        broken = type(result64)(
            lambdas=result64.lambdas * 2.0,
            index_pairs=result64.index_pairs,
            one_d=result64.one_d,
        )
        with pytest.raises(ContractError):
            schmidt_number(broken)


class TestProfileFwhm:
    def test_triangle_oracle(self):
        vals = np.array([0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0])
        # half maximum 1.5 crossed at samples 1.5 and 4.5
        assert profile_fwhm(vals, 1.0) == pytest.approx(3.0)

    def test_pitch_scales_linearly(self):
        vals = np.array([0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0])
        assert profile_fwhm(vals, 0.5) == pytest.approx(1.5)

    def test_gaussian_matches_analytic_width(self):
        x = np.linspace(-10, 10, 401)
        sigma = 1.7
        vals = np.exp(-x * x / (2 * sigma * sigma))
        pitch = x[1] - x[0]
        expected = 2 * np.sqrt(2 * np.log(2)) * sigma
        assert profile_fwhm(vals, pitch) == pytest.approx(expected, rel=1e-3)

    def test_flat_profile_not_measurable(self):
        with pytest.raises(NotMeasurableError):
            profile_fwhm(np.ones(9), 1.0)

    def test_unreached_half_maximum_not_measurable(self):
        vals = np.array([0.9, 0.95, 1.0, 0.95, 0.9])
        with pytest.raises(NotMeasurableError):
            profile_fwhm(vals, 1.0)

    def test_too_short_rejected(self):
        with pytest.raises(DataError):
            profile_fwhm(np.array([0.0, 1.0]), 1.0)


class TestModeFwhm:
    def test_separable_gaussian_mode(self):
        grid = WavevectorGrid(n_points=201, pitch_mrad=0.1)
        x = grid.angles_mrad()
        sigma = 2.1
        u = np.exp(-x * x / (4 * sigma * sigma))
        mode = np.outer(u, u)
        # half level of |u| itself sits at x = 2 sigma sqrt(ln 2)
        expected = 4 * sigma * np.sqrt(np.log(2))
        assert mode_fwhm(mode, grid) == pytest.approx(expected, rel=1e-3)
