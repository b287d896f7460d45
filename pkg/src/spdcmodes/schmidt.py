"""Mode decomposition of correlation kernels.

A rotationally factorable two-dimensional field has correlation
G2(x, y; x', y') = G(x, x') G(y, y'), so its mode structure follows from a
single symmetric eigenproblem: eigenpairs (mu_i, v_i) of the 1D kernel
combine into product modes v_i(x) v_j(y) with weights mu_i mu_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DataError, DegenerateInputError, NotMeasurableError
from .simulate import CorrelationMatrix, WavevectorGrid

__all__ = [
    "OneDDecomposition",
    "SchmidtResult",
    "diagonalize_1d",
    "tensor_spectrum",
    "tensor_mode",
    "schmidt_number",
    "profile_fwhm",
    "mode_fwhm",
]

# Eigenvalues below this fraction of the largest are numerically
# indistinguishable from zero and are clamped exactly.
_EIGEN_CLAMP_REL = 1e-12


@dataclass
class OneDDecomposition:
    """Eigen-decomposition of a 1D correlation kernel.

    eigenvalues are sorted descending with near-zero (and any negative)
    values clamped to exactly 0.  modes[:, i] is the i-th eigenvector,
    sign-fixed so its largest-magnitude entry is positive.  negative_mass
    records the total magnitude of clamped negative eigenvalues, a
    diagnostic for reconstructed kernels.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    grid: WavevectorGrid
    negative_mass: float = 0.0
    metadata: dict = field(default_factory=dict)

    def mode(self, i: int) -> np.ndarray:
        return self.modes[:, i]


@dataclass
class SchmidtResult:
    """Product-mode spectrum of the separable 2D kernel.

    lambdas holds every product weight mu_i mu_j / (sum mu)^2 sorted by
    (weight desc, i+j asc, i asc); index_pairs[k] gives the (i, j) for
    lambdas[k].  The normalization uses the full untruncated eigenvalue
    sum, so lambdas sums to one by construction.
    """

    lambdas: np.ndarray
    index_pairs: np.ndarray
    one_d: OneDDecomposition

    def top(self, m: int) -> np.ndarray:
        return self.lambdas[:m]


def diagonalize_1d(corr: CorrelationMatrix) -> OneDDecomposition:
    """Symmetric eigendecomposition with descending, clamped eigenvalues."""
    m = 0.5 * (corr.matrix + corr.matrix.T)
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    w = w[order]
    v = v[:, order]

    scale = float(np.max(np.abs(w))) if w.size else 0.0
    neg = w < 0.0
    negative_mass = float(-np.sum(w[neg]))
    w = np.where(np.abs(w) < _EIGEN_CLAMP_REL * scale, 0.0, w)
    w[w < 0.0] = 0.0

    # Deterministic sign: largest-|entry| component points up.
    pick = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[pick, np.arange(v.shape[1])])
    signs[signs == 0.0] = 1.0
    v = v * signs

    return OneDDecomposition(
        eigenvalues=w,
        modes=v,
        grid=corr.grid,
        negative_mass=negative_mass,
        metadata=dict(corr.metadata),
    )


def tensor_spectrum(one_d: OneDDecomposition) -> SchmidtResult:
    """All product weights of the separable 2D kernel, sorted and normalized."""
    mu = one_d.eigenvalues
    total = float(np.sum(mu))
    if total <= 0.0:
        raise DegenerateInputError("1D spectrum has no positive eigenvalues")
    n = mu.size
    lam = np.outer(mu, mu).ravel() / (total * total)
    ii = np.repeat(np.arange(n), n)
    jj = np.tile(np.arange(n), n)
    # lexsort uses the last key as primary: weight desc, then i+j, then i.
    order = np.lexsort((ii, ii + jj, -lam))
    return SchmidtResult(
        lambdas=lam[order],
        index_pairs=np.column_stack((ii[order], jj[order])),
        one_d=one_d,
    )


def tensor_mode(result: SchmidtResult, k: int) -> np.ndarray:
    """2D mode u_k(x, y) = v_i(x) v_j(y); axis 0 is x.

    The mode of the swapped pair (j, i) is exactly the transpose.
    """
    i, j = result.index_pairs[k]
    return np.outer(result.one_d.mode(i), result.one_d.mode(j))


def schmidt_number(result: SchmidtResult) -> float:
    """Effective 2D mode count K = 1 / sum(lambda^2).

    For a separable kernel this equals the square of the 1D mode count.
    """
    lam = result.lambdas
    total = float(np.sum(lam))
    if abs(total - 1.0) > 1e-9:
        raise ContractError(f"normalized spectrum sums to {total!r}, expected 1")
    return float(1.0 / np.sum(lam * lam))


def profile_fwhm(values: np.ndarray, pitch_mrad: float) -> float:
    """Full width at half maximum of a sampled profile, in mrad.

    Crossings of the half level are located by linear interpolation on
    either side of the peak.  Raises NotMeasurableError when the profile
    is flat or the half level is not reached inside the grid.
    """
    p = np.abs(np.asarray(values, dtype=float))
    if p.ndim != 1 or p.size < 3:
        raise DataError("profile must be a 1D array of at least 3 samples")
    if not np.all(np.isfinite(p)):
        raise DataError("profile contains non-finite values")
    peak = float(np.max(p))
    if peak <= 0.0 or float(np.min(p)) == peak:
        raise NotMeasurableError("profile is flat; width undefined")
    imax = int(np.argmax(p))
    half = 0.5 * peak

    left = None
    for k in range(imax - 1, -1, -1):
        if p[k] <= half:
            left = k + (half - p[k]) / (p[k + 1] - p[k])
            break
    right = None
    for k in range(imax, p.size - 1):
        if p[k + 1] <= half:
            right = k + (p[k] - half) / (p[k] - p[k + 1])
            break
    if left is None or right is None:
        raise NotMeasurableError("half level not reached inside the grid")
    return float((right - left) * pitch_mrad)


def mode_fwhm(mode: np.ndarray, grid: WavevectorGrid) -> float:
    """FWHM (mrad) of |u| along the central cut of a 2D mode.

    The cut fixes the second axis at the grid centre, so for a product
    mode v_i(x) v_j(y) it measures the width of v_i.
    """
    u = np.asarray(mode)
    if u.ndim != 2 or u.shape[0] != grid.n_points or u.shape[1] != grid.n_points:
        raise DataError("mode shape does not match grid")
    return profile_fwhm(np.abs(u[:, grid.center_index]), grid.pitch_mrad)
