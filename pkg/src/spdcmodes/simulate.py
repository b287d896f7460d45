"""Far-field correlation kernels of a high-gain down-conversion source.

The central object is the one-dimensional correlation slice G(q, q') on a
uniform grid of transverse wavevectors along a line through the beam axis.
Radial symmetry of the pump reduces the transverse integral to a single
radial quadrature with a Bessel-J0 angular factor:

    G(q, q') = C1 * 2 pi / (k_sz k'_sz) * cos((dk - dk') L / 2)
               * integral_0^inf rho d rho J0(|q - q'| rho) I_p(rho)
                 * K(q, rho) K(q', rho)

where K(q, rho) = L * sinhc(Gamma L) is the longitudinal gain response at
local pump intensity I_p(rho) and mismatch dk(q).  The integral is done by
Gauss-Legendre quadrature on [0, cutoff * w_p] with node doubling until the
matrix stops changing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .errors import DataError, DegenerateInputError, DomainError, QuadratureError
from .optics import (
    CrystalPumpConfig,
    gain_kernel,
    longitudinal_mismatch,
    parametric_rate,
    pump_intensity,
    signal_wavenumber,
)

__all__ = [
    "WavevectorGrid",
    "QuadratureSettings",
    "CorrelationMatrix",
    "IntensityProfile",
    "CoherenceCurve",
    "g1_slice",
    "far_field_intensity",
    "coherence_degree",
    "gaussian_schell_correlation",
]

_PROVENANCES = ("theory", "reconstructed")


@dataclass(frozen=True)
class WavevectorGrid:
    """Uniform angular grid along one transverse direction.

    n_points samples at pitch_mrad spacing, centred so that index
    n_points // 2 sits exactly on the axis.  External angles are mrad;
    conversion to wavevectors uses q = angle * |k_s|.
    """

    n_points: int = 256
    pitch_mrad: float = 0.625

    def __post_init__(self) -> None:
        if self.n_points < 3:
            raise DomainError(f"grid needs at least 3 points, got {self.n_points}")
        if self.pitch_mrad <= 0.0:
            raise DomainError(f"pitch {self.pitch_mrad} mrad must be positive")

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    def angles_mrad(self) -> np.ndarray:
        idx = np.arange(self.n_points, dtype=float) - self.center_index
        return idx * self.pitch_mrad

    def q_values(self, config: CrystalPumpConfig) -> np.ndarray:
        """Signed transverse wavevectors in rad/um."""
        return self.angles_mrad() * 1e-3 * signal_wavenumber(config)


@dataclass(frozen=True)
class QuadratureSettings:
    """Radial quadrature controls.

    Starts at `nodes` Gauss-Legendre points on [0, cutoff_waists * w_p] and
    doubles until the sup-norm relative change of the result drops below
    rel_tol, at most max_doublings times.
    """

    nodes: int = 256
    rel_tol: float = 1e-6
    max_doublings: int = 5
    cutoff_waists: float = 5.0

    def __post_init__(self) -> None:
        if self.nodes < 8:
            raise DomainError("quadrature needs at least 8 nodes")
        if self.rel_tol <= 0.0:
            raise DomainError("rel_tol must be positive")
        if self.max_doublings < 0:
            raise DomainError("max_doublings must be non-negative")
        if self.cutoff_waists <= 0.0:
            raise DomainError("cutoff_waists must be positive")


@dataclass
class CorrelationMatrix:
    """Symmetric correlation kernel sampled on a wavevector grid.

    provenance records whether the matrix came from the model ("theory")
    or from intensity statistics ("reconstructed").  The diagonal is the
    far-field intensity and must be non-negative.
    """

    matrix: np.ndarray
    grid: WavevectorGrid
    provenance: str = "theory"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DataError(f"correlation matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.grid.n_points:
            raise DataError(
                f"matrix size {m.shape[0]} does not match grid ({self.grid.n_points})"
            )
        if not np.all(np.isfinite(m)):
            raise DataError("correlation matrix contains non-finite entries")
        scale = float(np.max(np.abs(m)))
        asym = float(np.max(np.abs(m - m.T)))
        if asym > 1e-10 * max(scale, 1e-300):
            raise DataError(f"matrix asymmetry {asym:.3e} exceeds tolerance")
        if np.any(np.diag(m) < 0.0):
            raise DataError("correlation diagonal has negative entries")
        if self.provenance not in _PROVENANCES:
            raise DataError(f"unknown provenance {self.provenance!r}")
        self.matrix = m

    def diagonal_intensity(self) -> "IntensityProfile":
        return IntensityProfile(np.diag(self.matrix).copy(), self.grid,
                                metadata=dict(self.metadata))


@dataclass
class IntensityProfile:
    """Far-field intensity along the grid line (arbitrary units)."""

    values: np.ndarray
    grid: WavevectorGrid
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.grid.n_points:
            raise DataError("intensity length does not match grid")
        if not np.all(np.isfinite(v)):
            raise DataError("intensity contains non-finite values")
        if np.any(v < 0.0):
            raise DataError("intensity has negative entries")
        self.values = v

    def total(self) -> float:
        """Total 2D far-field intensity reconstructed from the radial line.

        The source is isotropic, so the full-plane integral follows from
        the line profile with the polar Jacobian:
        2 pi int I(q) q dq = pi * sum |angle| I * pitch on the signed grid
        (each radius appears on both half-lines).  Units: intensity *
        mrad^2.
        """
        ang = np.abs(self.grid.angles_mrad())
        return float(np.pi * np.sum(self.values * ang) * self.grid.pitch_mrad)

    def line_total(self) -> float:
        """Plain 1D integral along the sampled line (intensity * mrad)."""
        return float(np.sum(self.values) * self.grid.pitch_mrad)


@dataclass
class CoherenceCurve:
    """Normalized coherence degree averaged over equal-offset pairs.

    degree[d] is the intensity-weighted mean of
    G(q, q+d)/sqrt(G(q,q) G(q+d,q+d)) over supported pairs separated by
    offsets_mrad[d], with weights I(q) I(q+d); spread[d] is the weighted
    standard deviation and residual the worst spread across offsets with
    at least two pairs.  A Schell-model kernel has residual ~ 0; weighting
    matters because dim border pixels see a very different local
    coherence length than the bright centre.
    """

    offsets_mrad: np.ndarray
    degree: np.ndarray
    spread: np.ndarray
    pair_counts: np.ndarray
    residual: float


def _radial_nodes(config: CrystalPumpConfig, settings: QuadratureSettings, n_nodes: int):
    """Gauss-Legendre nodes/weights on [0, cutoff * w_p], in micrometres."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * settings.cutoff_waists * config.w_p
    return half * (x + 1.0), half * w


def _kernel_table(config: CrystalPumpConfig, abs_q: np.ndarray, rho: np.ndarray):
    """Longitudinal response K(q, rho) and mismatch dk(q), vectorized."""
    dk = longitudinal_mismatch(abs_q, config)
    ip = pump_intensity(rho, config)
    gamma = parametric_rate(
        np.asarray(dk)[:, None], ip[None, :], abs_q[:, None], config
    )
    return gain_kernel(gamma, config.L), np.asarray(dk, dtype=float)


def _converged(build, settings: QuadratureSettings):
    """Run `build(n_nodes)` with node doubling until sup-norm stationary."""
    n_nodes = settings.nodes
    prev = build(n_nodes)
    change = None
    for _ in range(settings.max_doublings):
        n_nodes *= 2
        cur = build(n_nodes)
        scale = float(np.max(np.abs(cur)))
        if scale == 0.0:
            return cur, n_nodes, 0.0
        change = float(np.max(np.abs(cur - prev))) / scale
        if change < settings.rel_tol:
            return cur, n_nodes, change
        prev = cur
    if settings.max_doublings == 0:
        return prev, n_nodes, 0.0
    raise QuadratureError(
        f"radial quadrature not converged after {n_nodes} nodes "
        f"(relative change {change:.3e} > {settings.rel_tol:.1e})",
        estimate=prev if change is None else cur,
        achieved_change=change,
    )


def g1_slice(
    config: CrystalPumpConfig,
    grid: WavevectorGrid | None = None,
    quadrature: QuadratureSettings | None = None,
) -> CorrelationMatrix:
    """First-order correlation G(q, q') along a line through the axis.

    Returns a symmetric matrix on the signed grid; the diagonal equals the
    far-field intensity.  Raises QuadratureError (with the best estimate
    attached) when node doubling fails to converge.
    """
    grid = grid or WavevectorGrid()
    quadrature = quadrature or QuadratureSettings()
    n = grid.n_points
    q = grid.q_values(config)
    abs_q = np.abs(q)
    pitch_q = grid.pitch_mrad * 1e-3 * signal_wavenumber(config)

    ks = signal_wavenumber(config)
    k_sz = np.sqrt(ks * ks - q * q)

    def build(n_nodes: int) -> np.ndarray:
        rho, w = _radial_nodes(config, quadrature, n_nodes)
        kern, dk = _kernel_table(config, abs_q, rho)
        ip = pump_intensity(rho, config)
        w_eff = w * rho * ip
        # J0 argument depends only on the index offset d = |i - j|.
        bess = j0(np.outer(np.arange(n) * pitch_q, rho))
        base = np.empty((n, n))
        for d in range(n):
            s = (kern[: n - d] * kern[d:]) @ (w_eff * bess[d])
            idx = np.arange(n - d)
            base[idx, idx + d] = s
            base[idx + d, idx] = s
        phase = np.cos(np.subtract.outer(dk, dk) * (0.5 * config.L))
        g = config.C1 * 2.0 * np.pi * phase * base / np.outer(k_sz, k_sz)
        return 0.5 * (g + g.T)

    matrix, n_nodes, change = _converged(build, quadrature)
    meta = {"quad_nodes": n_nodes, "quad_change": change, "gain": config.g}
    return CorrelationMatrix(matrix, grid, provenance="theory", metadata=meta)


def far_field_intensity(
    config: CrystalPumpConfig,
    grid: WavevectorGrid | None = None,
    quadrature: QuadratureSettings | None = None,
) -> IntensityProfile:
    """Diagonal of the correlation kernel, computed without the J0 table.

    Much faster than extracting the diagonal of g1_slice; identical values.
    """
    grid = grid or WavevectorGrid()
    quadrature = quadrature or QuadratureSettings()
    q = grid.q_values(config)
    abs_q = np.abs(q)
    ks = signal_wavenumber(config)
    k_sz_sq = ks * ks - q * q

    def build(n_nodes: int) -> np.ndarray:
        rho, w = _radial_nodes(config, quadrature, n_nodes)
        kern, _ = _kernel_table(config, abs_q, rho)
        ip = pump_intensity(rho, config)
        return config.C1 * 2.0 * np.pi * (kern * kern) @ (w * rho * ip) / k_sz_sq

    values, n_nodes, change = _converged(build, quadrature)
    meta = {"quad_nodes": n_nodes, "quad_change": change, "gain": config.g}
    return IntensityProfile(values, grid, metadata=meta)


def coherence_degree(
    corr: CorrelationMatrix, support_rel: float = 1e-6
) -> CoherenceCurve:
    """Offset-averaged coherence degree of a correlation kernel.

    Pairs are restricted to grid points whose intensity exceeds
    support_rel times the peak.  The residual measures how far the kernel
    is from depending on q - q' alone.
    """
    g = corr.matrix
    inten = np.diag(g)
    peak = float(np.max(inten))
    if peak <= 0.0:
        raise DegenerateInputError("correlation kernel has no intensity on the grid")
    sup = inten > support_rel * peak
    norm = np.sqrt(inten)
    n = g.shape[0]

    offsets, degree, spread, counts = [], [], [], []
    for d in range(n):
        i = np.arange(n - d)
        ok = sup[i] & sup[i + d]
        if not np.any(ok):
            continue
        ii = i[ok]
        vals = g[ii, ii + d] / (norm[ii] * norm[ii + d])
        w = inten[ii] * inten[ii + d]
        mean = float(np.sum(w * vals) / np.sum(w))
        var = float(np.sum(w * (vals - mean) ** 2) / np.sum(w))
        offsets.append(d * corr.grid.pitch_mrad)
        degree.append(mean)
        spread.append(float(np.sqrt(max(var, 0.0))))
        counts.append(int(ok.sum()))

    counts_arr = np.asarray(counts)
    spread_arr = np.asarray(spread)
    multi = counts_arr >= 2
    residual = float(np.max(spread_arr[multi])) if np.any(multi) else 0.0
    return CoherenceCurve(
        offsets_mrad=np.asarray(offsets),
        degree=np.asarray(degree),
        spread=spread_arr,
        pair_counts=counts_arr,
        residual=residual,
    )


def gaussian_schell_correlation(
    grid: WavevectorGrid,
    sigma_intensity_mrad: float,
    sigma_coherence_mrad: float,
    amplitude: float = 1.0,
) -> CorrelationMatrix:
    """Gaussian Schell-model kernel on the grid (exactly factorable form).

    G(x, x') = A exp(-(x^2 + x'^2) / (4 s_I^2)) exp(-(x - x')^2 / (2 s_c^2))

    with x in mrad.  Useful as a reference kernel with a known geometric
    eigenvalue ladder.
    """
    if sigma_intensity_mrad <= 0.0 or sigma_coherence_mrad <= 0.0:
        raise DomainError("Schell-model widths must be positive")
    if amplitude <= 0.0:
        raise DomainError("Schell-model amplitude must be positive")
    x = grid.angles_mrad()
    env = np.exp(-(x * x) / (4.0 * sigma_intensity_mrad**2))
    diff = np.subtract.outer(x, x)
    coh = np.exp(-(diff * diff) / (2.0 * sigma_coherence_mrad**2))
    g = amplitude * np.outer(env, env) * coh
    meta = {
        "sigma_intensity_mrad": sigma_intensity_mrad,
        "sigma_coherence_mrad": sigma_coherence_mrad,
    }
    return CorrelationMatrix(0.5 * (g + g.T), grid, provenance="theory", metadata=meta)
