"""Brute-force 4D reference estimator and method comparison timings.

The baseline treats each N x N frame as a flat vector of N^2 pixels and
builds the full pixel-pair covariance, so memory and eigensolver cost grow
as N^4 and N^6. It exists to validate the symmetric-cut estimator and to
quantify the speedup, not for production use; sizes above 64 are refused.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ResourceError
from .recon import clipped_sqrt, estimate_from_stack
from .schmidt import diagonalize_1d, tensor_mode, tensor_spectrum
from .synth import ImageStack

__all__ = [
    "FULL4D_MAX_SIZE",
    "Full4DResult",
    "BenchReport",
    "full4d_estimate",
    "full4d_decompose",
    "subspace_overlap",
    "cluster_indices",
    "joint_gap_count",
    "compare_methods",
]

FULL4D_MAX_SIZE = 64


@dataclass
class Full4DResult:
    """Flattened-pixel correlation estimate G(r, r') of shape (N^2, N^2)."""

    matrix: np.ndarray
    n_pixels: int
    n_frames: int
    clamped_mass: float
    metadata: dict = field(default_factory=dict)


@dataclass
class BenchReport:
    """Timings and agreement metrics for one stack size."""

    n_pixels: int
    n_frames: int
    timings_s: dict
    symmetric_total_s: float
    full4d_total_s: float
    speedup: float
    l1_top: float
    subspace: float
    top_m: int
    compared_m: int
    lambdas_symmetric: np.ndarray
    lambdas_full4d: np.ndarray


def full4d_estimate(stack: ImageStack) -> Full4DResult:
    """Correlation magnitude from the full pixel-pair covariance.

    Subtract-then-sqrt only: accidental covariance from adjacent frames
    (wrapped), removed before the entrywise square root. Refuses frames
    larger than FULL4D_MAX_SIZE per side.
    """
    m, n_rows, n_cols = stack.frames.shape
    if n_rows != n_cols:
        raise DataError("full 4D baseline expects square frames")
    if n_rows > FULL4D_MAX_SIZE:
        raise ResourceError(
            f"frame side {n_rows} exceeds the 4D baseline cap of {FULL4D_MAX_SIZE}"
        )
    if m < 2:
        raise DataError("need at least 2 frames")
    x = stack.frames.reshape(m, n_rows * n_cols).astype(float)
    delta = x - x.mean(axis=0)
    c_true = delta.T @ delta / m
    nxt = np.roll(np.arange(m), -1)
    c_acc = delta.T @ delta[nxt] / m
    c_acc = 0.5 * (c_acc + c_acc.T)
    root, clamped = clipped_sqrt(c_true - c_acc)
    return Full4DResult(
        matrix=root,
        n_pixels=n_rows,
        n_frames=m,
        clamped_mass=clamped,
        metadata={"pitch_mrad": stack.pitch_mrad},
    )


def full4d_decompose(result: Full4DResult, top_modes: int = 32):
    """Normalized eigenvalues (desc) and the leading eigenvectors.

    Returns (lambdas, modes) with modes[:, k] a flattened N^2 mode vector.
    Negative eigenvalues are clamped to zero before normalization.
    """
    w, v = np.linalg.eigh(0.5 * (result.matrix + result.matrix.T))
    order = np.argsort(w)[::-1]
    w = np.clip(w[order], 0.0, None)
    total = float(w.sum())
    if total <= 0.0:
        raise DataError("4D spectrum vanished; nothing to normalize")
    m = min(top_modes, v.shape[1])
    return w / total, v[:, order[:m]]


def subspace_overlap(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """cos of the largest principal angle between two column spans."""
    qa, _ = np.linalg.qr(basis_a)
    qb, _ = np.linalg.qr(basis_b)
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return float(np.min(s))


def _tied(smaller: float, larger: float, rel_tol: float) -> bool:
    return larger > 0.0 and (larger - smaller) <= rel_tol * larger


def cluster_indices(
    lambdas: np.ndarray, top: int, rel_tol: float = 0.1
) -> list[list[int]]:
    """Runs of near-degenerate weights covering at least the leading `top`.

    Weights must be sorted descending. The final run is extended past
    `top` while the tie chain continues (capped at 4 * top entries), so a
    degenerate multiplet is never cut in half by the requested count.
    """
    if lambdas.size == 0 or top < 1:
        return []
    cap = min(lambdas.size, 4 * top)
    groups = [[0]]
    k = 1
    while k < cap and (k < top or _tied(lambdas[k], lambdas[k - 1], rel_tol)):
        if _tied(lambdas[k], lambdas[k - 1], rel_tol):
            groups[-1].append(k)
        else:
            groups.append([k])
        k += 1
    return groups


def joint_gap_count(
    lam_a: np.ndarray, lam_b: np.ndarray, top: int, rel_tol: float = 0.3, cap: int = 0
) -> int:
    """Count delimiting the largest joint-gap block within the leading `top`.

    Leading subspaces of two noisy estimates are only comparable at a
    spectral gap both of them show: noise splits exact degeneracies
    differently on each side, so a cutoff inside a multiplet makes the
    span comparison ill-posed. The gap must be strong (rel_tol 0.3 by
    default) because noise-induced splits inside a multiplet reach 10-25%
    while genuine gaps between degenerate levels are larger. Prefers the
    largest qualifying count <= top; only when the requested count sits
    inside one unbroken run does it extend upward (capped at 4 * top,
    falling back to `top` itself if nothing qualifies).
    """
    if cap <= 0:
        cap = 4 * top
    cap = min(cap, lam_a.size, lam_b.size)
    top = min(top, cap)

    def gap_at(lam: np.ndarray, m: int) -> bool:
        return m >= lam.size or lam[m - 1] - lam[m] > rel_tol * lam[m - 1]

    for m in range(top, 0, -1):
        if gap_at(lam_a, m) and gap_at(lam_b, m):
            return m
    for m in range(top + 1, cap + 1):
        if gap_at(lam_a, m) and gap_at(lam_b, m):
            return m
    return top


def _median_time(fn, repeats: int):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, float(np.median(times))


def compare_methods(
    stack: ImageStack,
    top_m: int = 8,
    n_angles: int = 16,
    variant: str = "subtract-then-sqrt",
    repeats: int = 3,
) -> BenchReport:
    """Run both estimators on one stack and compare spectra, modes, time.

    Phases are timed separately (median of `repeats` runs each): the cut
    estimator splits into reconstruction and diagonalization, the baseline
    into covariance + square root and eigendecomposition. The same
    subtraction variant is used on both sides so the comparison isolates
    the dimensionality reduction. The subspace comparison extends top_m to
    the nearest spectral gap both estimates share; a degenerate multiplet
    split differently by noise on the two sides would otherwise make the
    span comparison ill-posed.
    """
    est, t_recon = _median_time(
        lambda: estimate_from_stack(stack, n_angles=n_angles, variant=variant), repeats
    )
    sym_result, t_diag = _median_time(
        lambda: tensor_spectrum(diagonalize_1d(est)), repeats
    )

    n = stack.frames.shape[1]
    cap = min(4 * top_m, sym_result.lambdas.size, n * n)
    full, t_cov = _median_time(lambda: full4d_estimate(stack), repeats)
    (lam4, modes4), t_eig = _median_time(
        lambda: full4d_decompose(full, top_modes=cap), repeats
    )
    m_eff = joint_gap_count(sym_result.lambdas, lam4, top_m, cap=cap)

    lam_sym = sym_result.lambdas[:top_m]
    lam_full = lam4[:top_m]
    l1 = float(np.sum(np.abs(lam_sym - lam_full)))

    # Cut grid and pixel grid share the pitch; embed each product mode at
    # the centre the reconstruction actually used before flattening.
    side = est.grid.n_points
    half = (side - 1) // 2
    row0 = int(est.metadata.get("center_row", stack.center_row)) - half
    col0 = int(est.metadata.get("center_col", stack.center_col)) - half
    sym_modes = np.empty((n * n, m_eff))
    for k in range(m_eff):
        u = np.zeros((n, n))
        u[row0 : row0 + side, col0 : col0 + side] = tensor_mode(sym_result, k)
        sym_modes[:, k] = u.ravel()
    overlap = subspace_overlap(sym_modes, modes4[:, :m_eff])

    t_sym = t_recon + t_diag
    t_full = t_cov + t_eig
    return BenchReport(
        n_pixels=n,
        n_frames=stack.n_frames,
        timings_s={
            "symmetric_reconstruct": t_recon,
            "symmetric_diagonalize": t_diag,
            "full4d_covariance_sqrt": t_cov,
            "full4d_eigendecompose": t_eig,
        },
        symmetric_total_s=t_sym,
        full4d_total_s=t_full,
        speedup=t_full / t_sym if t_sym > 0.0 else float("inf"),
        l1_top=l1,
        subspace=overlap,
        top_m=top_m,
        compared_m=m_eff,
        lambdas_symmetric=lam_sym.copy(),
        lambdas_full4d=lam_full.copy(),
    )
