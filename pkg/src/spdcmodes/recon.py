"""Correlation recovery from intensity statistics of a frame stack.

For a thermal-like field the intensity fluctuations obey
<dI(q) dI(q')> = |G(q, q')|^2, so an entrywise square root of the
fluctuation covariance recovers the correlation magnitude.  The
accidental (uncorrelated) part is estimated from adjacent-frame products,
which share static structure but not the speckle, and removed.

A radially symmetric source makes every diametric cut statistically
equivalent; cuts at several orientations are averaged at the covariance
level, before any square root.

Two orderings of the square root and the accidental subtraction are
implemented:

  "sqrt-then-subtract"  (default)  sqrt(C_true) - sqrt(C_acc)
  "subtract-then-sqrt"             sqrt(C_true - C_acc)

All square roots are entrywise with negative entries clamped to zero
first.  The two variants agree as the frame count grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DegenerateInputError, DomainError, GeometryError
from .schmidt import SchmidtResult, diagonalize_1d, tensor_spectrum
from .simulate import CorrelationMatrix, WavevectorGrid
from .synth import ImageStack

__all__ = [
    "SliceSet",
    "CovariancePair",
    "VARIANTS",
    "extract_diametric_slice",
    "extract_slices",
    "default_slice_length",
    "accumulate_covariances",
    "estimate_g1_slice",
    "estimate_from_stack",
    "reconstruct_pipeline",
    "centroid_center",
    "clipped_sqrt",
]

VARIANTS = ("sqrt-then-subtract", "subtract-then-sqrt")


@dataclass
class SliceSet:
    """Per-frame intensity samples along diametric cuts.

    data has shape (n_frames, n_angles, length) with odd length, so the
    middle sample of every cut sits exactly on the centre pixel (q = 0).
    """

    data: np.ndarray
    angles_rad: np.ndarray
    pitch_mrad: float

    def __post_init__(self) -> None:
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 3:
            raise DataError("slice data must be (frame, angle, sample)")
        if d.shape[2] % 2 == 0:
            raise DataError(f"slice length {d.shape[2]} must be odd")
        if d.shape[1] != np.asarray(self.angles_rad).size:
            raise DataError("angle count does not match data")
        if self.pitch_mrad <= 0.0:
            raise DataError("pitch must be positive")
        self.data = d

    @property
    def length(self) -> int:
        return self.data.shape[2]

    @property
    def center_sample(self) -> int:
        return (self.length - 1) // 2


@dataclass
class CovariancePair:
    """Orientation-averaged true and accidental intensity covariances."""

    true: np.ndarray
    accidental: np.ndarray
    pitch_mrad: float
    n_frames: int
    n_angles: int
    metadata: dict = field(default_factory=dict)


def _line_weights(
    shape: tuple[int, int],
    angle_rad: float,
    center: tuple[float, float],
    length: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Base indices and bilinear fractions for one diametric cut.

    Sample k sits at signed offset k - (length-1)/2 pixels from the
    centre, with direction (cos a, sin a) in (col, row) axes, so angle 0
    reads the centre row and pi/2 the centre column exactly.  Raises
    GeometryError when any sample leaves the image.
    """
    if length < 3 or length % 2 == 0:
        raise DomainError(f"slice length must be odd and >= 3, got {length}")
    n_rows, n_cols = shape
    c_row, c_col = center
    s = np.arange(length, dtype=float) - (length - 1) / 2.0
    rows = c_row + s * np.sin(angle_rad)
    cols = c_col + s * np.cos(angle_rad)
    if (
        rows.min() < 0.0
        or cols.min() < 0.0
        or rows.max() > n_rows - 1
        or cols.max() > n_cols - 1
    ):
        raise GeometryError(
            f"slice of length {length} at angle {angle_rad:.4f} rad leaves the "
            f"{n_rows}x{n_cols} image"
        )
    r0 = np.clip(np.floor(rows).astype(int), 0, n_rows - 2)
    c0 = np.clip(np.floor(cols).astype(int), 0, n_cols - 2)
    return r0, c0, rows - r0, cols - c0


def extract_diametric_slice(
    image: np.ndarray,
    angle_rad: float,
    center: tuple[float, float],
    length: int,
) -> np.ndarray:
    """Bilinear samples along a line through `center` at `angle_rad`."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise DataError("image must be 2D")
    r0, c0, fr, fc = _line_weights(img.shape, angle_rad, center, length)
    return (
        img[r0, c0] * (1.0 - fr) * (1.0 - fc)
        + img[r0 + 1, c0] * fr * (1.0 - fc)
        + img[r0, c0 + 1] * (1.0 - fr) * fc
        + img[r0 + 1, c0 + 1] * fr * fc
    )


def default_slice_length(n_pixels: int) -> int:
    """Longest odd cut centred on pixel n//2 that stays inside the frame."""
    return n_pixels - 1 if n_pixels % 2 == 0 else n_pixels


def extract_slices(
    stack: ImageStack,
    n_angles: int = 16,
    length: int | None = None,
    center: tuple[float, float] | None = None,
) -> SliceSet:
    """Cut every frame along n_angles diametric directions in [0, pi)."""
    if n_angles < 1:
        raise DomainError("need at least one cut orientation")
    if center is None:
        center = (float(stack.center_row), float(stack.center_col))
    if length is None:
        length = default_slice_length(min(stack.frames.shape[1], stack.frames.shape[2]))
    angles = np.arange(n_angles) * np.pi / n_angles
    frames = stack.frames
    shape = (frames.shape[1], frames.shape[2])
    out = np.empty((stack.n_frames, n_angles, length))
    # Sampling geometry is frame-independent; gather whole-stack columns
    # per angle instead of looping over frames.
    for a, ang in enumerate(angles):
        r0, c0, fr, fc = _line_weights(shape, ang, center, length)
        out[:, a, :] = (
            frames[:, r0, c0] * (1.0 - fr) * (1.0 - fc)
            + frames[:, r0 + 1, c0] * fr * (1.0 - fc)
            + frames[:, r0, c0 + 1] * (1.0 - fr) * fc
            + frames[:, r0 + 1, c0 + 1] * fr * fc
        )
    return SliceSet(data=out, angles_rad=angles, pitch_mrad=stack.pitch_mrad)


def accumulate_covariances(slices: SliceSet) -> CovariancePair:
    """True and accidental covariances, averaged over cut orientations.

    The true part is the sample covariance of each cut over frames.  The
    accidental part pairs each frame with its successor (wrapping the last
    back to the first) so that static structure survives while the
    fluctuation correlations average out; it is symmetrized.  Orientation
    averaging happens here, before any square root.
    """
    d = slices.data
    m, n_angles, _ = d.shape
    if m < 2:
        raise DataError("covariance needs at least 2 frames")
    c_true = None
    c_acc = None
    nxt = np.roll(np.arange(m), -1)
    for a in range(n_angles):
        x = d[:, a, :]
        delta = x - x.mean(axis=0)
        ct = delta.T @ delta / m
        ca = delta.T @ delta[nxt] / m
        ca = 0.5 * (ca + ca.T)
        c_true = ct if c_true is None else c_true + ct
        c_acc = ca if c_acc is None else c_acc + ca
    return CovariancePair(
        true=c_true / n_angles,
        accidental=c_acc / n_angles,
        pitch_mrad=slices.pitch_mrad,
        n_frames=m,
        n_angles=n_angles,
    )


def clipped_sqrt(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Entrywise square root with negative entries clamped to zero first.

    Returns (root, clamped_mass): the summed magnitude of clamped negative
    entries relative to the total absolute mass (0 when none).
    """
    m = np.asarray(matrix, dtype=float)
    neg = m[m < 0.0]
    total = float(np.sum(np.abs(m)))
    clamped = float(-np.sum(neg))
    return np.sqrt(np.clip(m, 0.0, None)), (clamped / total if total > 0.0 else 0.0)


def estimate_g1_slice(
    pair: CovariancePair, variant: str = "sqrt-then-subtract"
) -> CorrelationMatrix:
    """Correlation-magnitude estimate from a covariance pair.

    Negative diagonal entries (possible under sqrt-then-subtract when
    accidentals exceed the true variance at dark pixels) are set to zero;
    their count is recorded in the metadata.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == "sqrt-then-subtract":
        # The accidental covariance is mean-zero noise off the ridge, so
        # half its entries are negative by nature; only the clamp on the
        # true part signals a problem.
        root_true, clamped_mass = clipped_sqrt(pair.true)
        root_acc, _ = clipped_sqrt(pair.accidental)
        est = root_true - root_acc
    else:
        est, clamped_mass = clipped_sqrt(pair.true - pair.accidental)
    est = 0.5 * (est + est.T)

    diag = np.diag(est)
    n_neg = int(np.sum(diag < 0.0))
    if n_neg:
        idx = np.where(diag < 0.0)[0]
        est[idx, idx] = 0.0

    tr_true = float(np.trace(pair.true))
    tr_acc = float(np.trace(pair.accidental))
    grid = WavevectorGrid(n_points=est.shape[0], pitch_mrad=pair.pitch_mrad)
    meta = {
        "variant": variant,
        "n_frames": pair.n_frames,
        "n_angles": pair.n_angles,
        "clamped_mass": clamped_mass,
        "acc_to_true_ratio": tr_acc / tr_true if tr_true > 0.0 else float("nan"),
        "negative_diagonal_pixels": n_neg,
    }
    meta.update(pair.metadata)
    return CorrelationMatrix(est, grid, provenance="reconstructed", metadata=meta)


def centroid_center(stack: ImageStack) -> tuple[int, int]:
    """Intensity centroid of the mean frame, rounded to the nearest pixel."""
    mean = stack.mean_frame()
    total = float(mean.sum())
    if total <= 0.0:
        raise DegenerateInputError("stack carries no intensity; centroid undefined")
    rows = np.arange(mean.shape[0])
    cols = np.arange(mean.shape[1])
    r = float((mean.sum(axis=1) * rows).sum() / total)
    c = float((mean.sum(axis=0) * cols).sum() / total)
    return int(round(r)), int(round(c))


def estimate_from_stack(
    stack: ImageStack,
    n_angles: int = 16,
    variant: str = "sqrt-then-subtract",
    length: int | None = None,
    center: tuple[int, int] | None = None,
) -> CorrelationMatrix:
    """Stack-to-correlation path with automatic centring.

    The cut centre defaults to the rounded intensity centroid of the mean
    frame.  Diagnostics travel in the result metadata.
    """
    if center is None:
        center = centroid_center(stack)
    slices = extract_slices(
        stack,
        n_angles=n_angles,
        length=length,
        center=(float(center[0]), float(center[1])),
    )
    pair = accumulate_covariances(slices)
    est = estimate_g1_slice(pair, variant=variant)
    est.metadata["center_row"] = int(center[0])
    est.metadata["center_col"] = int(center[1])
    return est


def reconstruct_pipeline(
    stack: ImageStack,
    n_angles: int = 16,
    variant: str = "sqrt-then-subtract",
    length: int | None = None,
    center: tuple[int, int] | None = None,
    n_keep: int | None = None,
) -> SchmidtResult:
    """Full stack-to-modes path: estimate, diagonalize, tensor spectrum.

    n_keep truncates the 1D spectrum to the strongest modes before the
    product spectrum is formed (weights below the cut are zeroed; the
    product normalization then uses the truncated sum).  Diagnostics from
    the covariance stage ride along in result.one_d.metadata.
    """
    est = estimate_from_stack(
        stack, n_angles=n_angles, variant=variant, length=length, center=center
    )
    one_d = diagonalize_1d(est)
    if n_keep is not None:
        if n_keep < 1:
            raise DomainError("n_keep must be at least 1")
        one_d.eigenvalues[n_keep:] = 0.0
    return tensor_spectrum(one_d)
