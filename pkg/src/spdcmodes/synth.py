"""Pseudothermal frame synthesis from a mode decomposition.

Each frame draws an independent complex circular Gaussian coefficient for
every product mode, so the stack reproduces the target correlation kernel
in the many-frame limit:

    E = (V sqrt(mu)) C (V sqrt(mu))^T,   C_ij ~ CN(0, 1)

with V the 1D mode matrix.  Recorded frames are |E|^2 plus an optional
constant offset and Gaussian read noise, clipped at zero (and rounded
first when quantize is set, mimicking a digitizing camera).

Every frame gets its own child seed spawned from the stack seed, so frame
j is bit-identical no matter how many frames are requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError
from .schmidt import OneDDecomposition

__all__ = ["SynthesisSpec", "ImageStack", "sample_field_frame", "synthesize_stack"]


@dataclass(frozen=True)
class SynthesisSpec:
    """Recipe for a synthetic frame stack."""

    one_d: OneDDecomposition
    n_frames: int
    seed: int
    noise_sigma: float = 0.0
    offset: float = 0.0
    quantize: bool = False

    def __post_init__(self) -> None:
        if self.n_frames < 2:
            raise DomainError(f"need at least 2 frames, got {self.n_frames}")
        if self.noise_sigma < 0.0:
            raise DomainError("noise_sigma must be non-negative")
        if self.offset < 0.0:
            raise DomainError("offset must be non-negative")


@dataclass
class ImageStack:
    """Stack of intensity frames with its sampling geometry.

    frames has shape (n_frames, n_rows, n_cols), float32, non-negative.
    pitch_mrad is the angular pixel pitch; (center_row, center_col) marks
    the beam axis.
    """

    frames: np.ndarray
    pitch_mrad: float
    center_row: int
    center_col: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        f = np.asarray(self.frames)
        if f.ndim != 3:
            raise DataError(f"frames must be 3D (frame, row, col), got ndim={f.ndim}")
        if f.shape[0] < 1:
            raise DataError("stack holds no frames")
        if f.dtype != np.float32:
            f = f.astype(np.float32)
        if not np.all(np.isfinite(f)):
            raise DataError("frames contain non-finite values")
        if np.any(f < 0.0):
            raise DataError("frames contain negative intensities")
        if self.pitch_mrad <= 0.0:
            raise DataError("pitch must be positive")
        n_rows, n_cols = f.shape[1], f.shape[2]
        if not (0 <= self.center_row < n_rows and 0 <= self.center_col < n_cols):
            raise DataError("centre lies outside the frame")
        self.frames = f

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def mean_frame(self) -> np.ndarray:
        return self.frames.mean(axis=0)


def _mode_amplitudes(one_d: OneDDecomposition) -> np.ndarray:
    """Columns V_i sqrt(mu_i) for the modes with non-zero weight."""
    mu = one_d.eigenvalues
    keep = mu > 0.0
    if not np.any(keep):
        raise DataError("decomposition has no positive eigenvalues to sample")
    return one_d.modes[:, keep] * np.sqrt(mu[keep])


def sample_field_frame(one_d: OneDDecomposition, rng: np.random.Generator) -> np.ndarray:
    """One complex field realization E(x, y) with the target correlations."""
    amp = _mode_amplitudes(one_d)
    m = amp.shape[1]
    z = rng.standard_normal((2, m, m))
    coeff = (z[0] + 1j * z[1]) / np.sqrt(2.0)
    return amp @ coeff @ amp.T


def synthesize_stack(spec: SynthesisSpec, metadata: dict | None = None) -> ImageStack:
    """Generate the full stack of recorded intensity frames.

    Deterministic for a given seed; frames are mutually independent.
    """
    one_d = spec.one_d
    grid = one_d.grid
    n = grid.n_points
    amp = _mode_amplitudes(one_d)
    m = amp.shape[1]

    children = np.random.SeedSequence(spec.seed).spawn(spec.n_frames)
    frames = np.empty((spec.n_frames, n, n), dtype=np.float32)
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        z = rng.standard_normal((2, m, m))
        coeff = (z[0] + 1j * z[1]) / np.sqrt(2.0)
        field_k = amp @ coeff @ amp.T
        frame = field_k.real**2 + field_k.imag**2 + spec.offset
        if spec.noise_sigma > 0.0:
            frame = frame + spec.noise_sigma * rng.standard_normal((n, n))
        if spec.quantize:
            frame = np.rint(frame)
        np.clip(frame, 0.0, None, out=frame)
        frames[k] = frame.astype(np.float32)

    meta = {
        "seed": spec.seed,
        "n_frames": spec.n_frames,
        "noise_sigma": spec.noise_sigma,
        "offset": spec.offset,
        "quantize": spec.quantize,
    }
    meta.update(one_d.metadata)
    if metadata:
        meta.update(metadata)
    return ImageStack(
        frames=frames,
        pitch_mrad=grid.pitch_mrad,
        center_row=grid.center_index,
        center_col=grid.center_index,
        metadata=meta,
    )
