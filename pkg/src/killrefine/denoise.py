"""Frequency-domain denoising of kill matrices.

The matrix is treated as a 2D signal: transform, multiply by a low-pass
mask, transform back, then rescale into [0, 1]. Frequencies are measured
per axis in signed normalized units (cycles per sample in [-0.5, 0.5]) so
that the mask keeps conjugate pairs together and the reconstruction stays
real.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from killrefine.enhance import KillMatrix
from killrefine.errors import EmptyMatrix, NonNegligibleImaginary

IMAG_TOLERANCE = 1e-6
SNAP = 1e-12


class MaskKind(str, enum.Enum):
    IDEAL = "ideal"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class DenoiseConfig:
    cutoff_d0: float = 0.3
    mask_kind: MaskKind = MaskKind.IDEAL

    def __post_init__(self):
        if not 0.0 < self.cutoff_d0 <= 1.0:
            raise ValueError(f"cutoff_d0 must lie in (0, 1], got {self.cutoff_d0}")
        object.__setattr__(self, "mask_kind", MaskKind(self.mask_kind))


@dataclass(frozen=True)
class Spectrum:
    coefficients: np.ndarray

    @property
    def rows(self) -> int:
        return self.coefficients.shape[0]

    @property
    def cols(self) -> int:
        return self.coefficients.shape[1]


class RefinedKillMatrix(KillMatrix):
    pass


def _as_matrix(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise EmptyMatrix(f"expected a non-empty 2D matrix, got shape {a.shape}")
    return a


def dft2(matrix) -> Spectrum:
    """F(u, v) = sum_x sum_y M(x, y) exp(-2j pi (u x / N + v y / M)), 0-based."""
    return Spectrum(np.fft.fft2(_as_matrix(matrix)))


def idft2(spectrum: Spectrum) -> np.ndarray:
    """Inverse transform; returns the real part.

    Raises NonNegligibleImaginary if the result is not real to within 1e-6,
    which means the spectrum was not Hermitian-symmetric.
    """
    coeffs = np.asarray(spectrum.coefficients)
    if coeffs.ndim != 2 or coeffs.size == 0:
        raise EmptyMatrix(f"expected a non-empty 2D spectrum, got shape {coeffs.shape}")
    out = np.fft.ifft2(coeffs)
    worst = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if worst >= IMAG_TOLERANCE:
        raise NonNegligibleImaginary(f"max |imag| = {worst:.3g} after inverse transform")
    return out.real


def signed_frequencies(n: int) -> np.ndarray:
    """u/n for u <= n/2, else (u - n)/n."""
    u = np.arange(n)
    return np.where(u <= n / 2, u, u - n) / n


def lowpass_mask(n_rows: int, n_cols: int, config: DenoiseConfig = DenoiseConfig()) -> np.ndarray:
    if n_rows < 1 or n_cols < 1:
        raise EmptyMatrix(f"mask dimensions must be positive, got {n_rows}x{n_cols}")
    fu = signed_frequencies(n_rows)[:, None]
    fv = signed_frequencies(n_cols)[None, :]
    radius2 = fu**2 + fv**2
    d0 = config.cutoff_d0
    if config.mask_kind is MaskKind.GAUSSIAN:
        return np.exp(-radius2 / (2.0 * d0 * d0))
    return (np.sqrt(radius2) <= d0).astype(float)


def minmax_normalize(matrix, flat_tolerance: float = 0.0) -> np.ndarray:
    """Rescale to [0, 1]; a constant matrix maps to all zeros.

    With ``flat_tolerance`` > 0, a range no wider than that tolerance also
    counts as constant.
    """
    a = _as_matrix(matrix)
    lo, hi = float(a.min()), float(a.max())
    if hi - lo <= flat_tolerance:
        return np.zeros_like(a)
    out = (a - lo) / (hi - lo)
    # rounding can push a hair outside the unit interval
    return np.clip(out, 0.0, 1.0)


def filter_matrix(matrix, config: DenoiseConfig = DenoiseConfig()) -> np.ndarray:
    """Low-pass reconstruction before normalization."""
    a = _as_matrix(matrix)
    spectrum = dft2(a)
    mask = lowpass_mask(*a.shape, config)
    return idft2(Spectrum(spectrum.coefficients * mask))


def refine(matrix: KillMatrix, config: DenoiseConfig = DenoiseConfig()) -> RefinedKillMatrix:
    """Denoise a boolean or enhanced kill matrix into fuzzy values in [0, 1]."""
    source = np.asarray(matrix.cells, dtype=float)
    # transform round-off on a constant input must not be stretched to [0, 1]
    flat = 1e-12 * float(np.abs(source).max()) if source.size else 0.0
    cells = minmax_normalize(filter_matrix(source, config), flat)
    # ratio formulas divide these cells by each other; round-off near 0 must read as 0
    cells[cells < SNAP] = 0.0
    cells[cells > 1.0 - SNAP] = 1.0
    return RefinedKillMatrix(matrix.rows, matrix.cols, cells, matrix.fail_vector)
