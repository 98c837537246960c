"""Building blocks of the high-frequency edge loss.

Pipeline pieces: Scharr derivative kernels, non-overlapping patch
variance, centered normalized-frequency grids, and Butterworth / Gaussian
high-pass filters applied to centered FFT magnitudes.

Frequency normalization: per-axis frequency in cycles/sample, so Nyquist
is 0.5 and the radial coordinate reaches ~0.707 at the grid corners. A
cutoff of 0.35 therefore sits between Nyquist and the corners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .transforms import fft2c

__all__ = [
    "HighPassSpec",
    "SCHARR_X",
    "SCHARR_Y",
    "scharr_gradients",
    "patch_variance",
    "highpass_filter",
    "filtered_magnitude",
]

# 3x3 Scharr derivative kernels, applied by correlation. The 1/16 scaling
# is a fixed convention; any positive rescaling only rescales downstream
# loss values.
SCHARR_X = np.array([[-3.0, 0.0, 3.0], [-10.0, 0.0, 10.0], [-3.0, 0.0, 3.0]]) / 16.0
SCHARR_Y = SCHARR_X.T.copy()


@dataclass(frozen=True)
class HighPassSpec:
    """Radial high-pass filter parameters.

    Attributes:
        kind: "butterworth" or "gaussian".
        cutoff: Cutoff in cycles/sample; Nyquist is 0.5.
        order: Butterworth order (ignored for the Gaussian filter).
    """

    kind: str = "butterworth"
    cutoff: float = 0.35
    order: int = 4

    def __post_init__(self):
        if self.kind not in ("butterworth", "gaussian"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if not 0.0 < self.cutoff <= 0.5:
            raise ValueError(f"cutoff must lie in (0, 0.5], got {self.cutoff}")
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")


def _fold_indices(n: int, lo: int, hi: int) -> np.ndarray:
    """Symmetric (edge-inclusive) reflection indices for positions [lo, hi)."""
    t = np.arange(lo, hi)
    if n == 1:
        return np.zeros(t.size, dtype=np.intp)
    m = np.mod(t, 2 * n)
    return np.where(m < n, m, 2 * n - 1 - m).astype(np.intp)


def sym_pad(x: np.ndarray, pads: tuple[int, int, int, int]) -> np.ndarray:
    """Symmetric-pad a 2D array by (top, bottom, left, right)."""
    top, bottom, left, right = pads
    h, w = x.shape
    ridx = _fold_indices(h, -top, h + bottom)
    cidx = _fold_indices(w, -left, w + right)
    return x[np.ix_(ridx, cidx)]


def sym_pad_adjoint(g: np.ndarray, shape: tuple[int, int], pads: tuple[int, int, int, int]) -> np.ndarray:
    """Adjoint of :func:`sym_pad`: fold padded-position gradients back."""
    top, bottom, left, right = pads
    h, w = shape
    ridx = _fold_indices(h, -top, h + bottom)
    cidx = _fold_indices(w, -left, w + right)
    out = np.zeros(shape, dtype=g.dtype)
    np.add.at(out, (ridx[:, None], cidx[None, :]), g)
    return out


def scharr_gradients(img: np.ndarray, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical Scharr derivatives with reflect padding.

    Args:
        img: Real 2D array, at least 3x3.
        scale: Optional positive kernel rescaling.

    Returns:
        (gx, gy), each the same shape as ``img``. gx responds to variation
        along the width axis, gy along the height axis.
    """
    img = np.asarray(img)
    if np.iscomplexobj(img):
        raise ValueError("scharr_gradients expects a real-valued image")
    if img.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {img.shape}")
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image {img.shape} smaller than the 3x3 kernel")
    padded = sym_pad(img.astype(np.float64, copy=False), (1, 1, 1, 1))
    gx = signal.correlate(padded, SCHARR_X * scale, mode="valid")
    gy = signal.correlate(padded, SCHARR_Y * scale, mode="valid")
    return gx, gy


def scharr_gradient_adjoint(grad: np.ndarray, kernel: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Adjoint of one reflect-padded Scharr correlation (for backprop)."""
    g_padded = signal.convolve(grad, kernel, mode="full")
    return sym_pad_adjoint(g_padded, shape, (1, 1, 1, 1))


def _patch_pads(h: int, w: int, p: int) -> tuple[int, int]:
    return (-h) % p, (-w) % p


def patch_variance(g: np.ndarray, patch: int) -> np.ndarray:
    """Population variance over non-overlapping ``patch`` x ``patch`` tiles.

    The input is reflect-padded on the bottom/right up to the next multiple
    of ``patch`` before tiling, so every tile is full.

    Args:
        g: Real 2D array.
        patch: Tile side length, >= 1.

    Returns:
        Variance map of shape (ceil(H/p), ceil(W/p)), entries >= 0.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {g.shape}")
    if patch < 1:
        raise ValueError(f"patch size must be >= 1, got {patch}")
    h, w = g.shape
    pb, pr = _patch_pads(h, w, patch)
    gp = sym_pad(g, (0, pb, 0, pr))
    hh, ww = gp.shape
    tiles = gp.reshape(hh // patch, patch, ww // patch, patch)
    mean = tiles.mean(axis=(1, 3))
    sq_mean = (tiles**2).mean(axis=(1, 3))
    var = sq_mean - mean**2
    return np.maximum(var, 0.0)


def patch_variance_backward(g: np.ndarray, patch: int, grad_var: np.ndarray) -> np.ndarray:
    """Gradient of ``patch_variance`` w.r.t. its input.

    d var / d x_k = 2 (x_k - mean) / p^2 within each tile; padded positions
    fold back onto their reflection sources.
    """
    g = np.asarray(g, dtype=np.float64)
    h, w = g.shape
    pb, pr = _patch_pads(h, w, patch)
    gp = sym_pad(g, (0, pb, 0, pr))
    hh, ww = gp.shape
    tiles = gp.reshape(hh // patch, patch, ww // patch, patch)
    mean = tiles.mean(axis=(1, 3))
    per_tile = (2.0 / patch**2) * (tiles - mean[:, None, :, None])
    grad_tiles = per_tile * grad_var[:, None, :, None]
    grad_padded = grad_tiles.reshape(hh, ww)
    return sym_pad_adjoint(grad_padded, (h, w), (0, pb, 0, pr))


def _radius_grid(h: int, w: int) -> np.ndarray:
    fu = np.fft.fftshift(np.fft.fftfreq(h))
    fv = np.fft.fftshift(np.fft.fftfreq(w))
    return np.sqrt(fu[:, None] ** 2 + fv[None, :] ** 2)


def highpass_filter(h: int, w: int, spec: HighPassSpec) -> np.ndarray:
    """Radial high-pass filter on the centered frequency grid.

    Butterworth: ``H = 1 / (1 + (cutoff / D)^(2 * order))`` with H(0) = 0.
    Gaussian:    ``H = 1 - exp(-D^2 / (2 * cutoff^2))``.

    Args:
        h, w: Grid size, matching a centered FFT of the same shape.
        spec: Filter parameters.

    Returns:
        Real (h, w) array with values in [0, 1] and 0 at the DC bin.
    """
    if h < 1 or w < 1:
        raise ValueError(f"filter size must be positive, got {h}x{w}")
    d = _radius_grid(h, w)
    if spec.kind == "butterworth":
        out = np.zeros_like(d)
        nz = d > 0
        out[nz] = 1.0 / (1.0 + (spec.cutoff / d[nz]) ** (2 * spec.order))
        return out
    return 1.0 - np.exp(-(d**2) / (2.0 * spec.cutoff**2))


def filtered_magnitude(v: np.ndarray, spec: HighPassSpec) -> np.ndarray:
    """High-pass-filtered magnitude of the centered FFT of ``v``.

    Args:
        v: Real 2D array (typically a patch-variance map).
        spec: High-pass filter parameters.

    Returns:
        Real array of the same shape: ``|fft2c(v)| * H``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {v.shape}")
    weights = highpass_filter(v.shape[0], v.shape[1], spec)
    return np.abs(fft2c(v)) * weights
