"""Image quality metrics: SSIM, PSNR, NMSE, and a high-frequency NMSE.

All metrics operate on real (magnitude) images. SSIM and PSNR take their
dynamic range from the reference image by default; pass ``data_range`` to
pin it instead.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .filters import HighPassSpec, highpass_filter
from .losses import ssim_loss
from .transforms import fft2c

__all__ = ["ssim", "psnr", "nmse", "hf_nmse"]


def ssim(img: np.ndarray, ref: np.ndarray, data_range: Optional[float] = None) -> float:
    """Mean SSIM between two real images (1 minus the SSIM loss)."""
    return 1.0 - ssim_loss(img, ref, data_range=data_range)


def psnr(img: np.ndarray, ref: np.ndarray, data_range: Optional[float] = None) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    img = np.asarray(img, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if img.shape != ref.shape:
        raise ValueError(f"shape mismatch {img.shape} vs {ref.shape}")
    if data_range is None:
        data_range = float(ref.max())
    if data_range <= 0:
        raise ValueError("dynamic range must be positive (is ref all zero?)")
    mse = float(np.mean((img - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range**2 / mse)


def nmse(img: np.ndarray, ref: np.ndarray) -> float:
    """Normalized mean squared error ``||img - ref||^2 / ||ref||^2``."""
    img = np.asarray(img, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if img.shape != ref.shape:
        raise ValueError(f"shape mismatch {img.shape} vs {ref.shape}")
    denom = float(np.sum(ref**2))
    if denom == 0.0:
        raise ValueError("reference has zero norm")
    return float(np.sum((img - ref) ** 2)) / denom


def hf_nmse(img: np.ndarray, ref: np.ndarray, spec: Optional[HighPassSpec] = None) -> float:
    """NMSE restricted to the high-pass-filtered frequency content.

    Both images are transformed with the centered FFT, multiplied by the
    high-pass filter, and compared as complex spectra.
    """
    if spec is None:
        spec = HighPassSpec()
    img = np.asarray(img, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if img.shape != ref.shape:
        raise ValueError(f"shape mismatch {img.shape} vs {ref.shape}")
    weights = highpass_filter(img.shape[0], img.shape[1], spec)
    f_img = fft2c(img) * weights
    f_ref = fft2c(ref) * weights
    denom = float(np.sum(np.abs(f_ref) ** 2))
    if denom == 0.0:
        raise ValueError("reference has no high-frequency energy")
    return float(np.sum(np.abs(f_img - f_ref) ** 2)) / denom
