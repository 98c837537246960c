"""Classical sensitivity-map estimation from the calibration region.

The estimate is the standard low-resolution approach: keep only the fully
sampled center (ACS) lines of each coil's k-space, taper the window edge
with a raised cosine to suppress ringing, inverse-transform, and divide
each low-resolution coil image by the root-sum-of-squares across coils.
A learned estimator could be slotted in behind the same signature.
"""

from __future__ import annotations

import numpy as np

from .sampling import SamplingMask
from .transforms import ifft2c, rss_combine

__all__ = ["estimate_sens_maps"]

RSS_FLOOR = 1e-12


def _acs_window(axis_len: int, lo: int, hi: int, taper: int) -> np.ndarray:
    """0/1 window over [lo, hi) with raised-cosine edges of width ``taper``."""
    w = np.zeros(axis_len)
    w[lo:hi] = 1.0
    n = hi - lo
    t = min(taper, n // 2)
    if t > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(1, t + 1) / (t + 1)))
        w[lo : lo + t] = ramp
        w[hi - t : hi] = ramp[::-1]
    return w


def estimate_sens_maps(
    masked_ksp: np.ndarray,
    mask: SamplingMask,
    taper: int = 2,
) -> np.ndarray:
    """Estimate coil sensitivity maps from the ACS region.

    Args:
        masked_ksp: Undersampled k-space, shape (C, H, W). The ACS lines
            must be present (they are, for masks built by this package).
        mask: The sampling mask; supplies ACS geometry.
        taper: Raised-cosine rolloff width, in lines, on each ACS edge.

    Returns:
        Complex maps of shape (C, H, W) with unit RSS wherever the
        low-resolution RSS is above a small floor, zero elsewhere.
    """
    masked_ksp = np.asarray(masked_ksp, dtype=np.complex128)
    if masked_ksp.ndim != 3:
        raise ValueError(f"expected (C, H, W) k-space, got shape {masked_ksp.shape}")
    if masked_ksp.shape[1:] != (mask.height, mask.width):
        raise ValueError(
            f"k-space spatial shape {masked_ksp.shape[1:]} does not match mask "
            f"{(mask.height, mask.width)}"
        )
    if mask.acs_lines < 2:
        raise ValueError(f"need at least 2 ACS lines, got {mask.acs_lines}")
    if taper < 0:
        raise ValueError(f"taper must be >= 0, got {taper}")

    lo, hi = mask.acs_range()
    window = _acs_window(mask.axis_len, lo, hi, taper)
    if mask.phase_axis == "cols":
        acs_ksp = masked_ksp * window[None, None, :]
    else:
        acs_ksp = masked_ksp * window[None, :, None]

    lowres = ifft2c(acs_ksp)
    rss = rss_combine(lowres)
    maps = np.zeros_like(lowres)
    ok = rss > RSS_FLOOR
    maps[:, ok] = lowres[:, ok] / rss[ok]
    return maps
