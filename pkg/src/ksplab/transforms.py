"""Centered orthonormal 2D FFTs and coil-combination primitives.

All functions operate on plain numpy arrays:

* image / k-space slice: complex (or real) array of shape (H, W)
* multi-coil stack: complex array of shape (C, H, W)

The FFT convention is centered (DC at ``H // 2``, ``W // 2``) and
orthonormally scaled, so a forward/inverse round trip is the identity and
Parseval holds as an equality. Transforms act on the last two axes, so
coil stacks and single slices are handled uniformly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["fft2c", "ifft2c", "rss_combine", "sense_expand"]

_AXES = (-2, -1)


def _check_2d_spatial(arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.ndim < 2:
        raise ValueError(f"{name} must have at least 2 dimensions, got {arr.ndim}")
    if arr.shape[-1] < 1 or arr.shape[-2] < 1:
        raise ValueError(f"{name} has a zero-sized spatial dimension: {arr.shape}")
    return arr


def fft2c(img: np.ndarray) -> np.ndarray:
    """Centered, orthonormal 2D FFT over the last two axes.

    Args:
        img: Array of shape (..., H, W), real or complex.

    Returns:
        Complex array of the same shape with the DC bin at
        (H // 2, W // 2).
    """
    img = _check_2d_spatial(img, "img")
    shifted = np.fft.ifftshift(img, axes=_AXES)
    ksp = np.fft.fft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(ksp, axes=_AXES)


def ifft2c(ksp: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fft2c` (same centering and scaling)."""
    ksp = _check_2d_spatial(ksp, "ksp")
    shifted = np.fft.ifftshift(ksp, axes=_AXES)
    img = np.fft.ifft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(img, axes=_AXES)


def rss_combine(coil_imgs: np.ndarray) -> np.ndarray:
    """Root-sum-of-squares combination over the coil axis.

    Args:
        coil_imgs: Coil image stack of shape (C, H, W).

    Returns:
        Nonnegative real image of shape (H, W):
        ``sqrt(sum_c |I_c|^2)``.
    """
    coil_imgs = np.asarray(coil_imgs)
    if coil_imgs.ndim != 3:
        raise ValueError(f"expected a (C, H, W) stack, got shape {coil_imgs.shape}")
    if coil_imgs.shape[0] < 1:
        raise ValueError("need at least one coil")
    return np.sqrt(np.sum(np.abs(coil_imgs) ** 2, axis=0))


def sense_expand(img: np.ndarray, maps: np.ndarray) -> np.ndarray:
    """Expand a single image into per-coil images, ``I_c = S_c * img``.

    Args:
        img: Image of shape (H, W), real or complex.
        maps: Sensitivity maps of shape (C, H, W).

    Returns:
        Complex coil stack of shape (C, H, W).
    """
    img = np.asarray(img)
    maps = np.asarray(maps)
    if img.ndim != 2:
        raise ValueError(f"img must be 2D, got shape {img.shape}")
    if maps.ndim != 3 or maps.shape[1:] != img.shape:
        raise ValueError(
            f"maps shape {maps.shape} incompatible with image shape {img.shape}"
        )
    return maps * img[None, :, :]
