"""Slow, straight-line reference implementations used as test oracles.

Everything here is written with explicit scalar loops and naive DFTs,
independent of the library's vectorized paths.
"""

import numpy as np

SCHARR_X_RAW = [[-3.0, 0.0, 3.0], [-10.0, 0.0, 10.0], [-3.0, 0.0, 3.0]]


def naive_dft2_centered(x):
    """O(N^4) centered orthonormal 2D DFT by explicit summation."""
    x = np.asarray(x, dtype=np.complex128)
    h, w = x.shape
    out = np.zeros((h, w), dtype=np.complex128)
    # centered: spatial index n offset by floor(N/2), frequency bin k offset likewise
    for ku in range(h):
        for kv in range(w):
            acc = 0.0 + 0.0j
            for n in range(h):
                for m in range(w):
                    ph = -2.0j * np.pi * (
                        (ku - h // 2) * (n - h // 2) / h + (kv - w // 2) * (m - w // 2) / w
                    )
                    acc += x[n, m] * np.exp(ph)
            out[ku, kv] = acc / np.sqrt(h * w)
    return out


def reflect_index(t, n):
    """Edge-inclusive symmetric reflection of index t into [0, n)."""
    if n == 1:
        return 0
    period = 2 * n
    m = t % period
    return m if m < n else period - 1 - m


def scalar_correlate3(img, kernel):
    """3x3 correlation with symmetric padding, scalar loops."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(3):
                for b in range(3):
                    ii = reflect_index(i + a - 1, h)
                    jj = reflect_index(j + b - 1, w)
                    acc += kernel[a][b] * img[ii, jj]
            out[i, j] = acc
    return out


def scalar_patch_variance(g, p):
    """Non-overlapping patch population variance with symmetric padding."""
    g = np.asarray(g, dtype=np.float64)
    h, w = g.shape
    hh = ((h + p - 1) // p) * p
    ww = ((w + p - 1) // p) * p
    padded = np.zeros((hh, ww))
    for i in range(hh):
        for j in range(ww):
            padded[i, j] = g[reflect_index(i, h), reflect_index(j, w)]
    out = np.zeros((hh // p, ww // p))
    for bi in range(hh // p):
        for bj in range(ww // p):
            vals = [padded[bi * p + a, bj * p + b] for a in range(p) for b in range(p)]
            mean = sum(vals) / len(vals)
            out[bi, bj] = sum((v - mean) ** 2 for v in vals) / len(vals)
    return out


def scalar_butterworth(h, w, cutoff, order):
    """Scalar-formula Butterworth high-pass on the centered grid."""
    out = np.zeros((h, w))
    fu = np.fft.fftshift(np.fft.fftfreq(h))
    fv = np.fft.fftshift(np.fft.fftfreq(w))
    for i in range(h):
        for j in range(w):
            d = np.sqrt(fu[i] ** 2 + fv[j] ** 2)
            out[i, j] = 0.0 if d == 0 else 1.0 / (1.0 + (cutoff / d) ** (2 * order))
    return out


def naive_edge_loss(img, ref, patch, cutoff, order, kernel_scale=1.0):
    """Straight-line re-implementation of the full edge-loss pipeline."""

    def one_direction(kernel):
        parts = []
        for image in (img, ref):
            kern = [[kernel_scale * v / 16.0 for v in row] for row in kernel]
            g = scalar_correlate3(image, kern)
            v = scalar_patch_variance(g, patch)
            f = naive_dft2_centered(v)
            hp = scalar_butterworth(v.shape[0], v.shape[1], cutoff, order)
            parts.append(np.abs(f) * hp)
        return np.mean(np.abs(parts[0] - parts[1]))

    kx = SCHARR_X_RAW
    ky = [list(row) for row in zip(*SCHARR_X_RAW)]
    return one_direction(kx) + one_direction(ky)
