"""Deterministic synthetic multi-coil cardiac-like phantoms.

Ellipse-based images rasterized in image space, plus smooth complex coil
sensitivity profiles arranged on a ring and normalized to unit RSS. These
supply ground truth for every desk-scale experiment in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transforms import fft2c, sense_expand

__all__ = ["PhantomSpec", "make_phantom", "simulate_kspace"]

PHANTOM_KINDS = ("static", "dynamic")

# (value, cx, cy, semi_x, semi_y, angle_rad) on the [-1, 1]^2 grid:
# torso, two lung-like voids, myocardial ring with a bright pool, two
# papillary-like dots, and two vessel cross-sections.
_BASE_ELLIPSES = (
    (0.40, 0.00, 0.00, 0.92, 0.78, 0.00),
    (-0.18, -0.42, -0.05, 0.28, 0.42, 0.25),
    (-0.18, 0.42, -0.05, 0.26, 0.40, -0.25),
    (0.42, -0.06, 0.18, 0.30, 0.26, -0.30),
    (0.18, -0.06, 0.18, 0.17, 0.14, -0.30),
    (-0.12, -0.13, 0.24, 0.045, 0.040, 0.00),
    (-0.12, 0.01, 0.12, 0.040, 0.045, 0.00),
    (0.30, 0.30, 0.45, 0.060, 0.060, 0.00),
    (0.25, -0.35, 0.50, 0.050, 0.070, 0.10),
)
_POOL_INDEX = 4  # the bright-pool ellipse pulses in the dynamic kind
_RING_INDEX = 3


@dataclass(frozen=True)
class PhantomSpec:
    """Parameters of one synthetic subject.

    Attributes:
        height, width: Image size in pixels.
        coils: Number of receive coils.
        seed: Drives the per-subject geometry jitter and coil phases.
        kind: "static" for a fixed slice, "dynamic" for a pulsing
            inner region across frames.
        frames: Number of time frames (>= 1).
    """

    height: int
    width: int
    coils: int = 10
    seed: int = 0
    kind: str = "static"
    frames: int = 1

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError(f"phantom size must be positive, got {self.height}x{self.width}")
        if self.coils < 1:
            raise ValueError(f"coils must be >= 1, got {self.coils}")
        if self.frames < 1:
            raise ValueError(f"frames must be >= 1, got {self.frames}")
        if self.kind not in PHANTOM_KINDS:
            raise ValueError(f"kind must be one of {PHANTOM_KINDS}, got {self.kind!r}")


def _grid(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    y = np.linspace(-1.0, 1.0, height)
    x = np.linspace(-1.0, 1.0, width)
    return np.meshgrid(y, x, indexing="ij")


def _rasterize(ellipses, height: int, width: int) -> np.ndarray:
    yy, xx = _grid(height, width)
    img = np.zeros((height, width))
    for value, cx, cy, sa, sb, theta in ellipses:
        ct, st = np.cos(theta), np.sin(theta)
        xr = (xx - cx) * ct + (yy - cy) * st
        yr = -(xx - cx) * st + (yy - cy) * ct
        img[(xr / sa) ** 2 + (yr / sb) ** 2 <= 1.0] += value
    return img


def _jittered_ellipses(rng: np.random.Generator):
    out = []
    for value, cx, cy, sa, sb, theta in _BASE_ELLIPSES:
        out.append(
            (
                value * (1.0 + 0.05 * rng.standard_normal()),
                cx + 0.015 * rng.standard_normal(),
                cy + 0.015 * rng.standard_normal(),
                max(sa * (1.0 + 0.04 * rng.standard_normal()), 1e-3),
                max(sb * (1.0 + 0.04 * rng.standard_normal()), 1e-3),
                theta + 0.05 * rng.standard_normal(),
            )
        )
    return out


def _coil_maps(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    yy, xx = _grid(spec.height, spec.width)
    theta0 = rng.uniform(0.0, 2.0 * np.pi)
    maps = np.empty((spec.coils, spec.height, spec.width), dtype=np.complex128)
    for c in range(spec.coils):
        angle = theta0 + 2.0 * np.pi * c / spec.coils
        cx, cy = 1.15 * np.cos(angle), 1.15 * np.sin(angle)
        d2 = (xx - cx) ** 2 + (yy - cy) ** 2
        mag = np.exp(-d2 / (2.0 * 0.9**2)) + 0.02  # floor keeps RSS nonzero
        phase = (
            rng.uniform(0.0, 2.0 * np.pi)
            + 0.8 * rng.standard_normal() * xx
            + 0.8 * rng.standard_normal() * yy
        )
        maps[c] = mag * np.exp(1j * phase)
    rss = np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
    return maps / rss[None, :, :]


def make_phantom(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray]:
    """Build the phantom images and their ground-truth coil maps.

    Deterministic for a given spec. Images are scaled to [0, 1]; the
    dynamic kind pulses the bright-pool ellipse (and slightly the
    surrounding ring) across frames.

    Returns:
        (images, maps): images of shape (frames, H, W), float64 in [0, 1];
        maps of shape (coils, H, W), complex with unit RSS everywhere.
    """
    rng = np.random.default_rng(spec.seed)
    ellipses = _jittered_ellipses(rng)
    maps = _coil_maps(spec, rng)

    frames = []
    for t in range(spec.frames):
        frame_ellipses = list(ellipses)
        if spec.kind == "dynamic":
            s = 1.0 + 0.06 * np.cos(2.0 * np.pi * t / spec.frames)
            v, cx, cy, sa, sb, th = frame_ellipses[_POOL_INDEX]
            frame_ellipses[_POOL_INDEX] = (v, cx, cy, sa * s, sb * s, th)
            v, cx, cy, sa, sb, th = frame_ellipses[_RING_INDEX]
            r = 1.0 + 0.02 * np.cos(2.0 * np.pi * t / spec.frames)
            frame_ellipses[_RING_INDEX] = (v, cx, cy, sa * r, sb * r, th)
        frames.append(_rasterize(frame_ellipses, spec.height, spec.width))

    stack = np.stack(frames, axis=0)
    stack = np.clip(stack, 0.0, None)
    peak = stack.max()
    if peak > 0:
        stack /= peak
    return stack, maps


def simulate_kspace(img: np.ndarray, maps: np.ndarray) -> np.ndarray:
    """Forward model: per-coil k-space of one image, ``fft2c(S_c * img)``.

    Args:
        img: Image of shape (H, W), real or complex.
        maps: Sensitivity maps of shape (C, H, W).

    Returns:
        Complex k-space stack of shape (C, H, W).
    """
    return fft2c(sense_expand(img, maps))
