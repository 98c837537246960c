"""Line-based undersampling masks with a fully sampled calibration center.

Masks select whole lines along the phase-encode axis (columns by default,
matching acquisitions that store the phase-encode dimension last) and are
broadcast across the other axis. The centermost ``acs_lines`` lines are
always sampled so sensitivity calibration has a fully sampled region to
work with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "SamplingMask",
    "make_uniform_mask",
    "make_random_mask",
    "apply_mask",
    "acs_bounds",
]


def acs_bounds(axis_len: int, acs: int) -> tuple[int, int]:
    """Half-open index range [start, stop) of the centermost ``acs`` lines."""
    start = (axis_len - acs + 1) // 2
    return start, start + acs


@dataclass(frozen=True)
class SamplingMask:
    """Binary line mask over one spatial axis of a k-space slice.

    Attributes:
        height, width: Spatial size of the k-space the mask applies to.
        kind: "uniform" or "random".
        acceleration: Nominal acceleration factor R.
        acs_lines: Number of always-sampled center lines.
        pattern: uint8 vector of length ``width`` (phase_axis="cols") or
            ``height`` (phase_axis="rows"), entries in {0, 1}.
        seed: RNG seed used for random masks, None for uniform masks.
        phase_axis: Which axis the pattern indexes.
    """

    height: int
    width: int
    kind: str
    acceleration: int
    acs_lines: int
    pattern: np.ndarray
    seed: Optional[int] = None
    phase_axis: str = "cols"

    def __post_init__(self):
        if self.phase_axis not in ("rows", "cols"):
            raise ValueError(f"phase_axis must be 'rows' or 'cols', got {self.phase_axis!r}")
        pattern = np.ascontiguousarray(np.asarray(self.pattern, dtype=np.uint8))
        object.__setattr__(self, "pattern", pattern)
        if pattern.ndim != 1 or pattern.size != self.axis_len:
            raise ValueError(
                f"pattern length {pattern.size} does not match phase axis length {self.axis_len}"
            )
        if not np.all((pattern == 0) | (pattern == 1)):
            raise ValueError("pattern entries must be 0 or 1")
        lo, hi = acs_bounds(self.axis_len, self.acs_lines)
        if not np.all(pattern[lo:hi] == 1):
            raise ValueError("all ACS center lines must be sampled")
        if int(pattern.sum()) < self.acs_lines:
            raise ValueError("sampled line count below acs_lines")

    @property
    def axis_len(self) -> int:
        return self.width if self.phase_axis == "cols" else self.height

    @property
    def num_sampled(self) -> int:
        return int(self.pattern.sum())

    @property
    def sampling_fraction(self) -> float:
        return self.num_sampled / self.axis_len

    def sampled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.pattern)

    def acs_range(self) -> tuple[int, int]:
        return acs_bounds(self.axis_len, self.acs_lines)

    def to_array(self) -> np.ndarray:
        """Full (height, width) boolean mask."""
        if self.phase_axis == "cols":
            return np.broadcast_to(self.pattern.astype(bool)[None, :], (self.height, self.width)).copy()
        return np.broadcast_to(self.pattern.astype(bool)[:, None], (self.height, self.width)).copy()


def _validated_geometry(height: int, width: int, r: int, acs: int, phase_axis: str) -> int:
    if height < 1 or width < 1:
        raise ValueError(f"mask size must be positive, got {height}x{width}")
    if r < 1:
        raise ValueError(f"acceleration must be >= 1, got {r}")
    if phase_axis not in ("rows", "cols"):
        raise ValueError(f"phase_axis must be 'rows' or 'cols', got {phase_axis!r}")
    axis_len = width if phase_axis == "cols" else height
    if acs < 0 or acs > axis_len:
        raise ValueError(f"acs_lines={acs} out of range for axis length {axis_len}")
    return axis_len


def make_uniform_mask(
    height: int,
    width: int,
    r: int,
    acs: int = 16,
    phase_axis: str = "cols",
    offset: int = 0,
) -> SamplingMask:
    """Equispaced mask: every ``r``-th line plus the ``acs`` center lines.

    Deterministic; the regular grid starts at ``offset`` (default 0).
    """
    axis_len = _validated_geometry(height, width, r, acs, phase_axis)
    if not 0 <= offset < r:
        raise ValueError(f"offset must lie in [0, r), got {offset}")
    pattern = np.zeros(axis_len, dtype=np.uint8)
    pattern[offset::r] = 1
    lo, hi = acs_bounds(axis_len, acs)
    pattern[lo:hi] = 1
    return SamplingMask(height, width, "uniform", r, acs, pattern, None, phase_axis)


def make_random_mask(
    height: int,
    width: int,
    r: int,
    acs: int = 16,
    seed: Optional[int] = 0,
    phase_axis: str = "cols",
) -> SamplingMask:
    """Random line mask with a fixed fully sampled center.

    The ``acs`` center lines are always sampled; additional lines are drawn
    uniformly without replacement until ``max(round(axis_len / r), acs)``
    lines are sampled in total. Reproducible for a given ``seed``.
    """
    axis_len = _validated_geometry(height, width, r, acs, phase_axis)
    target = max(int(round(axis_len / r)), acs)
    pattern = np.zeros(axis_len, dtype=np.uint8)
    lo, hi = acs_bounds(axis_len, acs)
    pattern[lo:hi] = 1
    extra = target - acs
    if extra > 0:
        candidates = np.flatnonzero(pattern == 0)
        rng = np.random.default_rng(seed)
        chosen = rng.choice(candidates, size=extra, replace=False)
        pattern[chosen] = 1
    return SamplingMask(height, width, "random", r, acs, pattern, seed, phase_axis)


def apply_mask(ksp: np.ndarray, mask: SamplingMask) -> np.ndarray:
    """Zero out unsampled lines of ``ksp``; sampled entries pass unchanged.

    Args:
        ksp: k-space of shape (H, W) or (C, H, W) or (..., H, W).
        mask: Mask whose (height, width) matches the trailing axes.

    Returns:
        Array of the same shape and dtype with unsampled entries set to 0.
    """
    ksp = np.asarray(ksp)
    if ksp.ndim < 2 or ksp.shape[-2] != mask.height or ksp.shape[-1] != mask.width:
        raise ValueError(
            f"k-space spatial shape {ksp.shape[-2:]} does not match mask "
            f"{(mask.height, mask.width)}"
        )
    keep = mask.to_array()
    return np.where(keep, ksp, np.zeros((), dtype=ksp.dtype))
