"""Zero-filled and gradient-descent reconstruction.

The optimizer works on a single complex image through the forward model
``k_c = fft2c(S_c * img)``. In blind mode the objective is fidelity to the
measured lines plus the k-space regularizer; with ground-truth losses
enabled it becomes the full weighted objective, which is the desk-scale
stand-in for training a refinement network against a reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .losses import (
    ConvFeatureExtractor,
    EagleSpec,
    LossReport,
    LossWeights,
    eagle_loss,
    fidelity_loss,
    perceptual_loss,
    reg_loss,
    ssim_loss,
)
from .phantom import simulate_kspace
from .sampling import SamplingMask
from .transforms import ifft2c, rss_combine

__all__ = [
    "ReconConfig",
    "ReconDivergenceError",
    "zero_filled",
    "data_consistency",
    "gd_reconstruct",
    "tune_step",
]

DIVERGENCE_FACTOR = 10.0


class ReconDivergenceError(RuntimeError):
    """Raised when the optimization loss blows past the divergence guard."""


@dataclass(frozen=True)
class ReconConfig:
    """Reconstruction settings.

    Attributes:
        method: "zero_filled" or "gd".
        iterations: Gradient steps (0 returns the initialization).
        step: Fixed step size for gradient descent.
        weights: Loss component weights.
        eagle: Edge-loss parameters.
        use_ground_truth_losses: Enable the image-domain components
            (SSIM/edge/perceptual); requires a ground-truth image.
        dc_every: Apply the data-consistency projection every this many
            steps (0 disables it).
    """

    method: str = "gd"
    iterations: int = 100
    step: float = 0.1
    weights: LossWeights = field(default_factory=LossWeights)
    eagle: EagleSpec = field(default_factory=EagleSpec)
    use_ground_truth_losses: bool = False
    dc_every: int = 1

    def __post_init__(self):
        if self.method not in ("zero_filled", "gd"):
            raise ValueError(f"method must be 'zero_filled' or 'gd', got {self.method!r}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.dc_every < 0:
            raise ValueError(f"dc_every must be >= 0, got {self.dc_every}")


def zero_filled(masked_ksp: np.ndarray, maps: Optional[np.ndarray] = None) -> np.ndarray:
    """Zero-filled reconstruction: per-coil inverse FFT, then RSS.

    ``maps`` is accepted so reconstructors share a signature; the RSS
    combination does not use it.
    """
    masked_ksp = np.asarray(masked_ksp, dtype=np.complex128)
    if masked_ksp.ndim != 3:
        raise ValueError(f"expected (C, H, W) k-space, got shape {masked_ksp.shape}")
    return rss_combine(ifft2c(masked_ksp))


def data_consistency(k_est: np.ndarray, masked_ksp: np.ndarray, mask: SamplingMask) -> np.ndarray:
    """Replace sampled entries of ``k_est`` with the measurements."""
    k_est = np.asarray(k_est)
    masked_ksp = np.asarray(masked_ksp)
    if k_est.shape != masked_ksp.shape:
        raise ValueError(f"shape mismatch {k_est.shape} vs {masked_ksp.shape}")
    if k_est.shape[-2:] != (mask.height, mask.width):
        raise ValueError(
            f"k-space spatial shape {k_est.shape[-2:]} does not match mask "
            f"{(mask.height, mask.width)}"
        )
    return np.where(mask.to_array(), masked_ksp, k_est)


def _sense_adjoint(k: np.ndarray, maps: np.ndarray) -> np.ndarray:
    """Adjoint of the forward model: sum_c conj(S_c) * ifft2c(k_c)."""
    return np.sum(np.conj(maps) * ifft2c(k), axis=0)


def _magnitude_chain(x: np.ndarray, grad_mag: np.ndarray) -> np.ndarray:
    """Pull a gradient w.r.t. |x| back to the complex image x."""
    mag = np.abs(x)
    out = np.zeros_like(x)
    nz = mag > 0
    out[nz] = (x[nz] / mag[nz]) * grad_mag[nz]
    return out


def _objective(
    x: np.ndarray,
    masked_ksp: np.ndarray,
    mask_arr: np.ndarray,
    maps: np.ndarray,
    cfg: ReconConfig,
    k_full: Optional[np.ndarray],
    ground_truth: Optional[np.ndarray],
    extractor: Optional[ConvFeatureExtractor],
    with_grad: bool,
) -> tuple[LossReport, Optional[np.ndarray]]:
    w = cfg.weights
    k_pred = simulate_kspace(x, maps)

    if cfg.use_ground_truth_losses:
        fid = fidelity_loss(k_pred, k_full, with_grad=with_grad)
    else:
        # blind mode: fidelity against the measured lines only
        fid = fidelity_loss(np.where(mask_arr, k_pred, 0.0), masked_ksp, with_grad=with_grad)
    reg = reg_loss(k_pred, w.beta, with_grad=with_grad)
    if with_grad:
        fid, g_fid = fid
        reg, g_reg = reg
        if not cfg.use_ground_truth_losses:
            g_fid = np.where(mask_arr, g_fid, 0.0)

    ssim_v = 0.0
    eagle_v = 0.0
    vgg_v = None
    g_img = None
    if cfg.use_ground_truth_losses:
        m = np.abs(x)
        ssim_v = ssim_loss(m, ground_truth, with_grad=with_grad)
        eagle_v = eagle_loss(m, ground_truth, cfg.eagle, with_grad=with_grad)
        if extractor is not None:
            vgg_v = perceptual_loss(m, ground_truth, extractor, with_grad=with_grad)
        if with_grad:
            ssim_v, g_ssim = ssim_v
            eagle_v, g_eagle = eagle_v
            g_img = w.alpha2 * g_ssim + w.alpha3 * g_eagle
            if vgg_v is not None:
                vgg_v, g_vgg = vgg_v
                g_img = g_img + w.alpha4 * g_vgg

    total = (
        w.alpha1 * fid
        + w.alpha2 * ssim_v
        + w.alpha3 * eagle_v
        + (w.alpha4 * vgg_v if vgg_v is not None else 0.0)
        + w.alpha5 * reg
    )
    report = LossReport(fid, ssim_v, eagle_v, vgg_v, reg, total)
    if not with_grad:
        return report, None

    g_k = w.alpha1 * g_fid + w.alpha5 * g_reg
    grad_x = _sense_adjoint(g_k, maps)
    if g_img is not None:
        grad_x = grad_x + _magnitude_chain(x, g_img)
    return report, grad_x


def gd_reconstruct(
    masked_ksp: np.ndarray,
    mask: SamplingMask,
    maps: np.ndarray,
    cfg: ReconConfig,
    ground_truth: Optional[np.ndarray] = None,
    extractor: Optional[ConvFeatureExtractor] = None,
) -> tuple[np.ndarray, list[LossReport]]:
    """Fixed-step gradient descent on the complex image.

    Starts from the zero-filled reconstruction. The trace holds one
    LossReport per visited iterate (``iterations + 1`` entries, gradients
    stripped); disabled components are reported as 0. The returned image
    is the magnitude of the best-total iterate, so its loss never exceeds
    the initialization's. Raises :class:`ReconDivergenceError` if the
    total grows past 10x its initial value.

    Args:
        masked_ksp: Undersampled measurements, shape (C, H, W).
        mask: The sampling mask.
        maps: Sensitivity maps, shape (C, H, W).
        cfg: Settings; with ``use_ground_truth_losses`` a ground-truth
            image must be supplied.
        ground_truth: Reference image for the image-domain components.
        extractor: Optional feature extractor for the perceptual term.

    Returns:
        (image, trace): real (H, W) image and the per-iteration reports.
    """
    masked_ksp = np.asarray(masked_ksp, dtype=np.complex128)
    maps = np.asarray(maps, dtype=np.complex128)
    if cfg.use_ground_truth_losses and ground_truth is None:
        raise ValueError("ground_truth is required when use_ground_truth_losses is set")
    mask_arr = mask.to_array()

    k_full = None
    if cfg.use_ground_truth_losses:
        ground_truth = np.asarray(ground_truth, dtype=np.float64)
        k_full = simulate_kspace(ground_truth, maps)

    x = zero_filled(masked_ksp).astype(np.complex128)

    def evaluate(xc, want_grad):
        return _objective(
            xc, masked_ksp, mask_arr, maps, cfg, k_full, ground_truth, extractor, want_grad
        )

    report, grad = evaluate(x, cfg.iterations > 0)
    trace = [report]
    best_total, best_x = report.total, x

    for t in range(1, cfg.iterations + 1):
        x = x - cfg.step * grad
        if cfg.dc_every > 0 and t % cfg.dc_every == 0:
            k = simulate_kspace(x, maps)
            k = np.where(mask_arr, masked_ksp, k)
            x = _sense_adjoint(k, maps)
        report, grad = evaluate(x, t < cfg.iterations)
        trace.append(report)
        if report.total < best_total:
            best_total, best_x = report.total, x
        if report.total > DIVERGENCE_FACTOR * trace[0].total:
            raise ReconDivergenceError(
                f"total loss {report.total:.6g} at iteration {t} exceeds "
                f"{DIVERGENCE_FACTOR:g}x the initial {trace[0].total:.6g}; "
                f"reduce the step size (current {cfg.step:g})"
            )

    return np.abs(best_x), trace


def tune_step(
    masked_ksp: np.ndarray,
    mask: SamplingMask,
    maps: np.ndarray,
    cfg: ReconConfig,
    ground_truth: Optional[np.ndarray] = None,
    extractor: Optional[ConvFeatureExtractor] = None,
    candidates: int = 8,
    probe_iterations: int = 10,
    base: float = 2.0,
) -> float:
    """Pick a step size by a halving ladder of short probe runs.

    Runs ``candidates`` probes with steps ``base / 2**i`` and returns the
    step whose probe reaches the lowest final total; diverging probes are
    discarded.
    """
    if candidates < 1:
        raise ValueError("need at least one candidate step")
    best_step, best_total = None, np.inf
    for i in range(candidates):
        step = base / 2.0**i
        probe_cfg = replace(cfg, step=step, iterations=probe_iterations)
        try:
            _, trace = gd_reconstruct(
                masked_ksp, mask, maps, probe_cfg, ground_truth, extractor
            )
        except ReconDivergenceError:
            continue
        if trace[-1].total < best_total:
            best_total, best_step = trace[-1].total, step
    if best_step is None:
        raise ReconDivergenceError("all candidate steps diverged; lower the base step")
    return best_step
