"""Reconstruction loss components and their analytic gradients.

Five components: k-space fidelity, SSIM, the high-frequency edge loss
(Scharr gradients -> patch variance -> centered FFT -> Butterworth
high-pass -> L1), a perceptual feature loss over a supplied convolution
stack, and an L1+L2 k-space regularizer. Each returns its value, or
``(value, grad)`` with ``with_grad=True``.

Conventions:

* Norms are element-count normalized (means) by default so values and the
  default weights are resolution independent; pass ``normalized=False``
  for raw sums.
* Gradients w.r.t. complex arrays use the real parameterization: d/d(re)
  and d/d(im) packed as the real and imaginary parts of one complex
  number. The subgradient of ``|z|`` at 0 is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import signal

from .filters import (
    SCHARR_X,
    SCHARR_Y,
    HighPassSpec,
    highpass_filter,
    patch_variance,
    patch_variance_backward,
    scharr_gradient_adjoint,
    sym_pad,
    sym_pad_adjoint,
)
from .transforms import fft2c, ifft2c

__all__ = [
    "LossWeights",
    "EagleSpec",
    "LossReport",
    "fidelity_loss",
    "ssim_loss",
    "eagle_loss",
    "perceptual_loss",
    "reg_loss",
    "total_loss",
    "grad_check",
    "GradCheckReport",
    "make_grad_probe",
    "ConvLayer",
    "ConvFeatureExtractor",
    "random_extractor",
    "identity_extractor",
]

ZERO_DIV_FLOOR = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """Component weights of the total loss (all nonnegative)."""

    alpha1: float = 1.0  # k-space fidelity
    alpha2: float = 1.0  # SSIM
    alpha3: float = 0.05  # edge loss
    alpha4: float = 0.1  # perceptual
    alpha5: float = 0.01  # k-space regularizer
    beta: float = 1.0  # L2 share inside the regularizer

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class EagleSpec:
    """Patch size and high-pass filter of the edge loss."""

    patch: int = 5
    filter: HighPassSpec = field(default_factory=HighPassSpec)

    def __post_init__(self):
        if self.patch < 1:
            raise ValueError(f"patch must be >= 1, got {self.patch}")


@dataclass
class LossReport:
    """Per-component values plus the weighted total.

    ``vgg`` is None when no feature extractor was supplied (the component
    is disabled and contributes 0 to the total). ``grad`` is populated
    only when a gradient was requested.
    """

    fidelity: float
    ssim: float
    eagle: float
    vgg: Optional[float]
    reg: float
    total: float
    grad: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "ssim": self.ssim,
            "eagle": self.eagle,
            "vgg": self.vgg,
            "reg": self.reg,
            "total": self.total,
        }


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape != b.shape:
        raise ValueError(f"{what}: shape mismatch {a.shape} vs {b.shape}")


def _check_real_image(img: np.ndarray, name: str) -> np.ndarray:
    img = np.asarray(img)
    if np.iscomplexobj(img):
        raise ValueError(f"{name} must be real-valued")
    if img.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {img.shape}")
    return img.astype(np.float64, copy=False)


# ---------------------------------------------------------------------------
# k-space fidelity
# ---------------------------------------------------------------------------


def fidelity_loss(
    k_pred: np.ndarray,
    k_full: np.ndarray,
    with_grad: bool = False,
    normalized: bool = True,
):
    """Squared-modulus k-space mismatch, ``mean |k_pred - k_full|^2``.

    Gradient w.r.t. ``k_pred`` is ``2 (k_pred - k_full) / N``.
    """
    k_pred = np.asarray(k_pred, dtype=np.complex128)
    k_full = np.asarray(k_full, dtype=np.complex128)
    _check_same_shape(k_pred, k_full, "fidelity_loss")
    diff = k_pred - k_full
    n = diff.size if normalized else 1
    value = float(np.sum(np.abs(diff) ** 2)) / n
    if not with_grad:
        return value
    return value, 2.0 * diff / n


# ---------------------------------------------------------------------------
# SSIM
# ---------------------------------------------------------------------------

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


_SSIM_W = _gaussian_window()


def _win_valid(img: np.ndarray) -> np.ndarray:
    return signal.correlate(img, _SSIM_W, mode="valid")


def _win_adjoint(g: np.ndarray) -> np.ndarray:
    # adjoint of the valid-mode window average; the window is symmetric
    return signal.convolve(g, _SSIM_W, mode="full")


def ssim_loss(
    img: np.ndarray,
    ref: np.ndarray,
    with_grad: bool = False,
    data_range: Optional[float] = None,
):
    """``1 - mean SSIM`` with an 11x11 Gaussian window (sigma 1.5).

    The SSIM mean runs over all fully interior window positions. The
    dynamic range defaults to ``ref.max()`` and must be positive.
    """
    img = _check_real_image(img, "img")
    ref = _check_real_image(ref, "ref")
    _check_same_shape(img, ref, "ssim_loss")
    if img.shape[0] < SSIM_WINDOW or img.shape[1] < SSIM_WINDOW:
        raise ValueError(
            f"image {img.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    if data_range is None:
        data_range = float(ref.max())
    if data_range <= 0:
        raise ValueError("dynamic range must be positive (is ref all zero?)")

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    mu_x = _win_valid(img)
    mu_y = _win_valid(ref)
    ex2 = _win_valid(img * img)
    ey2 = _win_valid(ref * ref)
    exy = _win_valid(img * ref)

    a1 = 2.0 * mu_x * mu_y + c1
    a2 = 2.0 * (exy - mu_x * mu_y) + c2
    b1 = mu_x**2 + mu_y**2 + c1
    b2 = (ex2 - mu_x**2) + (ey2 - mu_y**2) + c2

    num = a1 * a2
    den = b1 * b2
    s = num / den
    m = s.size
    value = 1.0 - float(s.mean())
    if not with_grad:
        return value

    # chain rule through the filtered statistics mu_x, E[x^2], E[xy]
    ds_dmu = (2.0 * mu_y * (a2 - a1) * den - num * 2.0 * mu_x * (b2 - b1)) / den**2
    ds_dex2 = -num * b1 / den**2
    ds_dexy = 2.0 * a1 / den
    grad = -(
        _win_adjoint(ds_dmu)
        + 2.0 * img * _win_adjoint(ds_dex2)
        + ref * _win_adjoint(ds_dexy)
    ) / m
    return value, grad


# ---------------------------------------------------------------------------
# high-frequency edge loss
# ---------------------------------------------------------------------------


def _edge_direction(
    img: np.ndarray,
    ref: np.ndarray,
    kernel: np.ndarray,
    spec: EagleSpec,
    with_grad: bool,
    normalized: bool,
):
    g_img = signal.correlate(sym_pad(img, (1, 1, 1, 1)), kernel, mode="valid")
    g_ref = signal.correlate(sym_pad(ref, (1, 1, 1, 1)), kernel, mode="valid")
    v_img = patch_variance(g_img, spec.patch)
    v_ref = patch_variance(g_ref, spec.patch)
    weights = highpass_filter(v_img.shape[0], v_img.shape[1], spec.filter)
    f_img = fft2c(v_img)
    m_img = np.abs(f_img) * weights
    m_ref = np.abs(fft2c(v_ref)) * weights

    diff = m_img - m_ref
    n = diff.size if normalized else 1
    value = float(np.sum(np.abs(diff))) / n
    if not with_grad:
        return value, None

    s = np.sign(diff) / n
    mag = np.abs(f_img)
    phase = np.zeros_like(f_img)
    nz = mag > 0
    phase[nz] = f_img[nz] / mag[nz]
    grad_f = (s * weights) * phase
    grad_v = np.real(ifft2c(grad_f))
    grad_g = patch_variance_backward(g_img, spec.patch, grad_v)
    grad_img = scharr_gradient_adjoint(grad_g, kernel, img.shape)
    return value, grad_img


def eagle_loss(
    img: np.ndarray,
    ref: np.ndarray,
    spec: Optional[EagleSpec] = None,
    with_grad: bool = False,
    normalized: bool = True,
):
    """High-frequency edge loss between two real images.

    For each derivative direction: Scharr gradient, per-patch variance,
    centered FFT, high-pass filtering of the magnitude, then the mean L1
    distance between the filtered magnitudes of ``img`` and ``ref``. The
    two directional losses are summed.

    Returns the value, or ``(value, grad_wrt_img)``.
    """
    if spec is None:
        spec = EagleSpec()
    img = _check_real_image(img, "img")
    ref = _check_real_image(ref, "ref")
    _check_same_shape(img, ref, "eagle_loss")
    min_side = max(3, spec.patch)
    if img.shape[0] < min_side or img.shape[1] < min_side:
        raise ValueError(f"image {img.shape} too small for patch={spec.patch}")

    vx, gx = _edge_direction(img, ref, SCHARR_X, spec, with_grad, normalized)
    vy, gy = _edge_direction(img, ref, SCHARR_Y, spec, with_grad, normalized)
    value = vx + vy
    if not with_grad:
        return value
    return value, gx + gy


# ---------------------------------------------------------------------------
# perceptual feature loss
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvLayer:
    """One feature layer: fixed 2D convolutions plus a pointwise map.

    ``weights`` has shape (out_channels, in_channels, kh, kw);
    ``nonlinearity`` is "tanh" or "identity".
    """

    weights: np.ndarray
    nonlinearity: str = "tanh"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if w.ndim != 4:
            raise ValueError("layer weights must have shape (out, in, kh, kw)")
        if self.nonlinearity not in ("tanh", "identity"):
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")


class ConvFeatureExtractor:
    """A fixed stack of reflect-padded convolution layers.

    Feature layer ``l`` is the post-nonlinearity output of layer ``l``.
    All parameters are known, so exact gradients are available.
    """

    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise ValueError("extractor needs at least one layer")
        if layers[0].weights.shape[1] != 1:
            raise ValueError("first layer must take a single input channel")
        for prev, cur in zip(layers, layers[1:]):
            if cur.weights.shape[1] != prev.weights.shape[0]:
                raise ValueError("layer channel counts do not chain")
        self.layers = layers

    @staticmethod
    def _conv(stack: np.ndarray, weights: np.ndarray) -> np.ndarray:
        out_ch, in_ch, kh, kw = weights.shape
        h, w = stack.shape[1:]
        pads = ((kh - 1) // 2, kh // 2, (kw - 1) // 2, kw // 2)
        padded = np.stack([sym_pad(stack[i], pads) for i in range(in_ch)])
        out = np.zeros((out_ch, h, w))
        for o in range(out_ch):
            for i in range(in_ch):
                out[o] += signal.correlate(padded[i], weights[o, i], mode="valid")
        return out

    @staticmethod
    def _conv_adjoint(grad: np.ndarray, weights: np.ndarray, shape) -> np.ndarray:
        out_ch, in_ch, kh, kw = weights.shape
        pads = ((kh - 1) // 2, kh // 2, (kw - 1) // 2, kw // 2)
        out = np.zeros((in_ch,) + tuple(shape))
        for i in range(in_ch):
            for o in range(out_ch):
                full = signal.convolve(grad[o], weights[o, i], mode="full")
                out[i] += sym_pad_adjoint(full, tuple(shape), pads)
        return out

    def forward(self, img: np.ndarray):
        """Per-layer post-nonlinearity features of a real 2D image."""
        stack = img[None, :, :].astype(np.float64, copy=False)
        feats = []
        for layer in self.layers:
            pre = self._conv(stack, layer.weights)
            stack = np.tanh(pre) if layer.nonlinearity == "tanh" else pre
            feats.append(stack)
        return feats

    def backprop(self, feats, grads) -> np.ndarray:
        """Gradient w.r.t. the input image given per-layer feature grads."""
        g = np.zeros_like(feats[-1])
        for idx in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[idx]
            g = g + grads[idx]
            if layer.nonlinearity == "tanh":
                g = g * (1.0 - feats[idx] ** 2)
            shape = feats[idx - 1].shape[1:] if idx > 0 else feats[0].shape[1:]
            g = self._conv_adjoint(g, layer.weights, shape)
        return g[0]


def random_extractor(seed: int = 0, channels: int = 4, depth: int = 2) -> ConvFeatureExtractor:
    """Reference extractor: fixed seeded random 3x3 filters with tanh."""
    rng = np.random.default_rng(seed)
    layers = []
    in_ch = 1
    for _ in range(depth):
        gain = 0.5 / np.sqrt(in_ch * 9)
        w = gain * rng.standard_normal((channels, in_ch, 3, 3))
        layers.append(ConvLayer(w, "tanh"))
        in_ch = channels
    return ConvFeatureExtractor(layers)


def identity_extractor() -> ConvFeatureExtractor:
    """Single identity layer; reduces the perceptual loss to image MSE."""
    w = np.zeros((1, 1, 3, 3))
    w[0, 0, 1, 1] = 1.0
    return ConvFeatureExtractor([ConvLayer(w, "identity")])


def perceptual_loss(
    img: np.ndarray,
    ref: np.ndarray,
    extractor: ConvFeatureExtractor,
    with_grad: bool = False,
    normalized: bool = True,
):
    """Sum over layers of the mean squared feature difference."""
    img = _check_real_image(img, "img")
    ref = _check_real_image(ref, "ref")
    _check_same_shape(img, ref, "perceptual_loss")
    if extractor is None:
        raise ValueError("perceptual_loss requires a feature extractor")

    feats_img = extractor.forward(img)
    feats_ref = extractor.forward(ref)
    value = 0.0
    grads = []
    for fi, fr in zip(feats_img, feats_ref):
        d = fi - fr
        n = d.size if normalized else 1
        value += float(np.sum(d**2)) / n
        grads.append(2.0 * d / n)
    if not with_grad:
        return value
    return value, extractor.backprop(feats_img, grads)


# ---------------------------------------------------------------------------
# k-space regularizer
# ---------------------------------------------------------------------------


def reg_loss(
    k: np.ndarray,
    beta: float = 1.0,
    with_grad: bool = False,
    normalized: bool = True,
):
    """Sparsity/smoothness penalty ``mean|k| + beta * sqrt(mean|k|^2)``."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    k = np.asarray(k, dtype=np.complex128)
    n = k.size if normalized else 1
    mod = np.abs(k)
    l1 = float(mod.sum()) / n
    q = float((mod**2).sum()) / n
    l2 = float(np.sqrt(q))
    value = l1 + beta * l2
    if not with_grad:
        return value

    grad = np.zeros_like(k)
    nz = mod > ZERO_DIV_FLOOR
    grad[nz] = k[nz] / mod[nz] / n
    if l2 > 0:
        grad += beta * k / (n * l2)
    return value, grad


# ---------------------------------------------------------------------------
# weighted total
# ---------------------------------------------------------------------------


def _image_to_kspace_pullback(grad_img: np.ndarray, k_pred: np.ndarray) -> np.ndarray:
    """Pull a real image-domain gradient back through img = RSS(ifft2c(k))."""
    coil_imgs = ifft2c(k_pred)
    rss = np.sqrt(np.sum(np.abs(coil_imgs) ** 2, axis=0))
    scale = np.zeros_like(rss)
    nz = rss > 0
    scale[nz] = 1.0 / rss[nz]
    grad_coils = coil_imgs * (grad_img * scale)[None, :, :]
    return fft2c(grad_coils)


def _kspace_to_image_pullback(grad_k: np.ndarray, maps: np.ndarray) -> np.ndarray:
    """Pull a k-space gradient back through k_c = fft2c(S_c * img), img real."""
    coil_grads = ifft2c(grad_k)
    return np.real(np.sum(np.conj(maps) * coil_grads, axis=0))


def total_loss(
    k_pred: np.ndarray,
    k_full: np.ndarray,
    img: np.ndarray,
    ref: np.ndarray,
    weights: Optional[LossWeights] = None,
    eagle_spec: Optional[EagleSpec] = None,
    extractor: Optional[ConvFeatureExtractor] = None,
    grad_wrt: Optional[str] = None,
    maps: Optional[np.ndarray] = None,
    normalized: bool = True,
) -> LossReport:
    """Weighted combination of all enabled loss components.

    Args:
        k_pred, k_full: Predicted and reference k-space, shape (C, H, W).
        img, ref: Reconstructed and reference real images, shape (H, W).
        weights: Component weights; defaults to the standard values.
        eagle_spec: Edge-loss parameters; defaults to patch 5 with a
            Butterworth(0.35, order 4) filter.
        extractor: Optional feature extractor; None disables the
            perceptual component (recorded as ``vgg=None``).
        grad_wrt: None, "kspace", or "image". With "kspace" the image is
            treated as RSS(ifft2c(k_pred)) and image-domain gradients are
            pulled back into k-space; with "image" the k-space is treated
            as fft2c(maps * img) and k-space gradients are pulled back to
            the (real) image. ``maps`` is required for "image" unless
            k_pred has a single coil.
        maps: Sensitivity maps for the "image" pullback.
        normalized: Mean (True) vs raw-sum (False) norms.

    Returns:
        LossReport; ``total`` is the exact weighted sum of the reported
        components.
    """
    if weights is None:
        weights = LossWeights()
    if eagle_spec is None:
        eagle_spec = EagleSpec()
    if grad_wrt not in (None, "kspace", "image"):
        raise ValueError(f"grad_wrt must be None, 'kspace' or 'image', got {grad_wrt!r}")
    k_pred = np.asarray(k_pred, dtype=np.complex128)
    if k_pred.ndim == 2:
        k_pred = k_pred[None]
    k_full = np.asarray(k_full, dtype=np.complex128)
    if k_full.ndim == 2:
        k_full = k_full[None]

    want = grad_wrt is not None
    fid = fidelity_loss(k_pred, k_full, with_grad=want, normalized=normalized)
    ssim_v = ssim_loss(img, ref, with_grad=want)
    eagle_v = eagle_loss(img, ref, eagle_spec, with_grad=want, normalized=normalized)
    reg_v = reg_loss(k_pred, weights.beta, with_grad=want, normalized=normalized)
    vgg_v = None
    if extractor is not None:
        vgg_v = perceptual_loss(img, ref, extractor, with_grad=want, normalized=normalized)

    if want:
        fid, g_fid = fid
        ssim_v, g_ssim = ssim_v
        eagle_v, g_eagle = eagle_v
        reg_v, g_reg = reg_v
        if vgg_v is not None:
            vgg_v, g_vgg = vgg_v

    total = (
        weights.alpha1 * fid
        + weights.alpha2 * ssim_v
        + weights.alpha3 * eagle_v
        + (weights.alpha4 * vgg_v if vgg_v is not None else 0.0)
        + weights.alpha5 * reg_v
    )

    grad = None
    if want:
        g_img = weights.alpha2 * g_ssim + weights.alpha3 * g_eagle
        if vgg_v is not None:
            g_img = g_img + weights.alpha4 * g_vgg
        g_k = weights.alpha1 * g_fid + weights.alpha5 * g_reg
        if grad_wrt == "kspace":
            grad = g_k + _image_to_kspace_pullback(g_img, k_pred)
        else:
            if maps is None:
                if k_pred.shape[0] != 1:
                    raise ValueError("maps are required to differentiate w.r.t. the image")
                maps = np.ones_like(k_pred)
            grad = g_img + _kspace_to_image_pullback(g_k, np.asarray(maps))

    return LossReport(
        fidelity=fid,
        ssim=ssim_v,
        eagle=eagle_v,
        vgg=vgg_v,
        reg=reg_v,
        total=total,
        grad=grad,
    )


# ---------------------------------------------------------------------------
# finite-difference gradient validation
# ---------------------------------------------------------------------------


@dataclass
class GradCheckReport:
    max_rel_error: float
    checked: int
    tolerance: float
    passed: bool


def grad_check(
    fn: Callable,
    x: np.ndarray,
    epsilon: float = 1e-5,
    tolerance: float = 1e-6,
    samples: int = 64,
    rng=None,
    exclude: Optional[np.ndarray] = None,
    abs_floor: float = 1e-10,
    rel_floor: float = 1e-5,
) -> GradCheckReport:
    """Compare an analytic gradient against central finite differences.

    Args:
        fn: Callable ``fn(x) -> (value, grad)`` with ``grad`` matching
            ``x`` (complex gradients in the packed convention).
        x: Base point.
        epsilon: FD step.
        tolerance: Maximum allowed relative error.
        samples: Number of coordinates to probe (all, if x is smaller).
        rng: Seed or Generator for coordinate selection.
        exclude: Optional boolean array (shape of ``x``); True entries are
            skipped, e.g. coordinates near a kink of the loss.
        abs_floor: Both FD and analytic values below this are treated as
            matching zeros.
        rel_floor: Coordinates whose FD and analytic values are both below
            ``rel_floor * max|grad|`` are numerically zero at this FD step
            and are treated as matching.

    Returns:
        GradCheckReport with the max relative error over probed
        coordinates. Differences below the roundoff resolution of the
        central difference itself (machine epsilon on the loss value,
        divided by the step) count as matching.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = np.array(x)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    value, grad = fn(x)
    grad = np.asarray(grad)
    if grad.shape != x.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match input {x.shape}")
    floor = max(abs_floor, rel_floor * float(np.abs(grad).max()))
    fd_noise = 4.0 * np.finfo(np.float64).eps * max(abs(value), 1e-3) / (2.0 * epsilon)

    n_coords = min(samples, x.size)
    idxs = rng.choice(x.size, size=n_coords, replace=False)
    is_complex = np.iscomplexobj(x)
    excl_flat = None if exclude is None else np.asarray(exclude).reshape(-1)

    max_rel = 0.0
    checked = 0
    flat = x.reshape(-1)
    for i in idxs:
        if excl_flat is not None and excl_flat[i]:
            continue
        steps = (epsilon, 1j * epsilon) if is_complex else (epsilon,)
        for step in steps:
            orig = flat[i]
            flat[i] = orig + step
            f_plus = fn(x)[0]
            flat[i] = orig - step
            f_minus = fn(x)[0]
            flat[i] = orig
            fd = (f_plus - f_minus) / (2.0 * epsilon)
            an = grad.reshape(-1)[i]
            an_part = (an.real if step.real != 0 else an.imag) if is_complex else float(an)
            denom = max(abs(fd), abs(an_part))
            checked += 1
            if denom < floor or abs(fd - an_part) < fd_noise:
                continue
            max_rel = max(max_rel, abs(fd - an_part) / denom)
    return GradCheckReport(max_rel, checked, tolerance, max_rel < tolerance)


def make_grad_probe(name: str, size: int = 16, seed: int = 0):
    """Standard gradient-check setup for one loss component.

    Returns ``(fn, x0, epsilon, tolerance, exclude)`` suitable for
    :func:`grad_check`. Probes are deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    if name == "fidelity":
        k_full = rng.standard_normal((1, size, size)) + 1j * rng.standard_normal((1, size, size))
        x0 = rng.standard_normal((1, size, size)) + 1j * rng.standard_normal((1, size, size))
        return (lambda k: fidelity_loss(k, k_full, with_grad=True)), x0, 1e-5, 1e-6, None
    if name == "ssim":
        if size < SSIM_WINDOW:
            raise ValueError(f"ssim probe needs size >= {SSIM_WINDOW}")
        ref = rng.uniform(0.0, 1.0, (size, size))
        x0 = rng.uniform(0.0, 1.0, (size, size))
        return (lambda a: ssim_loss(a, ref, with_grad=True)), x0, 1e-4, 1e-4, None
    if name == "eagle":
        spec = EagleSpec()
        ref = rng.uniform(0.0, 1.0, (size, size))
        x0 = rng.uniform(0.0, 1.0, (size, size))
        return (lambda a: eagle_loss(a, ref, spec, with_grad=True)), x0, 1e-4, 1e-3, None
    if name in ("vgg", "perceptual"):
        extractor = random_extractor(seed=seed)
        ref = rng.uniform(0.0, 1.0, (size, size))
        x0 = rng.uniform(0.0, 1.0, (size, size))
        fn = lambda a: perceptual_loss(a, ref, extractor, with_grad=True)
        return fn, x0, 1e-5, 1e-5, None
    if name == "reg":
        x0 = rng.standard_normal((1, size, size)) + 1j * rng.standard_normal((1, size, size))
        exclude = np.abs(x0) < 1e-6
        return (lambda k: reg_loss(k, beta=0.5, with_grad=True)), x0, 1e-5, 1e-6, exclude
    raise ValueError(f"unknown loss {name!r}")
