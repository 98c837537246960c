import numpy as np
import pytest

from ksplab import (
    EagleSpec,
    HighPassSpec,
    LossWeights,
    eagle_loss,
    fft2c,
    fidelity_loss,
    filtered_magnitude,
    grad_check,
    identity_extractor,
    ifft2c,
    make_grad_probe,
    patch_variance,
    perceptual_loss,
    random_extractor,
    reg_loss,
    rss_combine,
    scharr_gradients,
    sense_expand,
    ssim_loss,
    total_loss,
)
from ksplab.losses import ConvFeatureExtractor, ConvLayer

from oracles import naive_edge_loss


# ---------------------------------------------------------------- fidelity


def test_fidelity_zero_at_equality(rng):
    k = rng.standard_normal((2, 8, 8)) + 1j * rng.standard_normal((2, 8, 8))
    value, grad = fidelity_loss(k, k, with_grad=True)
    assert value == 0.0
    assert np.abs(grad).max() == 0.0


def test_fidelity_unit_offset():
    k_pred = np.ones((2, 4, 4), dtype=complex)
    assert fidelity_loss(k_pred, np.zeros_like(k_pred)) == pytest.approx(1.0)


def test_fidelity_matches_scalar_oracle(rng):
    a = rng.standard_normal((2, 5, 5)) + 1j * rng.standard_normal((2, 5, 5))
    b = rng.standard_normal((2, 5, 5)) + 1j * rng.standard_normal((2, 5, 5))
    acc = 0.0
    for idx in np.ndindex(a.shape):
        acc += abs(a[idx] - b[idx]) ** 2
    assert fidelity_loss(a, b) == pytest.approx(acc / a.size, rel=1e-12)
    assert fidelity_loss(a, b, normalized=False) == pytest.approx(acc, rel=1e-12)


def test_fidelity_shape_mismatch():
    with pytest.raises(ValueError):
        fidelity_loss(np.ones((2, 4, 4)), np.ones((2, 4, 5)))


@pytest.mark.parametrize("seed", range(3))
def test_fidelity_gradient_fd(seed):
    fn, x0, eps, tol, excl = make_grad_probe("fidelity", 8, seed)
    rep = grad_check(fn, x0, epsilon=eps, tolerance=tol, rng=seed, exclude=excl)
    assert rep.passed, rep.max_rel_error


# ---------------------------------------------------------------- ssim


def test_ssim_loss_zero_at_equality(rng):
    img = rng.uniform(0, 1, (16, 16))
    assert ssim_loss(img, img) == pytest.approx(0.0, abs=1e-12)


def test_ssim_loss_penalizes_luminance_shift(rng):
    ref = rng.uniform(0, 1, (16, 16))
    assert ssim_loss(ref + 10.0, ref) > 0.1


def test_ssim_matches_skimage(rng):
    structural_similarity = pytest.importorskip("skimage.metrics").structural_similarity
    img = rng.uniform(0, 1, (32, 40))
    ref = rng.uniform(0, 1, (32, 40))
    theirs = structural_similarity(
        img, ref, win_size=11, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False, data_range=float(ref.max()),
    )
    assert 1.0 - ssim_loss(img, ref) == pytest.approx(theirs, abs=1e-12)


def test_ssim_rejects_bad_inputs(rng):
    img = rng.uniform(0, 1, (16, 16))
    with pytest.raises(ValueError):
        ssim_loss(img, np.zeros((16, 16)))  # undefined dynamic range
    with pytest.raises(ValueError):
        ssim_loss(img[:8], img[:8])  # smaller than the window
    with pytest.raises(ValueError):
        ssim_loss(img.astype(complex), img)


@pytest.mark.parametrize("seed", range(3))
def test_ssim_gradient_fd(seed):
    fn, x0, eps, tol, excl = make_grad_probe("ssim", 16, seed)
    rep = grad_check(fn, x0, epsilon=eps, tolerance=tol, rng=seed, exclude=excl)
    assert rep.passed, rep.max_rel_error


@pytest.mark.parametrize("seed", range(3))
def test_ssim_gradient_fd_32x32_tight(seed):
    fn, x0, eps, _, excl = make_grad_probe("ssim", 32, seed)
    rep = grad_check(fn, x0, epsilon=eps, tolerance=1e-5, rng=seed, exclude=excl)
    assert rep.passed, rep.max_rel_error


# ---------------------------------------------------------------- edge loss


def _spec():
    return EagleSpec(5, HighPassSpec("butterworth", 0.35, 4))


def test_eagle_zero_at_equality(rng):
    img = rng.uniform(0, 1, (20, 20))
    assert eagle_loss(img, img, _spec()) == 0.0


def test_eagle_symmetric(rng):
    a = rng.uniform(0, 1, (20, 20))
    b = rng.uniform(0, 1, (20, 20))
    assert eagle_loss(a, b, _spec()) == eagle_loss(b, a, _spec())


def test_eagle_constant_offset_invariance(rng):
    a = rng.uniform(0, 1, (20, 20))
    b = rng.uniform(0, 1, (20, 20))
    base = eagle_loss(a, b, _spec())
    assert eagle_loss(a + 0.3, b, _spec()) == pytest.approx(base, abs=1e-12)
    assert eagle_loss(a + 0.3, b + 0.3, _spec()) == pytest.approx(base, abs=1e-12)
    assert eagle_loss(a, a + 0.05, _spec()) <= 1e-12


def test_eagle_positive_under_checkerboard(rng):
    img = rng.uniform(0, 1, (20, 20))
    ii, jj = np.indices(img.shape)
    checker = 0.05 * ((-1.0) ** (ii + jj))
    assert eagle_loss(img + checker, img, _spec()) > 1e-6


def test_eagle_matches_naive_reimplementation(rng):
    img = rng.uniform(0, 1, (20, 20))
    ref = rng.uniform(0, 1, (20, 20))
    mine = eagle_loss(img, ref, _spec())
    oracle = naive_edge_loss(img, ref, 5, 0.35, 4)
    assert mine == pytest.approx(oracle, rel=1e-12)


def test_eagle_input_validation():
    with pytest.raises(ValueError):
        eagle_loss(np.ones((4, 4)), np.ones((4, 4)), EagleSpec(5))
    with pytest.raises(ValueError):
        eagle_loss(np.ones((8, 8)), np.ones((8, 9)), EagleSpec(5))


@pytest.mark.parametrize("seed", range(3))
def test_eagle_gradient_fd(seed):
    # away from near-zero FFT bins the gradient is accurate well past the
    # acceptance tolerance of 1e-3
    fn, x0, eps, _, excl = make_grad_probe("eagle", 20, seed)
    rep = grad_check(fn, x0, epsilon=eps, tolerance=1e-4, rng=seed, exclude=excl)
    assert rep.passed, rep.max_rel_error


def _edge_loss_via_blocks(img, ref, spec, kernel_scale):
    """Re-build the pipeline from the public blocks with a scaled kernel."""
    total = 0.0
    for direction in (0, 1):
        g_img = scharr_gradients(img, scale=kernel_scale)[direction]
        g_ref = scharr_gradients(ref, scale=kernel_scale)[direction]
        m_img = filtered_magnitude(patch_variance(g_img, spec.patch), spec.filter)
        m_ref = filtered_magnitude(patch_variance(g_ref, spec.patch), spec.filter)
        total += float(np.mean(np.abs(m_img - m_ref)))
    return total


def test_eagle_equals_block_pipeline(rng):
    img = rng.uniform(0, 1, (20, 20))
    ref = rng.uniform(0, 1, (20, 20))
    assert _edge_loss_via_blocks(img, ref, _spec(), 1.0) == pytest.approx(
        eagle_loss(img, ref, _spec()), rel=1e-12
    )


def test_kernel_rescaling_preserves_loss_ordering(rng):
    # rescaling the derivative kernel rescales values but must not change
    # which candidate image is closer to the reference
    ref = rng.uniform(0, 1, (20, 20))
    candidates = [ref + rng.normal(0, s, ref.shape) for s in (0.01, 0.05, 0.2)]
    base = [_edge_loss_via_blocks(c, ref, _spec(), 1.0) for c in candidates]
    for scale in (0.5, 2.0, 16.0):
        scaled = [_edge_loss_via_blocks(c, ref, _spec(), scale) for c in candidates]
        assert np.argsort(base).tolist() == np.argsort(scaled).tolist()
        # variance is quadratic in the kernel, so values scale by scale^2
        ratios = [s / b for s, b in zip(scaled, base)]
        assert np.allclose(ratios, scale**2, rtol=1e-8)


# ---------------------------------------------------------------- perceptual


def test_perceptual_zero_at_equality(rng):
    img = rng.uniform(0, 1, (12, 12))
    assert perceptual_loss(img, img, random_extractor(0)) == 0.0


def test_identity_extractor_reduces_to_mse(rng):
    img = rng.uniform(0, 1, (10, 10))
    ref = rng.uniform(0, 1, (10, 10))
    value = perceptual_loss(img, ref, identity_extractor())
    assert value == pytest.approx(float(np.mean((img - ref) ** 2)), rel=1e-12)


def test_extractor_validation():
    with pytest.raises(ValueError):
        ConvFeatureExtractor([])
    with pytest.raises(ValueError):
        ConvLayer(np.ones((2, 1, 3, 3)), "relu")
    with pytest.raises(ValueError):
        # channel chain broken: 2 outputs feeding a 3-input layer
        ConvFeatureExtractor([ConvLayer(np.ones((2, 1, 3, 3))), ConvLayer(np.ones((2, 3, 3, 3)))])
    with pytest.raises(ValueError):
        perceptual_loss(np.ones((8, 8)), np.ones((8, 8)), None)


@pytest.mark.parametrize("seed", range(3))
def test_perceptual_gradient_fd(seed):
    fn, x0, eps, tol, excl = make_grad_probe("vgg", 12, seed)
    rep = grad_check(fn, x0, epsilon=eps, tolerance=tol, rng=seed, exclude=excl)
    assert rep.passed, rep.max_rel_error


# ---------------------------------------------------------------- regularizer


def test_reg_zero_k():
    value, grad = reg_loss(np.zeros((2, 4, 4), dtype=complex), 1.0, with_grad=True)
    assert value == 0.0
    assert np.abs(grad).max() == 0.0


def test_reg_all_ones():
    k = np.ones((3, 4, 4), dtype=complex)
    assert reg_loss(k, beta=1.0) == pytest.approx(2.0)


def test_reg_matches_scalar_oracle(rng):
    k = rng.standard_normal((2, 6, 6)) + 1j * rng.standard_normal((2, 6, 6))
    n = k.size
    l1 = sum(abs(v) for v in k.ravel()) / n
    l2 = np.sqrt(sum(abs(v) ** 2 for v in k.ravel()) / n)
    assert reg_loss(k, beta=0.5) == pytest.approx(l1 + 0.5 * l2, rel=1e-12)


def test_reg_rejects_negative_beta():
    with pytest.raises(ValueError):
        reg_loss(np.ones((1, 2, 2), dtype=complex), beta=-0.1)


@pytest.mark.parametrize("seed", range(3))
def test_reg_gradient_fd(seed):
    fn, x0, eps, tol, excl = make_grad_probe("reg", 8, seed)
    rep = grad_check(fn, x0, epsilon=eps, tolerance=tol, rng=seed, exclude=excl)
    assert rep.passed, rep.max_rel_error


# ---------------------------------------------------------------- total


def _total_setup(rng, coils=2, size=16):
    k_full = rng.standard_normal((coils, size, size)) + 1j * rng.standard_normal(
        (coils, size, size)
    )
    ref = rss_combine(ifft2c(k_full))
    k_pred = rng.standard_normal((coils, size, size)) + 1j * rng.standard_normal(
        (coils, size, size)
    )
    img = rss_combine(ifft2c(k_pred))
    return k_pred, k_full, img, ref


def test_total_perfect_reconstruction_leaves_only_reg(rng):
    k_full = rng.standard_normal((2, 16, 16)) + 1j * rng.standard_normal((2, 16, 16))
    img = rss_combine(ifft2c(k_full))
    w = LossWeights()
    rep = total_loss(k_full, k_full, img, img, w, EagleSpec())
    assert rep.fidelity == 0.0 and rep.eagle == 0.0
    assert rep.ssim == pytest.approx(0.0, abs=1e-12)
    assert rep.total == pytest.approx(w.alpha5 * rep.reg, rel=1e-12)
    assert rep.vgg is None


def test_total_zero_weights(rng):
    k_pred, k_full, img, ref = _total_setup(rng)
    w = LossWeights(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert total_loss(k_pred, k_full, img, ref, w, EagleSpec()).total == 0.0


def test_total_equals_weighted_component_sum(rng):
    k_pred, k_full, img, ref = _total_setup(rng)
    w = LossWeights()
    rep = total_loss(k_pred, k_full, img, ref, w, EagleSpec(), extractor=random_extractor(0))
    rhs = (
        w.alpha1 * rep.fidelity
        + w.alpha2 * rep.ssim
        + w.alpha3 * rep.eagle
        + w.alpha4 * rep.vgg
        + w.alpha5 * rep.reg
    )
    assert abs(rep.total - rhs) <= 1e-12 * abs(rep.total)


def test_total_on_8x_zero_filled_phantom(phantom_8x):
    from ksplab import simulate_kspace, zero_filled

    recon = zero_filled(phantom_8x["masked"])
    k_pred = simulate_kspace(recon, phantom_8x["maps"])
    w = LossWeights()
    rep = total_loss(k_pred, phantom_8x["k_full"], recon, phantom_8x["gt"], w, EagleSpec())
    rhs = (
        w.alpha1 * rep.fidelity
        + w.alpha2 * rep.ssim
        + w.alpha3 * rep.eagle
        + w.alpha5 * rep.reg
    )
    assert rep.vgg is None
    assert rep.total == rhs  # exact: computed as this very sum
    assert rep.fidelity > 0 and rep.ssim > 0 and rep.eagle > 0 and rep.reg > 0


def test_total_gradient_wrt_kspace_fd(rng):
    k_pred, k_full, _, ref = _total_setup(rng)

    def fn(k):
        img = rss_combine(ifft2c(k))
        rep = total_loss(k, k_full, img, ref, LossWeights(), EagleSpec(), grad_wrt="kspace")
        return rep.total, rep.grad

    rep = grad_check(fn, k_pred, epsilon=1e-4, tolerance=2e-3, samples=32, rng=0)
    assert rep.passed, rep.max_rel_error


def test_total_gradient_wrt_image_fd(rng):
    k_full = rng.standard_normal((3, 16, 16)) + 1j * rng.standard_normal((3, 16, 16))
    ref = rss_combine(ifft2c(k_full))
    maps = rng.standard_normal((3, 16, 16)) + 1j * rng.standard_normal((3, 16, 16))
    maps /= rss_combine(maps)[None]

    def fn(img):
        k = fft2c(sense_expand(img, maps))
        rep = total_loss(
            k, k_full, img, ref, LossWeights(), EagleSpec(), grad_wrt="image", maps=maps
        )
        return rep.total, rep.grad

    x0 = rng.uniform(0.1, 1.0, (16, 16))
    rep = grad_check(fn, x0, epsilon=1e-5, tolerance=1e-3, samples=32, rng=0)
    assert rep.passed, rep.max_rel_error


def test_total_image_grad_requires_maps_for_multicoil(rng):
    k_pred, k_full, img, ref = _total_setup(rng)
    with pytest.raises(ValueError):
        total_loss(k_pred, k_full, img, ref, LossWeights(), EagleSpec(), grad_wrt="image")


def test_total_rejects_unknown_grad_target(rng):
    k_pred, k_full, img, ref = _total_setup(rng)
    with pytest.raises(ValueError):
        total_loss(k_pred, k_full, img, ref, grad_wrt="coil")


def test_loss_weights_validation():
    with pytest.raises(ValueError):
        LossWeights(alpha1=-0.1)
    with pytest.raises(ValueError):
        EagleSpec(patch=0)


# ---------------------------------------------------------------- grad_check


def test_grad_check_detects_broken_gradient(rng):
    k_full = rng.standard_normal((1, 8, 8)) + 1j * rng.standard_normal((1, 8, 8))

    def broken(k):
        value, grad = fidelity_loss(k, k_full, with_grad=True)
        return value, 1.05 * grad

    x0 = rng.standard_normal((1, 8, 8)) + 1j * rng.standard_normal((1, 8, 8))
    rep = grad_check(broken, x0, epsilon=1e-5, tolerance=1e-6)
    assert not rep.passed


def test_grad_check_validates_epsilon(rng):
    fn, x0, _, tol, _ = make_grad_probe("fidelity", 8, 0)
    with pytest.raises(ValueError):
        grad_check(fn, x0, epsilon=0.0, tolerance=tol)


def test_make_grad_probe_unknown_name():
    with pytest.raises(ValueError):
        make_grad_probe("entropy")
