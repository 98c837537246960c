import numpy as np
import pytest

from ksplab import (
    PhantomSpec,
    apply_mask,
    ifft2c,
    make_phantom,
    make_uniform_mask,
    nmse,
    rss_combine,
    simulate_kspace,
    ssim,
    zero_filled,
)


def test_deterministic_bit_identical():
    spec = PhantomSpec(32, 32, coils=4, seed=9, kind="dynamic", frames=3)
    img_a, maps_a = make_phantom(spec)
    img_b, maps_b = make_phantom(spec)
    assert np.array_equal(img_a, img_b)
    assert np.array_equal(maps_a, maps_b)


def test_images_in_unit_range():
    images, _ = make_phantom(PhantomSpec(48, 40, coils=3, seed=2))
    assert images.min() >= 0.0
    assert images.max() <= 1.0
    assert images.max() == pytest.approx(1.0)


def test_single_coil_map_is_unit_magnitude():
    _, maps = make_phantom(PhantomSpec(24, 24, coils=1, seed=0))
    assert np.allclose(np.abs(maps[0]), 1.0, atol=1e-12)


def test_maps_unit_rss_everywhere():
    _, maps = make_phantom(PhantomSpec(32, 32, coils=10, seed=5))
    rss2 = np.sum(np.abs(maps) ** 2, axis=0)
    assert np.abs(rss2 - 1.0).max() < 1e-12


def test_dynamic_frames_differ_slightly():
    images, _ = make_phantom(PhantomSpec(64, 64, coils=2, seed=1, kind="dynamic", frames=2))
    diff = np.abs(images[1] - images[0]).mean()
    assert diff > 0.0
    assert diff < 0.1 * images.mean()


def test_static_frames_identical():
    images, _ = make_phantom(PhantomSpec(32, 32, coils=2, seed=1, kind="static", frames=2))
    assert np.array_equal(images[0], images[1])


def test_spec_validation():
    with pytest.raises(ValueError):
        PhantomSpec(0, 32)
    with pytest.raises(ValueError):
        PhantomSpec(32, 32, coils=0)
    with pytest.raises(ValueError):
        PhantomSpec(32, 32, frames=0)
    with pytest.raises(ValueError):
        PhantomSpec(32, 32, kind="cartoon")


def test_simulate_zero_image():
    _, maps = make_phantom(PhantomSpec(16, 16, coils=3, seed=0))
    assert not simulate_kspace(np.zeros((16, 16)), maps).any()


def test_simulate_round_trip_recovers_magnitude():
    images, maps = make_phantom(PhantomSpec(32, 32, coils=6, seed=3))
    k = simulate_kspace(images[0], maps)
    rec = rss_combine(ifft2c(k))
    assert np.abs(rec - np.abs(images[0])).max() < 1e-8


def test_simulate_parseval():
    images, maps = make_phantom(PhantomSpec(32, 32, coils=4, seed=4))
    coil_imgs = maps * images[0][None]
    k = simulate_kspace(images[0], maps)
    assert np.sum(np.abs(k) ** 2) == pytest.approx(np.sum(np.abs(coil_imgs) ** 2), rel=1e-12)


def test_full_sampling_pipeline_identity():
    images, maps = make_phantom(PhantomSpec(64, 64, coils=10, seed=1))
    gt = images[0]
    mask = make_uniform_mask(64, 64, 1, 16)
    recon = zero_filled(apply_mask(simulate_kspace(gt, maps), mask))
    assert ssim(recon, gt) >= 0.999
    assert nmse(recon, gt) <= 1e-6
