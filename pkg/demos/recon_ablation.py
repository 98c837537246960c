"""Reconstruction study: blind descent, then the edge-loss ablation.

Part 1 reconstructs 8x-undersampled k-space blindly (fidelity to the
measured lines plus the k-space regularizer) and compares against the
zero-filled baseline.

Part 2 repeats the optimization with ground-truth-anchored losses and
toggles the edge-loss weight between 0 and 0.05, holding everything else
fixed. The high-frequency error (hf_nmse) drops when the term is active,
which is the desk-scale analog of the published ablation: on the real
challenge data the same toggle moved overall 8x SSIM 0.8771 -> 0.8791 and
PSNR 31.84 -> 31.99 (reference points only; not reproducible without that
dataset and a trained network).
"""

from dataclasses import replace

from ksplab import (
    LossWeights,
    PhantomSpec,
    ReconConfig,
    apply_mask,
    estimate_sens_maps,
    gd_reconstruct,
    hf_nmse,
    make_phantom,
    make_uniform_mask,
    nmse,
    simulate_kspace,
    ssim,
    tune_step,
    zero_filled,
)

images, maps_gt = make_phantom(PhantomSpec(64, 64, coils=10, seed=1))
gt = images[0]
mask = make_uniform_mask(64, 64, 8, acs=16)
masked = apply_mask(simulate_kspace(gt, maps_gt), mask)
maps = estimate_sens_maps(masked, mask)

zf = zero_filled(masked)
print("--- part 1: blind reconstruction at 8x ---")
print(f"zero-filled   : ssim {ssim(zf, gt):.4f}  nmse {nmse(zf, gt):.5f}")

cfg = ReconConfig(method="gd", iterations=200, step=0.25, dc_every=1)
step = tune_step(masked, mask, maps, cfg)
recon, trace = gd_reconstruct(masked, mask, maps, replace(cfg, step=step))
print(f"blind descent : ssim {ssim(recon, gt):.4f}  nmse {nmse(recon, gt):.5f}  "
      f"(step {step:g}, {cfg.iterations} iterations)")

print("\n--- part 2: ground-truth objective, edge term on vs off ---")
base = ReconConfig(method="gd", iterations=100, step=0.5,
                   weights=LossWeights(alpha3=0.0),
                   use_ground_truth_losses=True, dc_every=1)
step = tune_step(masked, mask, maps, base, gt)
off, _ = gd_reconstruct(masked, mask, maps, replace(base, step=step), gt)
on, _ = gd_reconstruct(masked, mask, maps,
                       replace(base, step=step, weights=LossWeights(alpha3=0.05)), gt)

print(f"{'weights':>14} {'ssim':>8} {'nmse':>9} {'hf_nmse':>9}")
print(f"{'edge off':>14} {ssim(off, gt):8.4f} {nmse(off, gt):9.5f} {hf_nmse(off, gt):9.5f}")
print(f"{'edge 0.05':>14} {ssim(on, gt):8.4f} {nmse(on, gt):9.5f} {hf_nmse(on, gt):9.5f}")
delta = hf_nmse(off, gt) - hf_nmse(on, gt)
print(f"\nhigh-frequency error reduced by {delta:.5f} with the edge term enabled")
