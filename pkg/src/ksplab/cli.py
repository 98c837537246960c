"""Command-line front end.

Subcommands: phantom | mask | recon | eval | loss | filter-viz |
gradcheck | experiment. Exit codes: 0 on success, 1 on usage/validation
errors, 2 on runtime or file-format errors. All randomness is controlled
by explicit ``--seed`` flags; ``KSPLAB_OUTPUT_DIR`` supplies a default
output directory for ``experiment``.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .calibration import estimate_sens_maps
from .experiment import ExperimentManifest, default_manifest, run_experiment
from .fileio import KspFormatError, read_ksp, write_ksp, write_pgm
from .filters import HighPassSpec, filtered_magnitude, highpass_filter, patch_variance, scharr_gradients
from .losses import (
    EagleSpec,
    LossWeights,
    eagle_loss,
    fidelity_loss,
    grad_check,
    make_grad_probe,
    perceptual_loss,
    random_extractor,
    reg_loss,
    ssim_loss,
    total_loss,
)
from .metrics import hf_nmse, nmse, psnr, ssim
from .phantom import PhantomSpec, make_phantom, simulate_kspace
from .recon import ReconConfig, ReconDivergenceError, gd_reconstruct, tune_step, zero_filled
from .sampling import apply_mask, make_random_mask, make_uniform_mask
from .transforms import ifft2c, rss_combine

OUTPUT_DIR_ENV = "KSPLAB_OUTPUT_DIR"


class _UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # do not sys.exit(2); map to exit code 1
        raise _UsageError(message, self)


def _filter_args(p: argparse.ArgumentParser):
    p.add_argument("--filter-kind", choices=["butterworth", "gaussian"], default="butterworth")
    p.add_argument("--cutoff", type=float, default=0.35, help="cutoff in cycles/sample (Nyquist 0.5)")
    p.add_argument("--order", type=int, default=4, help="Butterworth order")
    p.add_argument("--patch", type=int, default=5, help="variance patch size")


def _eagle_spec(args) -> EagleSpec:
    return EagleSpec(patch=args.patch, filter=HighPassSpec(args.filter_kind, args.cutoff, args.order))


def _weights(args) -> LossWeights:
    if args.weights is None:
        return LossWeights(beta=args.beta)
    parts = [float(v) for v in args.weights.split(",")]
    if len(parts) != 5:
        raise ValueError("--weights needs five comma-separated values a1,a2,a3,a4,a5")
    return LossWeights(*parts, beta=args.beta)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ksplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("phantom", help="generate a synthetic subject and write its k-space")
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--coils", type=int, default=10)
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=["static", "dynamic"], default="static")
    p.add_argument("--out", required=True, help="output container path")
    p.add_argument("--preview", help="optional PGM preview of frame 0")

    p = sub.add_parser("mask", help="build a sampling mask; optionally apply it to a container")
    p.add_argument("--r", type=int, required=True, help="acceleration factor")
    p.add_argument("--acs", type=int, default=16)
    p.add_argument("--kind", choices=["uniform", "random"], default="uniform")
    p.add_argument("--seed", type=int, default=0, help="seed for random masks")
    p.add_argument("--phase-axis", choices=["rows", "cols"], default="cols")
    p.add_argument("--offset", type=int, default=0, help="uniform grid offset")
    p.add_argument("--input", help="container to undersample")
    p.add_argument("--out", help="masked container path (with --input)")
    p.add_argument("--height", type=int, help="mask height (without --input)")
    p.add_argument("--width", type=int, help="mask width (without --input)")
    p.add_argument("--lines-out", help="write sampled line indices, one per line")

    p = sub.add_parser("recon", help="reconstruct a masked container")
    p.add_argument("--input", required=True, help="masked container (mask in header)")
    p.add_argument("--method", choices=["zero-filled", "gd"], default="zero-filled")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--tune-step", action="store_true", help="pick the step by probe runs")
    p.add_argument("--dc-every", type=int, default=1)
    p.add_argument("--oracle", action="store_true", help="enable ground-truth losses (needs phantom metadata)")
    p.add_argument("--weights", help="a1,a2,a3,a4,a5")
    p.add_argument("--beta", type=float, default=1.0)
    _filter_args(p)
    p.add_argument("--out", required=True, help="output image container")
    p.add_argument("--preview", help="optional PGM preview of frame 0")
    p.add_argument("--trace", help="optional per-iteration loss CSV")

    p = sub.add_parser("eval", help="score a reconstruction against a reference container")
    p.add_argument("--recon", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--group", default="default", help="group label for the CSV rows")
    _filter_args(p)
    p.add_argument("--out", help="CSV output (default stdout)")

    p = sub.add_parser("loss", help="evaluate one loss component on two containers")
    p.add_argument("--component", required=True,
                   choices=["fidelity", "ssim", "eagle", "vgg", "reg", "total"])
    p.add_argument("--pred", required=True, help="predicted k-space container")
    p.add_argument("--truth", required=True, help="reference k-space container")
    p.add_argument("--weights", help="a1,a2,a3,a4,a5 (total only)")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="seed of the reference feature extractor")
    p.add_argument("--unnormalized", action="store_true", help="raw sums instead of means")
    _filter_args(p)
    p.add_argument("--grad-wrt", choices=["kspace", "image"], default="kspace")
    p.add_argument("--grad-out", help="write the gradient as a container")
    p.add_argument("--out", help="CSV output (default stdout)")

    p = sub.add_parser("filter-viz", help="write high-pass filter weight / magnitude maps as PGM")
    p.add_argument("--kind", choices=["butterworth", "gaussian"], default="butterworth")
    p.add_argument("--cutoff", type=float, nargs="+", default=[0.35])
    p.add_argument("--order", type=int, nargs="+", default=[4])
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--patch", type=int, default=5)
    p.add_argument("--input", help="container whose RSS image feeds the magnitude map")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("gradcheck", help="finite-difference check of one loss gradient")
    p.add_argument("--loss", required=True, choices=["fidelity", "ssim", "eagle", "vgg", "reg"])
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, help="override the probe's FD step")
    p.add_argument("--tolerance", type=float, help="override the probe's tolerance")
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("experiment", help="run a grouped evaluation manifest")
    p.add_argument("--manifest", help="manifest JSON path")
    p.add_argument("--default", action="store_true", help="use the built-in 11-group manifest")
    p.add_argument("--seed", type=int, default=0, help="seed for --default")
    p.add_argument("--emit-manifest", help="write the manifest JSON and exit")
    p.add_argument("--out-dir", help=f"output directory (or ${OUTPUT_DIR_ENV})")

    return parser


def _container_images(container) -> np.ndarray:
    """Frames of real images from an image- or k-space-domain container."""
    data = container.data
    domain = (container.meta or {}).get("domain", "kspace")
    if domain == "image":
        imgs = np.abs(data.astype(np.complex128))
        return imgs if imgs.ndim == 3 else imgs[None]
    ksp = data.astype(np.complex128)
    if ksp.ndim == 3:
        ksp = ksp[None]
    if ksp.ndim != 4:
        raise ValueError(f"cannot interpret container shape {data.shape} as k-space")
    return np.stack([rss_combine(ifft2c(frame)) for frame in ksp])


def _phantom_truth(container) -> np.ndarray | None:
    meta = container.meta or {}
    if "phantom" not in meta:
        return None
    images, _ = make_phantom(PhantomSpec(**meta["phantom"]))
    return images


def _cmd_phantom(args) -> int:
    spec = PhantomSpec(args.height, args.width, args.coils, args.seed, args.kind, args.frames)
    images, maps = make_phantom(spec)
    ksp = np.stack([simulate_kspace(img, maps) for img in images])
    if spec.frames == 1:
        ksp = ksp[0]
    write_ksp(args.out, ksp, meta={"domain": "kspace", "phantom": asdict(spec)})
    if args.preview:
        write_pgm(images[0], args.preview, normalization="fixed", vrange=(0.0, 1.0))
    print(f"wrote {args.out} shape={list(ksp.shape)}")
    return 0


def _make_mask(args, height: int, width: int):
    if args.kind == "uniform":
        return make_uniform_mask(height, width, args.r, args.acs, args.phase_axis, args.offset)
    return make_random_mask(height, width, args.r, args.acs, args.seed, args.phase_axis)


def _cmd_mask(args) -> int:
    if args.input:
        container = read_ksp(args.input)
        if args.out is None:
            raise ValueError("--out is required with --input")
        h, w = container.data.shape[-2:]
        mask = _make_mask(args, h, w)
        masked = apply_mask(container.data.astype(np.complex128), mask)
        meta = dict(container.meta or {})
        meta["undersampled"] = True
        write_ksp(args.out, masked, mask=mask, meta=meta)
        print(f"wrote {args.out}: {mask.num_sampled}/{mask.axis_len} lines sampled")
    else:
        if args.height is None or args.width is None:
            raise ValueError("--height and --width are required without --input")
        mask = _make_mask(args, args.height, args.width)
        if args.lines_out is None:
            raise ValueError("nothing to do: give --lines-out and/or --input")
    if args.lines_out:
        with open(args.lines_out, "w", encoding="ascii") as f:
            for idx in mask.sampled_indices():
                f.write(f"{idx}\n")
        print(f"wrote {args.lines_out}")
    return 0


def _cmd_recon(args) -> int:
    container = read_ksp(args.input)
    if container.mask is None:
        raise ValueError("input container carries no sampling mask; run 'ksplab mask' first")
    mask = container.mask
    ksp = container.data.astype(np.complex128)
    if ksp.ndim == 3:
        ksp = ksp[None]

    truth_frames = _phantom_truth(container) if args.oracle else None
    if args.oracle and truth_frames is None:
        raise ValueError("--oracle needs phantom metadata in the container header")

    cfg = ReconConfig(
        method=args.method.replace("-", "_"),
        iterations=args.iterations,
        step=args.step,
        weights=_weights(args),
        eagle=_eagle_spec(args),
        use_ground_truth_losses=args.oracle,
        dc_every=args.dc_every,
    )

    outputs = []
    traces = []
    for t, frame in enumerate(ksp):
        maps = estimate_sens_maps(frame, mask)
        if cfg.method == "zero_filled":
            outputs.append(zero_filled(frame))
            traces.append([])
            continue
        gt = truth_frames[t] if truth_frames is not None else None
        step = cfg.step
        if args.tune_step:
            step = tune_step(frame, mask, maps, cfg, gt)
            print(f"frame {t}: tuned step = {step:g}")
        img, trace = gd_reconstruct(frame, mask, maps, replace(cfg, step=step), gt)
        outputs.append(img)
        traces.append(trace)

    recon = np.stack(outputs)
    out_data = recon.astype(np.complex128)
    if container.data.ndim == 3:
        out_data = out_data[0]
    meta = dict(container.meta or {})
    meta["domain"] = "image"
    meta["recon_method"] = cfg.method
    write_ksp(args.out, out_data, mask=mask, meta=meta)
    if args.preview:
        write_pgm(recon[0], args.preview, normalization="minmax")
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["frame", "iteration", "fidelity", "ssim", "eagle", "vgg", "reg", "total"])
            for t, trace in enumerate(traces):
                for i, rep in enumerate(trace):
                    writer.writerow([t, i, repr(rep.fidelity), repr(rep.ssim), repr(rep.eagle),
                                     "" if rep.vgg is None else repr(rep.vgg),
                                     repr(rep.reg), repr(rep.total)])
    print(f"wrote {args.out}")
    return 0


def _cmd_eval(args) -> int:
    recon_c = read_ksp(args.recon)
    truth_c = read_ksp(args.truth)
    recon_frames = _container_images(recon_c)
    truth_frames = _phantom_truth(truth_c)
    if truth_frames is None:
        truth_frames = _container_images(truth_c)
    if recon_frames.shape != truth_frames.shape:
        raise ValueError(
            f"reconstruction {recon_frames.shape} and reference {truth_frames.shape} disagree"
        )
    spec = HighPassSpec(args.filter_kind, args.cutoff, args.order)

    rows = []
    for t in range(truth_frames.shape[0]):
        rows.append(
            [
                args.group,
                t,
                ssim(recon_frames[t], truth_frames[t]),
                psnr(recon_frames[t], truth_frames[t]),
                nmse(recon_frames[t], truth_frames[t]),
                hf_nmse(recon_frames[t], truth_frames[t], spec),
            ]
        )
    agg = [args.group, "mean"] + [sum(r[i] for r in rows) / len(rows) for i in range(2, 6)]

    target = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["group", "slice", "ssim", "psnr", "nmse", "hf_nmse"])
        for row in rows + [agg]:
            writer.writerow([row[0], row[1]] + [repr(float(v)) for v in row[2:]])
    finally:
        if args.out:
            target.close()
    return 0


def _cmd_loss(args) -> int:
    pred_c = read_ksp(args.pred)
    truth_c = read_ksp(args.truth)
    k_pred = pred_c.data.astype(np.complex128)
    k_full = truth_c.data.astype(np.complex128)
    if k_pred.ndim == 4:
        k_pred = k_pred[0]
    if k_full.ndim == 4:
        k_full = k_full[0]
    if k_pred.ndim == 2:
        k_pred = k_pred[None]
    if k_full.ndim == 2:
        k_full = k_full[None]
    img = rss_combine(ifft2c(k_pred))
    ref = rss_combine(ifft2c(k_full))
    normalized = not args.unnormalized
    spec = _eagle_spec(args)
    want = args.grad_out is not None

    grad = None
    if args.component == "fidelity":
        out = fidelity_loss(k_pred, k_full, with_grad=want, normalized=normalized)
    elif args.component == "ssim":
        out = ssim_loss(img, ref, with_grad=want)
    elif args.component == "eagle":
        out = eagle_loss(img, ref, spec, with_grad=want, normalized=normalized)
    elif args.component == "vgg":
        out = perceptual_loss(img, ref, random_extractor(args.seed), with_grad=want,
                              normalized=normalized)
    elif args.component == "reg":
        out = reg_loss(k_pred, args.beta, with_grad=want, normalized=normalized)
    else:
        report = total_loss(
            k_pred, k_full, img, ref, _weights(args), spec,
            extractor=random_extractor(args.seed),
            grad_wrt=args.grad_wrt if want else None,
            normalized=normalized,
        )
        out = (report.total, report.grad) if want else report.total
    if want:
        value, grad = out
    else:
        value = out

    line = f"{args.component},{value!r}"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("component,value\n")
            f.write(line + "\n")
    else:
        print(line)
    if grad is not None:
        write_ksp(args.grad_out, np.asarray(grad, dtype=np.complex128),
                  meta={"domain": "gradient", "component": args.component})
    return 0


def _cmd_filter_viz(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image = None
    if args.input:
        image = _container_images(read_ksp(args.input))[0]
    for cutoff in args.cutoff:
        for order in args.order:
            spec = HighPassSpec(args.kind, cutoff, order)
            weights = highpass_filter(args.size, args.size, spec)
            name = f"filter_{args.kind}_c{cutoff:g}_o{order}"
            write_pgm(weights, out_dir / f"{name}.pgm", normalization="fixed", vrange=(0.0, 1.0))
            if image is not None:
                gx, _ = scharr_gradients(image)
                mag = filtered_magnitude(patch_variance(gx, args.patch), spec)
                write_pgm(mag, out_dir / f"{name}_magnitude.pgm", normalization="minmax")
    print(f"wrote filter maps to {out_dir}")
    return 0


def _cmd_gradcheck(args) -> int:
    fn, x0, eps, tol, exclude = make_grad_probe(args.loss, args.size, args.seed)
    eps = args.epsilon if args.epsilon is not None else eps
    tol = args.tolerance if args.tolerance is not None else tol
    report = grad_check(fn, x0, epsilon=eps, tolerance=tol, samples=args.samples,
                        rng=args.seed, exclude=exclude)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"loss={args.loss} size={args.size} seed={args.seed} coords={report.checked} "
        f"max_rel_err={report.max_rel_error:.3e} tolerance={tol:g} {status}"
    )
    return 0 if report.passed else 1


def _cmd_experiment(args) -> int:
    if args.manifest and args.default:
        raise ValueError("give either --manifest or --default, not both")
    if args.manifest:
        manifest = ExperimentManifest.from_json(args.manifest)
    elif args.default:
        manifest = default_manifest(args.seed)
    else:
        raise ValueError("one of --manifest or --default is required")

    if args.emit_manifest:
        manifest.to_json(args.emit_manifest)
        print(f"wrote {args.emit_manifest}")
        return 0

    out_dir = args.out_dir or manifest.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    if out_dir is None:
        raise ValueError(f"no output directory: give --out-dir or set {OUTPUT_DIR_ENV}")
    result = run_experiment(manifest, out_dir)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows, {len(result.errors)} errors)")
    for err in result.errors:
        print(f"  group {err['group']} failed: {err['error']}", file=sys.stderr)
    return 0


_HANDLERS = {
    "phantom": _cmd_phantom,
    "mask": _cmd_mask,
    "recon": _cmd_recon,
    "eval": _cmd_eval,
    "loss": _cmd_loss,
    "filter-viz": _cmd_filter_viz,
    "gradcheck": _cmd_gradcheck,
    "experiment": _cmd_experiment,
}


def cli_dispatch(argv) -> int:
    """Parse and run one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        e.parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)

    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _HANDLERS[args.command](args)
    except _UsageError as e:
        e.parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (KspFormatError, ReconDivergenceError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
