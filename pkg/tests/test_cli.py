import csv
import json

import numpy as np
from ksplab import read_ksp
from ksplab.cli import cli_dispatch

from test_fileio import read_pgm


def run(*args):
    return cli_dispatch([str(a) for a in args])


def test_no_arguments_prints_usage(capsys):
    assert run() == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert run("bogus") == 1
    assert "invalid choice" in capsys.readouterr().err


def test_help_exits_zero():
    assert run("--help") == 0
    assert run("recon", "--help") == 0


def test_missing_required_flag(capsys):
    assert run("mask") == 1  # --r is required


def test_missing_file_is_runtime_error(tmp_path, capsys):
    assert run("recon", "--input", tmp_path / "nope.ksp", "--out", tmp_path / "o.ksp") == 2


def test_corrupt_container_is_format_error(tmp_path):
    bad = tmp_path / "bad.ksp"
    bad.write_bytes(b"garbage here")
    assert run("loss", "--component", "fidelity", "--pred", bad, "--truth", bad) == 2


def test_full_pipeline(tmp_path, capsys):
    full = tmp_path / "full.ksp"
    masked = tmp_path / "masked.ksp"
    recon = tmp_path / "zf.ksp"
    assert run("phantom", "--height", 48, "--width", 48, "--coils", 6, "--seed", 3,
               "--out", full, "--preview", tmp_path / "gt.pgm") == 0
    assert run("mask", "--input", full, "--r", 8, "--out", masked,
               "--lines-out", tmp_path / "lines.txt") == 0
    assert run("recon", "--input", masked, "--method", "zero-filled", "--out", recon,
               "--preview", tmp_path / "zf.pgm") == 0
    assert run("eval", "--recon", recon, "--truth", full, "--out", tmp_path / "eval.csv",
               "--group", "demo") == 0

    lines = (tmp_path / "lines.txt").read_text().split()
    mask = read_ksp(masked).mask
    assert [int(v) for v in lines] == mask.sampled_indices().tolist()

    with open(tmp_path / "eval.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["group", "slice", "ssim", "psnr", "nmse", "hf_nmse"]
    assert rows[1][0] == "demo"
    assert 0.0 < float(rows[1][2]) < 1.0  # undersampled ssim
    assert rows[-1][1] == "mean"


def test_mask_without_input_needs_dims(tmp_path, capsys):
    assert run("mask", "--r", 4) == 1
    assert run("mask", "--r", 4, "--height", 32, "--width", 32) == 1  # nothing to write
    assert run("mask", "--r", 4, "--height", 32, "--width", 32,
               "--lines-out", tmp_path / "l.txt") == 0
    vals = [int(v) for v in (tmp_path / "l.txt").read_text().split()]
    assert vals == sorted(set(range(0, 32, 4)) | set(range(8, 24)))


def test_recon_requires_mask_in_container(tmp_path, capsys):
    full = tmp_path / "full.ksp"
    assert run("phantom", "--height", 32, "--width", 32, "--coils", 2,
               "--out", full) == 0
    assert run("recon", "--input", full, "--out", tmp_path / "r.ksp") == 1
    assert "no sampling mask" in capsys.readouterr().err


def test_gd_recon_with_oracle_and_trace(tmp_path):
    full = tmp_path / "full.ksp"
    masked = tmp_path / "m.ksp"
    assert run("phantom", "--height", 48, "--width", 48, "--coils", 6, "--seed", 1,
               "--out", full) == 0
    assert run("mask", "--input", full, "--r", 8, "--out", masked) == 0
    assert run("recon", "--input", masked, "--method", "gd", "--iterations", 5,
               "--step", "0.2", "--oracle", "--out", tmp_path / "gd.ksp",
               "--trace", tmp_path / "trace.csv") == 0
    with open(tmp_path / "trace.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 6  # init + 5 iterations
    assert float(rows[0]["total"]) > 0


def test_loss_component_and_gradient_dump(tmp_path, capsys):
    full = tmp_path / "full.ksp"
    masked = tmp_path / "m.ksp"
    run("phantom", "--height", 32, "--width", 32, "--coils", 3, "--seed", 2, "--out", full)
    run("mask", "--input", full, "--r", 8, "--out", masked)
    assert run("loss", "--component", "eagle", "--pred", masked, "--truth", full) == 0
    out = capsys.readouterr().out
    component, value = out.strip().splitlines()[-1].split(",")
    assert component == "eagle"
    assert float(value) > 0

    assert run("loss", "--component", "total", "--pred", masked, "--truth", full,
               "--grad-out", tmp_path / "g.ksp", "--out", tmp_path / "loss.csv") == 0
    grad = read_ksp(tmp_path / "g.ksp")
    assert grad.data.shape == (3, 32, 32)
    assert (tmp_path / "loss.csv").read_text().startswith("component,value")


def test_loss_identical_inputs_zero(tmp_path, capsys):
    full = tmp_path / "full.ksp"
    run("phantom", "--height", 32, "--width", 32, "--coils", 2, "--seed", 0, "--out", full)
    assert run("loss", "--component", "fidelity", "--pred", full, "--truth", full) == 0
    assert capsys.readouterr().out.strip().endswith("fidelity,0.0")


def test_filter_viz_center_is_zero(tmp_path, capsys):
    out = tmp_path / "viz"
    assert run("filter-viz", "--kind", "butterworth", "--cutoff", "0.35",
               "--order", 4, "--size", 64, "--out-dir", out) == 0
    img = read_pgm(out / "filter_butterworth_c0.35_o4.pgm")
    assert img.shape == (64, 64)
    assert img[32, 32] == 0
    assert img.max() > 60000  # far field passes


def test_filter_viz_sweep_and_magnitude(tmp_path):
    full = tmp_path / "full.ksp"
    run("phantom", "--height", 40, "--width", 40, "--coils", 2, "--seed", 0, "--out", full)
    out = tmp_path / "sweep"
    assert run("filter-viz", "--kind", "butterworth", "--cutoff", "0.2", "0.35",
               "--order", 1, 4, "--size", 32, "--input", full, "--patch", 5,
               "--out-dir", out) == 0
    files = sorted(p.name for p in out.glob("*.pgm"))
    assert len(files) == 8  # 2 cutoffs x 2 orders x (filter + magnitude)


def test_gradcheck_cli(capsys):
    assert run("gradcheck", "--loss", "eagle", "--size", 20, "--seed", 3) == 0
    out = capsys.readouterr().out
    assert "max_rel_err" in out and "PASS" in out


def test_gradcheck_reports_failure_exit_code(capsys, monkeypatch):
    # an absurdly tight tolerance forces a FAIL exit
    assert run("gradcheck", "--loss", "eagle", "--size", 20, "--seed", 3,
               "--tolerance", "1e-18") == 1


def test_experiment_cli_default_and_manifest(tmp_path, capsys, monkeypatch):
    man_path = tmp_path / "m.json"
    assert run("experiment", "--default", "--seed", 2, "--emit-manifest", man_path) == 0
    manifest = json.loads(man_path.read_text())
    assert len(manifest["groups"]) == 11

    # shrink to two groups for a fast run
    manifest["groups"] = manifest["groups"][:2]
    man_path.write_text(json.dumps(manifest))
    assert run("experiment", "--manifest", man_path, "--out-dir", tmp_path / "out") == 0
    assert (tmp_path / "out" / "report.csv").exists()

    # output dir can come from the environment
    monkeypatch.setenv("KSPLAB_OUTPUT_DIR", str(tmp_path / "env_out"))
    assert run("experiment", "--manifest", man_path) == 0
    assert (tmp_path / "env_out" / "report.csv").exists()

    monkeypatch.delenv("KSPLAB_OUTPUT_DIR")
    assert run("experiment", "--manifest", man_path) == 1  # nowhere to write


def test_experiment_cli_requires_source(capsys):
    assert run("experiment") == 1
    assert run("experiment", "--default", "--manifest", "x.json") == 1
