import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from conftest import mirrored_texture
from mirrorsym.cli import (EXIT_IO, EXIT_NO_FEATURES, EXIT_VALIDATION, main)

FAST_SETS = ["--set", "scales=6", "--set", "orientations=16",
             "--set", "textural_bins=16", "--set", "cell_divisor=16"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def mirror_png(tmp_path):
    path = tmp_path / "mirror.png"
    Image.fromarray(mirrored_texture(seed=1, size=64, blur=1.0)).save(path)
    return path


def test_detect_writes_detections_and_heatmap(runner, tmp_path, mirror_png):
    out = tmp_path / "axes.txt"
    heat = tmp_path / "heat.png"
    result = runner.invoke(main, ["detect", str(mirror_png), "-o", str(out),
                                  "--heatmap", str(heat), *FAST_SETS])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines and all(line.startswith("mirror ") for line in lines)
    assert lines[0].split()[-1] == "1.0"
    heatmap = Image.open(heat)
    assert heatmap.size == (91, 360)


def test_detect_is_byte_deterministic(runner, tmp_path, mirror_png):
    outputs = []
    for run in range(2):
        out = tmp_path / f"axes{run}.txt"
        heat = tmp_path / f"heat{run}.png"
        result = runner.invoke(main, ["detect", str(mirror_png),
                                      "-o", str(out), "--heatmap", str(heat),
                                      *FAST_SETS, "--set", "deterministic=true"])
        assert result.exit_code == 0, result.output
        outputs.append((out.read_bytes(), heat.read_bytes()))
    assert outputs[0][0] == outputs[1][0]
    assert outputs[0][1] == outputs[1][1]


def test_detect_missing_image_exit_code(runner, tmp_path):
    result = runner.invoke(main, ["detect", str(tmp_path / "nope.png")])
    assert result.exit_code == EXIT_IO


def test_detect_black_image_exit_code(runner, tmp_path):
    path = tmp_path / "black.png"
    Image.fromarray(np.zeros((64, 64, 3), dtype=np.uint8)).save(path)
    result = runner.invoke(main, ["detect", str(path), *FAST_SETS])
    assert result.exit_code == EXIT_NO_FEATURES


def test_detect_invalid_config_exit_code(runner, mirror_png):
    result = runner.invoke(main, ["detect", str(mirror_png),
                                  "--set", "scales=0"])
    assert result.exit_code == EXIT_VALIDATION


def test_config_file_and_env(runner, tmp_path, mirror_png, monkeypatch):
    config = tmp_path / "fast.cfg"
    config.write_text("scales = 6\norientations = 16\n"
                      "textural_bins = 16\ncell_divisor = 16\n")
    monkeypatch.setenv("MIRRORSYM_CONFIG", str(config))
    out = tmp_path / "axes.txt"
    result = runner.invoke(main, ["detect", str(mirror_png), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert out.exists()


def test_batch_then_evaluate_generic(runner, tmp_path):
    img_dir = tmp_path / "imgs"
    img_dir.mkdir()
    for seed, name in ((1, "a"), (2, "b")):
        Image.fromarray(mirrored_texture(seed=seed, size=64, blur=1.0)).save(
            img_dir / f"{name}.png")
    det = tmp_path / "det.txt"
    sizes = tmp_path / "sizes.txt"
    result = runner.invoke(main, ["batch", str(img_dir), "-o", str(det),
                                  "--sizes-out", str(sizes), *FAST_SETS])
    assert result.exit_code == 0, result.output
    assert sizes.read_text() == "a 64 64\nb 64 64\n"

    gt = tmp_path / "gt.txt"
    gt.write_text("a 31.5 0 31.5 63\nb 31.5 0 31.5 63\n")
    report = tmp_path / "report.json"
    result = runner.invoke(main, ["evaluate", str(det), str(gt),
                                  "--regime", "ICCV2017",
                                  "--image-sizes", str(sizes),
                                  "-o", str(report)])
    assert result.exit_code == 0, result.output
    assert "maxF1" in result.output
    import json
    data = json.loads(report.read_text())
    assert data["regime"] == "ICCV2017"
    assert data["tp"] >= 1


def test_batch_skips_featureless_images(runner, tmp_path):
    img_dir = tmp_path / "imgs"
    img_dir.mkdir()
    Image.fromarray(mirrored_texture(seed=3, size=64, blur=1.0)).save(
        img_dir / "good.png")
    Image.fromarray(np.zeros((64, 64, 3), dtype=np.uint8)).save(
        img_dir / "bad.png")
    det = tmp_path / "det.txt"
    result = runner.invoke(main, ["batch", str(img_dir), "-o", str(det),
                                  *FAST_SETS])
    assert result.exit_code == 0, result.output
    assert "skip bad" in result.output or "skip bad" in (result.stderr or "")
    ids = {line.split()[0] for line in det.read_text().splitlines()}
    assert ids == {"good"}


def test_evaluate_id_mismatch_exit_code(runner, tmp_path):
    det = tmp_path / "det.txt"
    det.write_text("zzz 0 0 1 1 1.0\n")
    gt = tmp_path / "gt.txt"
    gt.write_text("a 0 0 1 1\n")
    result = runner.invoke(main, ["evaluate", str(det), str(gt)])
    assert result.exit_code == EXIT_VALIDATION


def test_evaluate_malformed_detections_exit_code(runner, tmp_path):
    det = tmp_path / "det.txt"
    det.write_text("a 0 0 1\n")
    gt = tmp_path / "gt.txt"
    gt.write_text("a 0 0 1 1\n")
    result = runner.invoke(main, ["evaluate", str(det), str(gt)])
    assert result.exit_code == EXIT_VALIDATION


def test_overlay_writes_png(runner, tmp_path, mirror_png):
    det = tmp_path / "det.txt"
    det.write_text("mirror 31.5 0.0 31.5 63.0 1.0\n")
    out = tmp_path / "overlay.png"
    result = runner.invoke(main, ["overlay", str(mirror_png), str(det),
                                  "-o", str(out)])
    assert result.exit_code == 0, result.output
    img = Image.open(out)
    assert img.size == (64, 64)


def test_heatmap_command(runner, tmp_path, mirror_png):
    out = tmp_path / "heat.png"
    result = runner.invoke(main, ["heatmap", str(mirror_png), "-o", str(out),
                                  *FAST_SETS])
    assert result.exit_code == 0, result.output
    assert Image.open(out).size == (91, 360)


def test_help_lists_all_verbs(runner):
    result = runner.invoke(main, ["--help"])
    for verb in ("detect", "evaluate", "overlay", "heatmap", "batch", "serve"):
        assert verb in result.output
