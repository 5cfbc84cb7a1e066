import json

import numpy as np
import pytest
from PIL import Image

from paletteforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- argument handling ---------------------------------------------------------

def test_unknown_subcommand_exits_1(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1


def test_no_arguments_exits_1(capsys):
    assert main([]) == 1


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0


def test_subcommand_missing_required_flag_exits_1(capsys):
    assert main(["ingest"]) == 1


# --- fixtures + ingest -----------------------------------------------------------

def test_fixtures_and_ingest_round_trip(tmp_path, capsys):
    data = tmp_path / "toy.ndjson"
    code, out, _ = run(capsys, "fixtures", "--out", str(data), "--count", "10", "--seed", "3")
    assert code == 0
    assert data.exists()

    code, out, _ = run(capsys, "ingest", "--data", str(data))
    assert code == 0
    assert "10 records" in out


def test_fixtures_images_out(tmp_path, capsys):
    data = tmp_path / "toy.ndjson"
    images = tmp_path / "imgs"
    code, _, _ = run(
        capsys, "fixtures", "--out", str(data), "--count", "4",
        "--images-out", str(images), "--image-count", "3",
    )
    assert code == 0
    pngs = sorted(images.glob("*.png"))
    assert len(pngs) == 3
    assert Image.open(pngs[0]).size == (64, 64)


def test_ingest_invalid_file_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.ndjson"
    bad.write_text('{"text": "x", "palette": [[50, 0, 0]]}\n')
    code, _, err = run(capsys, "ingest", "--data", str(bad))
    assert code == 1
    assert "line 1" in err


def test_ingest_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "ingest", "--data", str(tmp_path / "absent.ndjson"))
    assert code == 2


# --- sample ----------------------------------------------------------------------

def test_sample_deterministic_json(toy_checkpoints, tmp_path, capsys):
    argv = [
        "sample", "--text", "autumn breeze", "--n", "3", "--seed", "7",
        "--checkpoint", str(toy_checkpoints.tpn),
    ]
    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()

    payload = json.loads(out_a.read_text())
    assert len(payload["palettes"]) == 3
    assert payload["seed"] == 7
    assert payload["tokens"] == ["autumn", "breeze"]
    for palette in payload["palettes"]:
        assert len(palette["lab"]) == 5
        assert len(palette["hex"]) == 5
    attention = np.array(payload["attention"])
    assert attention.shape == (3, 5, 2)


def test_sample_stdout(toy_checkpoints, capsys):
    code, out, _ = run(
        capsys, "sample", "--text", "plum dusk", "--n", "1", "--seed", "1",
        "--checkpoint", str(toy_checkpoints.tpn),
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["all_tokens_unknown"] in (False, True)


def test_sample_env_checkpoint(toy_checkpoints, capsys, monkeypatch):
    monkeypatch.setenv("PF_TPN_CKPT", str(toy_checkpoints.tpn))
    code, out, _ = run(capsys, "sample", "--text", "ember", "--n", "1", "--seed", "2")
    assert code == 0


def test_sample_without_checkpoint_exits_1(capsys, monkeypatch):
    monkeypatch.delenv("PF_TPN_CKPT", raising=False)
    code, _, err = run(capsys, "sample", "--text", "ember", "--n", "1")
    assert code == 1
    assert "PF_TPN_CKPT" in err


def test_sample_empty_text_exits_1(toy_checkpoints, capsys):
    code, _, err = run(
        capsys, "sample", "--text", "?!", "--checkpoint", str(toy_checkpoints.tpn)
    )
    assert code == 1


# --- colorize ---------------------------------------------------------------------

@pytest.fixture()
def gray_image(tmp_path):
    arr = np.linspace(0, 255, 48 * 48 * 3).reshape(48, 48, 3).astype(np.uint8)
    path = tmp_path / "gray.png"
    Image.fromarray(arr, "RGB").save(path)
    return path


def palette_file(tmp_path, colors):
    path = tmp_path / "palette.json"
    path.write_text(json.dumps({"colors": colors}))
    return path


def test_colorize_valid_flow(toy_checkpoints, tmp_path, gray_image, capsys):
    palette = palette_file(tmp_path, [[50.0, 20.0, -30.0]] * 5)
    out = tmp_path / "out.png"
    code, _, _ = run(
        capsys, "colorize", "--image", str(gray_image), "--palette", str(palette),
        "--out", str(out), "--checkpoint", str(toy_checkpoints.pcn),
    )
    assert code == 0
    assert Image.open(out).size == (48, 48)


def test_colorize_four_color_palette_exits_1(toy_checkpoints, tmp_path, gray_image, capsys):
    palette = palette_file(tmp_path, [[50.0, 0.0, 0.0]] * 4)
    code, _, err = run(
        capsys, "colorize", "--image", str(gray_image), "--palette", str(palette),
        "--out", str(tmp_path / "out.png"), "--checkpoint", str(toy_checkpoints.pcn),
    )
    assert code == 1
    assert "palette" in err.lower() or "5" in err


def test_colorize_missing_image_exits_1(toy_checkpoints, tmp_path, capsys):
    palette = palette_file(tmp_path, [[50.0, 0.0, 0.0]] * 5)
    code, _, _ = run(
        capsys, "colorize", "--image", str(tmp_path / "absent.png"),
        "--palette", str(palette), "--out", str(tmp_path / "out.png"),
        "--checkpoint", str(toy_checkpoints.pcn),
    )
    assert code == 1


# --- evaluate ---------------------------------------------------------------------

def test_evaluate_emits_report(toy_checkpoints, capsys):
    code, out, _ = run(
        capsys, "evaluate", "--data", str(toy_checkpoints.data),
        "--checkpoint", str(toy_checkpoints.tpn),
        "--samples-per-text", "3", "--limit", "4", "--seed", "5",
    )
    assert code == 0
    report = json.loads(out)
    for key in (
        "texts", "samples_per_text", "diversity_mean", "diversity_std",
        "multimodality_mean", "multimodality_std", "bin_kl",
    ):
        assert key in report
    assert report["texts"] == 4
    assert report["samples_per_text"] == 3


# --- training ---------------------------------------------------------------------

def test_train_tpn_via_cli(tmp_path, capsys):
    data = tmp_path / "train.ndjson"
    assert main(["fixtures", "--out", str(data), "--count", "6", "--seed", "1"]) == 0
    out_dir = tmp_path / "run"
    code, out, _ = run(
        capsys, "train-tpn", "--data", str(data), "--out", str(out_dir),
        "--epochs", "1", "--batch-size", "3", "--seed", "0",
        "--embed-dim", "8", "--enc-hidden", "8", "--cond-dim", "8", "--dec-hidden", "8",
    )
    assert code == 0
    assert (out_dir / "tpn.pt").exists()
    assert (out_dir / "tpn-history.csv").exists()


def test_train_pcn_via_cli(tmp_path, capsys):
    images = tmp_path / "imgs"
    assert main([
        "fixtures", "--out", str(tmp_path / "d.ndjson"), "--count", "2",
        "--images-out", str(images), "--image-count", "2",
    ]) == 0
    out_dir = tmp_path / "run"
    code, _, _ = run(
        capsys, "train-pcn", "--images", str(images), "--out", str(out_dir),
        "--epochs", "1", "--batch-size", "2", "--base-width", "4", "--image-size", "16",
    )
    assert code == 0
    assert (out_dir / "pcn.pt").exists()
