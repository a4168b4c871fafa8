"""CLI commands end to end in a temp directory."""

import json

import numpy as np
import pytest
from PIL import Image

from mazelens.cli import main


@pytest.fixture()
def weights_file(tmp_path):
    out = tmp_path / "w.impw"
    assert main(["make-weights", "--seed", "0", "--out", str(out)]) == 0
    return out


@pytest.fixture()
def maze_file(tmp_path):
    out = tmp_path / "m.maze"
    assert main(["gen-maze", "--seed", "42", "--size", "15", "--out", str(out)]) == 0
    return out


def test_gen_maze_reproducible(tmp_path):
    a, b = tmp_path / "a.maze", tmp_path / "b.maze"
    assert main(["gen-maze", "--seed", "42", "--size", "15", "--out", str(a)]) == 0
    assert main(["gen-maze", "--seed", "42", "--size", "15", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_make_weights_reproducible(tmp_path):
    a, b = tmp_path / "a.impw", tmp_path / "b.impw"
    assert main(["make-weights", "--seed", "5", "--out", str(a)]) == 0
    assert main(["make-weights", "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_render_png(tmp_path, maze_file):
    out = tmp_path / "maze.png"
    assert main(["render", "--maze", str(maze_file), "--out", str(out), "--scale", "8"]) == 0
    img = Image.open(out)
    assert img.size == (512, 512)


def test_forward_summary(tmp_path, weights_file, maze_file):
    out = tmp_path / "trace.json"
    rc = main([
        "forward", "--weights", str(weights_file), "--maze", str(maze_file),
        "--capture", "block2.res1.resadd", "--out", str(out),
    ])
    assert rc == 0
    data = json.loads(out.read_text())
    assert len(data["logits"]) == 15
    assert abs(sum(data["actions"].values()) - 1.0) < 1e-6
    assert data["captured"]["block2.res1.resadd"] == [128, 16, 16]


def test_feature_maps_emits_one_png_per_channel(tmp_path, weights_file, maze_file):
    out_dir = tmp_path / "maps"
    rc = main([
        "feature-maps", "--weights", str(weights_file), "--maze", str(maze_file),
        "--layer", "block1.conv", "--out-dir", str(out_dir),
    ])
    assert rc == 0
    files = sorted(out_dir.glob("*.png"))
    assert len(files) == 64
    img = Image.open(files[0])
    assert img.size == (64, 64)


def test_saliency_overlay(tmp_path, weights_file, maze_file):
    out = tmp_path / "sal.png"
    rc = main([
        "saliency", "--weights", str(weights_file), "--maze", str(maze_file),
        "--target", "group:UP", "--out", str(out),
    ])
    assert rc == 0
    img = Image.open(out)
    assert img.size == (64, 64)


def test_cluster_writes_classification_json(tmp_path, weights_file, maze_file):
    out = tmp_path / "cls.json"
    rc = main([
        "cluster", "--weights", str(weights_file), "--maze", str(maze_file),
        "--layer", "block2.res1.resadd", "--method", "kmeans", "--k", "6",
        "--seed", "3", "--out", str(out),
    ])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["shape"] == [16, 16, 128]
    assert len(doc["classes"]) == 6


def test_identical_invocations_identical_outputs(tmp_path, weights_file, maze_file):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    for out in (a, b):
        assert main([
            "saliency", "--weights", str(weights_file), "--maze", str(maze_file),
            "--target", "logit:3", "--out", str(out),
        ]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_error_exits_1(capsys):
    for argv in (["gen-maze", "--size"], ["gen-maze", "--nope", "1", "--out", "x"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 1
    assert "error" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    rc = main(["render", "--maze", str(tmp_path / "absent.maze"), "--out", str(tmp_path / "o.png")])
    assert rc == 2
    assert "mazelens:" in capsys.readouterr().err


def test_bad_weight_file_exits_2(tmp_path, maze_file, capsys):
    bad = tmp_path / "bad.impw"
    bad.write_bytes(b"garbage")
    rc = main(["forward", "--weights", str(bad), "--maze", str(maze_file)])
    assert rc == 2


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=7\nsize=11\n")
    out = tmp_path / "cfg.maze"
    rc = main(["gen-maze", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    direct = tmp_path / "direct.maze"
    main(["gen-maze", "--seed", "7", "--size", "11", "--out", str(direct)])
    assert out.read_bytes() == direct.read_bytes()


def test_explicit_flag_beats_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=7\nsize=11\n")
    out = tmp_path / "cfg.maze"
    rc = main(["gen-maze", "--config", str(cfg), "--seed", "9", "--out", str(out)])
    assert rc == 0
    direct = tmp_path / "direct.maze"
    main(["gen-maze", "--seed", "9", "--size", "11", "--out", str(direct)])
    assert out.read_bytes() == direct.read_bytes()
