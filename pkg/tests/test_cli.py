import json

import numpy as np
import pytest

from quest.cli import main
from quest.features import read_feature_csv
from quest.imageio import read_image, write_pgm
from quest.synthetic import write_dataset

SMALL = ["--size", "32", "--grid", "4", "--threads", "1"]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("grating")
    manifest = write_dataset(root, n_classes=3, per_class=10, n_subjects=5, size=40, seed=7)
    return manifest


@pytest.fixture(scope="module")
def features(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("feat") / "features.csv"
    assert main(["extract", str(dataset), "-o", str(out)] + SMALL) == 0
    return out


def test_encode(tmp_path, rng):
    src = tmp_path / "in.pgm"
    write_pgm(src, rng.integers(0, 256, size=(128, 128)))
    out = tmp_path / "codes.pgm"
    assert main(["encode", str(src), "-o", str(out)]) == 0
    cm = read_image(out)
    assert (cm.width, cm.height) == (126, 126)
    assert max(cm.data) < 64
    side = json.loads((tmp_path / "codes.pgm.json").read_text())
    assert side["run_config"]["quad_assignment"] == "v3"
    assert side["pgm_mode"] == "raw"


def test_encode_visualize_lbp(tmp_path, rng):
    src = tmp_path / "in.pgm"
    write_pgm(src, rng.integers(0, 256, size=(10, 12)))
    out = tmp_path / "v.pgm"
    assert main(["encode", str(src), "-o", str(out), "--visualize"]) == 0
    assert max(read_image(out).data) % 4 == 0
    assert main(["encode", str(src), "-o", str(out), "--descriptor", "lbp"]) == 0
    assert json.loads((tmp_path / "v.pgm.json").read_text())["descriptor"] == "LBP"


def test_encode_missing_file(tmp_path, capsys):
    assert main(["encode", str(tmp_path / "nope.pgm"), "-o", str(tmp_path / "x.pgm")]) == 2
    assert "nope.pgm" in capsys.readouterr().err


def test_encode_too_small(tmp_path):
    src = tmp_path / "tiny.pgm"
    write_pgm(src, np.zeros((2, 2)))
    assert main(["encode", str(src), "-o", str(tmp_path / "x.pgm")]) == 3


def test_extract_shape(dataset, tmp_path):
    lines = dataset.read_text().splitlines()[:3]
    manifest = dataset.parent / "three.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    out = tmp_path / "f.csv"
    assert main(["extract", str(manifest), "-o", str(out), "--threads", "1"]) == 0
    table = read_feature_csv(out)
    assert table.X.shape == (3, 4096)
    assert json.loads((tmp_path / "f.csv.json").read_text())["run_config"]["grid"] == 8


def test_extract_thread_independent(dataset, features, tmp_path):
    out = tmp_path / "f8.csv"
    assert main(["extract", str(dataset), "-o", str(out), "--size", "32", "--grid", "4",
                 "--threads", "8"]) == 0
    assert out.read_bytes() == features.read_bytes()


def test_extract_schema_error(tmp_path, capsys):
    manifest = tmp_path / "m.jsonl"
    manifest.write_text('{"path": "a.pgm", "subject": "s", "label": "x"}\n{"path": "b.pgm", "label": "x"}\n')
    assert main(["extract", str(manifest), "-o", str(tmp_path / "f.csv")]) == 4
    assert "line 2" in capsys.readouterr().err


def test_extract_unreadable_image(tmp_path, capsys):
    manifest = tmp_path / "m.jsonl"
    manifest.write_text('{"path": "missing.pgm", "subject": "s", "label": "x"}\n')
    assert main(["extract", str(manifest), "-o", str(tmp_path / "f.csv")]) == 2
    assert "record 1" in capsys.readouterr().err


def test_extract_uses_bbox(tmp_path):
    arr = np.zeros((40, 40), dtype=np.uint8)
    arr[10:30, 10:30] = np.arange(400).reshape(20, 20) % 251
    write_pgm(tmp_path / "img.pgm", arr)
    write_pgm(tmp_path / "crop.pgm", arr[10:30, 10:30])
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(
        '{"path": "img.pgm", "subject": "s", "label": "x", "bbox": [10, 10, 20, 20]}\n'
        '{"path": "crop.pgm", "subject": "s", "label": "x"}\n')
    out = tmp_path / "f.csv"
    assert main(["extract", str(manifest), "-o", str(out), "--size", "24", "--grid", "2"]) == 0
    table = read_feature_csv(out)
    assert np.array_equal(table.X[0], table.X[1])


def test_extract_bbox_out_of_range(tmp_path):
    write_pgm(tmp_path / "img.pgm", np.zeros((10, 10)))
    manifest = tmp_path / "m.jsonl"
    manifest.write_text('{"path": "img.pgm", "subject": "s", "label": "x", "bbox": [5, 5, 8, 2]}\n')
    assert main(["extract", str(manifest), "-o", str(tmp_path / "f.csv")]) == 3


def test_cv_runs_and_prints(features, tmp_path, capsys):
    assert main(["cv", str(features), "-o", str(tmp_path / "r")] + SMALL) == 0
    printed = capsys.readouterr().out.strip()
    report = json.loads((tmp_path / "r" / "report.json").read_text())
    assert printed == f"{report['mean_accuracy']:.2f}"
    assert report["classifier"] == "svm" and report["protocol"] == "subject-kfold"
    assert report["run_config"]["seed"] == 42
    assert report["run_config"]["features"]["size"] == 32
    for name in ("confusion.csv", "confusion.txt", "plan.json", "model.json"):
        assert (tmp_path / "r" / name).exists()


def test_cv_deterministic(features, tmp_path):
    for d in ("a", "b"):
        assert main(["cv", str(features), "-o", str(tmp_path / d)] + SMALL) == 0
    for name in ("report.json", "confusion.csv", "confusion.txt", "plan.json", "model.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cv_knn_routing(features, tmp_path):
    assert main(["cv", str(features), "-o", str(tmp_path / "k"), "--classifier", "knn"]) == 0
    report = json.loads((tmp_path / "k" / "report.json").read_text())
    assert report["classifier"] == "knn"
    assert not (tmp_path / "k" / "model.json").exists()


def test_cv_random_holdout(features, tmp_path):
    assert main(["cv", str(features), "-o", str(tmp_path / "h"), "--protocol", "random-holdout",
                 "--repeats", "3"]) == 0
    report = json.loads((tmp_path / "h" / "report.json").read_text())
    assert report["n_folds"] == 3 and "note" in report


def test_cv_single_class(tmp_path):
    csv = tmp_path / "one.csv"
    csv.write_text("label,subject,f0\na,s1,0.5\na,s2,0.25\n")
    assert main(["cv", str(csv), "-o", str(tmp_path / "r")]) == 5


def test_cv_too_few_subjects(tmp_path):
    csv = tmp_path / "two.csv"
    csv.write_text("label,subject,f0\na,s1,0.5\nb,s2,0.25\n")
    assert main(["cv", str(csv), "-o", str(tmp_path / "r")]) == 5


def test_compare(dataset, tmp_path, capsys):
    args = ["compare", str(dataset)] + SMALL
    assert main(args + ["-o", str(tmp_path / "c1")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "Methods\tAccuracy"
    assert [line.split("\t")[0] for line in out[1:]] == ["LBP", "QUEST"]
    assert all(0 <= float(line.split("\t")[1]) <= 100 for line in out[1:])
    c1 = tmp_path / "c1"
    assert (c1 / "lbp" / "plan.json").read_bytes() == (c1 / "quest" / "plan.json").read_bytes()
    assert main(args + ["-o", str(tmp_path / "c2")]) == 0
    assert (c1 / "comparison.txt").read_bytes() == (tmp_path / "c2" / "comparison.txt").read_bytes()
