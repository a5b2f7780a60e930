import json
import os
import shutil

import numpy as np
import pytest

from pancrad.cli import main
from pancrad.nifti import save_nifti
from pancrad.radiomics import FEATURE_NAMES
from pancrad.volume import Mask


@pytest.fixture(scope="module")
def features_csv(small_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("feat") / "f.csv"
    assert main(["features", "--manifest", str(small_dataset / "manifest.csv"), "--out", str(out)]) == 0
    return out


def test_phantom_usage_and_errors(tmp_path, capsys):
    assert main(["phantom", "--pos", "1", "--neg", "1", "--seed", "3", "--out", str(tmp_path / "d")]) == 0
    assert len(list((tmp_path / "d").iterdir())) == 5
    with pytest.raises(SystemExit) as exc:
        main(["phantom", "--pos", "1", "--neg", "1"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
    assert main(["phantom", "--pos", "0", "--neg", "1", "--out", str(tmp_path / "e")]) == 2


@pytest.mark.skipif(os.geteuid() == 0, reason="permissions are not enforced for root")
def test_phantom_unwritable(tmp_path, capsys):
    ro = tmp_path / "ro"
    ro.mkdir(mode=0o500)
    assert main(["phantom", "--pos", "1", "--neg", "1", "--out", str(ro / "x")]) == 1
    assert str(ro / "x") in capsys.readouterr().err


def test_phantom_target_is_a_file(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["phantom", "--pos", "1", "--neg", "1", "--out", str(blocker / "x")]) == 1
    assert str(blocker / "x") in capsys.readouterr().err


def test_features_shape(features_csv):
    lines = features_csv.read_text().splitlines()
    assert len(lines) == 12
    assert all(len(line.split(",")) == 109 for line in lines)
    assert lines[0].split(",")[2:] == list(FEATURE_NAMES)


def test_features_missing_file_and_empty_manifest(small_dataset, tmp_path, capsys):
    d = tmp_path / "d"
    shutil.copytree(small_dataset, d)
    (d / "case_0001_img.nii").unlink()
    assert main(["features", "--manifest", str(d / "manifest.csv"), "--out", str(tmp_path / "f.csv")]) == 1
    assert "case_0001" in capsys.readouterr().err
    assert len((tmp_path / "f.csv").read_text().splitlines()) == 11
    (tmp_path / "empty.csv").write_text("case_id,label,seed\n")
    assert main(["features", "--manifest", str(tmp_path / "empty.csv"), "--out", str(tmp_path / "e.csv")]) == 0
    assert len((tmp_path / "e.csv").read_text().splitlines()) == 1


def test_cv_report(features_csv, tmp_path, capsys):
    assert main(["cv", "--features", str(features_csv), "--report", str(tmp_path / "r1.json")]) == 0
    assert "Average" in capsys.readouterr().out
    assert main(["cv", "--features", str(features_csv), "--report", str(tmp_path / "r2.json")]) == 0
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    report = json.loads((tmp_path / "r1.json").read_text())
    assert len(report["per_fold"]) == 5 and set(report["mean"]) == {"accuracy", "precision", "recall"}


def test_cv_stratification_failure(features_csv, tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"eval": {"k": 6}}))
    rc = main(["--config", str(tmp_path / "c.json"), "cv", "--features", str(features_csv),
               "--report", str(tmp_path / "r.json")])
    assert rc == 1 and "fewer than k" in capsys.readouterr().err


def test_bad_config_is_usage_error(features_csv, tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"eval": {"folds": 6}}))
    assert main(["cv", "--config", str(tmp_path / "c.json"), "--features", str(features_csv),
                 "--report", str(tmp_path / "r.json")]) == 2


def test_train_predict(features_csv, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", "--features", str(features_csv), "--model", str(model)]) == 0
    assert "training accuracy" in capsys.readouterr().out
    assert main(["predict", "--model", str(model), "--features", str(features_csv),
                 "--out", str(tmp_path / "p.csv")]) == 0
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "case_id,probability,predicted_label" and len(lines) == 12

    header, *rows = features_csv.read_text().splitlines()
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("\n".join(",".join(r.split(",")[:-1]) for r in [header] + rows) + "\n")
    assert main(["predict", "--model", str(model), "--features", str(wrong)]) == 1
    empty = tmp_path / "empty.csv"
    empty.write_text(header + "\n")
    assert main(["predict", "--model", str(model), "--features", str(empty),
                 "--out", str(tmp_path / "e.csv")]) == 0
    assert (tmp_path / "e.csv").read_text() == "case_id,probability,predicted_label\n"


def _write_masks(folder, masks):
    folder.mkdir()
    for name, data in masks.items():
        save_nifti(Mask(data, (1, 1, 1), (0, 0, 0), np.eye(3)), folder / name)


def test_segmetrics(tmp_path, capsys):
    a = np.zeros((4, 4, 4), np.uint8)
    a[1:3] = 1
    _write_masks(tmp_path / "t", {"x.nii": a, "y.nii.gz": a})
    _write_masks(tmp_path / "p", {"x.nii": a, "y.nii.gz": a})
    assert main(["segmetrics", "--pred", str(tmp_path / "p"), "--truth", str(tmp_path / "t"),
                 "--out", str(tmp_path / "s.json")]) == 0
    assert json.loads((tmp_path / "s.json").read_text())["mean"] == {
        "dice": 1.0, "miou": 1.0, "precision": 1.0, "recall": 1.0}
    _write_masks(tmp_path / "e", {"x.nii": np.zeros_like(a), "y.nii.gz": np.zeros_like(a)})
    assert main(["segmetrics", "--pred", str(tmp_path / "e"), "--truth", str(tmp_path / "t"),
                 "--out", str(tmp_path / "z.json")]) == 0
    mean = json.loads((tmp_path / "z.json").read_text())["mean"]
    assert mean["dice"] == 0.0 and mean["recall"] == 0.0
    _write_masks(tmp_path / "u", {"x.nii": a})
    assert main(["segmetrics", "--pred", str(tmp_path / "u"), "--truth", str(tmp_path / "t")]) == 1
    assert "y.nii.gz" in capsys.readouterr().err


def test_export_slices(small_dataset, tmp_path):
    d = tmp_path / "d"
    d.mkdir()
    for name in ("case_0000_img.nii", "case_0000_msk.nii"):
        shutil.copy(small_dataset / name, d / name)
    (d / "manifest.csv").write_text("case_id,label,seed\ncase_0000,1,0\n")
    assert main(["export-slices", "--manifest", str(d / "manifest.csv"), "--out", str(tmp_path / "a")]) == 0
    assert main(["export-slices", "--manifest", str(d / "manifest.csv"), "--out", str(tmp_path / "b"),
                 "--jobs", "2"]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files and all(f.startswith("case_0000_z") for f in files)
    header = b"P5\n224 224\n65535\n"
    for f in files:
        raw = (tmp_path / "a" / f).read_bytes()
        assert raw.startswith(header) and len(raw) == len(header) + 224 * 224 * 2
        assert raw == (tmp_path / "b" / f).read_bytes()

    save_nifti(Mask(np.zeros((48, 48, 48), np.uint8), (1, 1, 1), (0, 0, 0), np.eye(3)), d / "case_0000_msk.nii")
    assert main(["export-slices", "--manifest", str(d / "manifest.csv"), "--out", str(tmp_path / "c")]) == 1


def test_jobs_must_be_positive(features_csv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--jobs", "0", "cv", "--features", str(features_csv), "--report", str(tmp_path / "r.json")])
    assert exc.value.code == 2
