"""Command-line entry point: ``pancrad <subcommand> ...``.

Exit codes: 0 success, 1 runtime or data failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .evaluation import confusion_metrics, cross_validate, segmentation_metrics
from .exceptions import ConfigError, PancradError
from .gbdt import GradientBoostedTreesClassifier, load_model, save_model
from .nifti import load_mask, load_volume
from .phantom import generate_dataset, read_manifest
from .pipeline import prepare_case
from .radiomics import FEATURE_NAMES, extract_all
from .roi import crop, expand_box, export_slices, mask_bounding_box, write_pgm
from .tables import load_features, records_to_arrays, save_features
from .volume import CaseRecord

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _map_cases(func, jobs, items):
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _load_pair(row):
    return load_volume(row["image"]), load_mask(row["mask"])


class _FeatureJob:
    def __init__(self, cfg):
        self.cfg = cfg

    def __call__(self, row):
        try:
            volume, mask = _load_pair(row)
            roi = prepare_case(volume, mask, self.cfg.preprocess.gaussian(),
                               self.cfg.preprocess.reorient, self.cfg.roi.expand_fraction)
            feats = extract_all(roi.volume, roi.region, self.cfg.radiomics, shape_mask=roi.organ)
            return row["case_id"], row["label"], feats, None
        except (PancradError, OSError) as exc:
            return row["case_id"], row["label"], None, f"{type(exc).__name__}: {exc}"


class _SliceJob:
    def __init__(self, cfg, out_dir):
        self.cfg = cfg
        self.out_dir = Path(out_dir)

    def __call__(self, row):
        try:
            roi = prepare_case(*_load_pair(row), self.cfg.preprocess.gaussian(),
                               self.cfg.preprocess.reorient, self.cfg.roi.expand_fraction)
            size = self.cfg.roi.export_size
            images = export_slices(roi.volume, (size, size), self.cfg.roi.export_plane)
            for k, image in enumerate(images):
                write_pgm(image, self.out_dir / f"{row['case_id']}_z{k}.pgm")
            return row["case_id"], len(images), None
        except (PancradError, OSError) as exc:
            return row["case_id"], 0, f"{type(exc).__name__}: {exc}"


def cmd_phantom(args, cfg):
    try:
        rows = generate_dataset(args.pos, args.neg, args.seed if args.seed is not None else 0, args.out)
    except OSError as exc:
        _err(f"cannot write to {args.out}: {exc.strerror or exc}")
        return EXIT_FAIL
    except PancradError as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(f"wrote {len(rows)} cases to {args.out}")
    return EXIT_OK


def cmd_features(args, cfg):
    rows = read_manifest(args.manifest)
    results = _map_cases(_FeatureJob(cfg), args.jobs, rows)
    records, failures = [], []
    for case_id, label, feats, error in results:
        if error is None:
            records.append(CaseRecord(case_id, label, feats))
        else:
            failures.append(case_id)
            print(f"case {case_id} failed: {error}", file=sys.stderr)
    save_features(records, args.out)
    print(f"extracted {len(records)} of {len(rows)} cases -> {args.out}")
    if failures:
        print(f"{len(failures)} case(s) failed: {', '.join(failures)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_cv(args, cfg):
    records = load_features(args.features)
    seed = args.seed if args.seed is not None else cfg.eval.seed
    summary = cross_validate(records, cfg.gbdt, k=cfg.eval.k, seed=seed)
    print(summary.table())
    report = summary.to_dict()
    report["seed"] = seed
    report["k"] = cfg.eval.k
    report["hyperparams"] = cfg.gbdt.__dict__.copy()
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_train(args, cfg):
    records = load_features(args.features)
    _, X, y = records_to_arrays(records, FEATURE_NAMES)
    clf = GradientBoostedTreesClassifier.from_hyperparams(cfg.gbdt).fit(X, y, feature_names=FEATURE_NAMES)
    save_model(clf.model_, args.model)
    acc = confusion_metrics(clf.predict(X), y).accuracy
    print(f"training accuracy: {100 * acc:.2f}% on {len(y)} cases")
    return EXIT_OK


def cmd_predict(args, cfg):
    model = load_model(args.model)
    records = load_features(args.features, names=model.feature_names)
    ids, X, y = records_to_arrays(records, model.feature_names)
    proba = model.predict_proba(X) if len(ids) else np.zeros(0)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["case_id", "probability", "predicted_label"])
        for cid, p in zip(ids, proba):
            writer.writerow([cid, format(float(p), ".10g"), int(p >= 0.5)])
    finally:
        if out is not sys.stdout:
            out.close()
    if len(ids):
        acc = confusion_metrics((proba >= 0.5).astype(int), y).accuracy
        print(f"accuracy against CSV labels: {100 * acc:.2f}%", file=sys.stderr)
    return EXIT_OK


def _mask_files(folder):
    return {p.name: p for p in sorted(Path(folder).iterdir())
            if p.name.endswith(".nii") or p.name.endswith(".nii.gz")}


def cmd_segmetrics(args, cfg):
    pred, truth = _mask_files(args.pred), _mask_files(args.truth)
    unmatched = sorted(set(pred) ^ set(truth))
    if unmatched:
        _err("unmatched mask files: " + ", ".join(unmatched))
        return EXIT_FAIL
    per_case = {}
    for name in sorted(pred):
        per_case[name] = segmentation_metrics(load_mask(pred[name]), load_mask(truth[name]))
    keys = ("dice", "miou", "precision", "recall")
    mean = {k: float(np.mean([m[k] for m in per_case.values()])) if per_case else 0.0 for k in keys}
    print("case | " + " | ".join(keys))
    for name, m in per_case.items():
        print(f"{name} | " + " | ".join(f"{m[k]:.4f}" for k in keys))
    print("mean | " + " | ".join(f"{mean[k]:.4f}" for k in keys))
    if args.out:
        Path(args.out).write_text(json.dumps({"per_case": per_case, "mean": mean}, indent=2) + "\n")
    return EXIT_OK


def cmd_export_slices(args, cfg):
    rows = read_manifest(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = []
    for case_id, count, error in _map_cases(_SliceJob(cfg, out), args.jobs, rows):
        if error is not None:
            failures.append(case_id)
            print(f"case {case_id} failed: {error}", file=sys.stderr)
    print(f"exported slices for {len(rows) - len(failures)} of {len(rows)} cases -> {out}")
    return EXIT_FAIL if failures else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON pipeline configuration")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="parallel worker processes")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed override")

    parser = argparse.ArgumentParser(prog="pancrad", parents=[common],
                                     description="CT radiomics pipeline for peri-pancreatic edema classification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--pos", type=int, default=60)
    p.add_argument("--neg", type=int, default=40)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("features", parents=[common], help="extract radiomics features")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("cv", parents=[common], help="stratified cross-validation of the classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("train", parents=[common], help="fit the classifier on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="score a feature CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("segmetrics", parents=[common], help="Dice/mIoU/precision/recall between mask folders")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_segmetrics)

    p = sub.add_parser("export-slices", parents=[common], help="write resized ROI slices as PGM")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_slices)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.config = getattr(args, "config", None)
    args.jobs = getattr(args, "jobs", 1)
    args.seed = getattr(args, "seed", None)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = PipelineConfig.load(args.config)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except (PancradError, OSError) as exc:
        _err(str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
