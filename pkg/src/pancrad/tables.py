"""Feature-table CSV serialization."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .exceptions import DuplicateCaseError, SchemaError
from .radiomics.names import FEATURE_NAMES
from .volume import CaseRecord

ID_COLUMNS = ("case_id", "label")


def _check_record(rec, names):
    if rec.features is None:
        raise SchemaError(f"case {rec.case_id!r} has no feature vector")
    keys = tuple(rec.features)
    if keys != names:
        missing = sorted(set(names) - set(keys))
        extra = sorted(set(keys) - set(names))
        detail = f"missing {missing[:3]}" if missing else f"unexpected {extra[:3]}" if extra else "key order differs"
        raise SchemaError(f"case {rec.case_id!r}: feature set does not match the schema ({detail})")


def save_features(records, path, names=FEATURE_NAMES):
    """Write records as CSV, one row per case, sorted by ``case_id``."""
    names = tuple(names)
    records = list(records)
    for rec in records:
        _check_record(rec, names)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ID_COLUMNS + names)
        for rec in sorted(records, key=lambda r: r.case_id):
            writer.writerow([rec.case_id, rec.label] + [repr(float(rec.features[n])) for n in names])
    return path


def load_features(path, names=FEATURE_NAMES):
    """Read a CSV written by :func:`save_features` back into CaseRecords."""
    names = tuple(names)
    expected = ID_COLUMNS + names
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError("feature table is empty (no header)") from None
        if header != expected:
            raise SchemaError(
                f"header has {len(header) - 2} feature columns; expected the {len(names)} canonical names in order")
        records, seen = [], set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise SchemaError(f"line {lineno}: {len(row)} cells, expected {len(expected)}")
            case_id = row[0]
            if case_id in seen:
                raise DuplicateCaseError(f"duplicate case_id {case_id!r} on line {lineno}")
            seen.add(case_id)
            if row[1] not in ("0", "1"):
                raise SchemaError(f"line {lineno}: label must be 0 or 1, found {row[1]!r}")
            feats = {}
            for name, cell in zip(names, row[2:]):
                try:
                    value = float(cell)
                except ValueError:
                    raise SchemaError(f"line {lineno}: non-numeric value {cell!r} in column {name}") from None
                if not math.isfinite(value):
                    raise SchemaError(f"line {lineno}: non-finite value in column {name}")
                feats[name] = value
            records.append(CaseRecord(case_id, int(row[1]), feats))
    return records


def records_to_arrays(records, names=None):
    """Stack records into ``(case_ids, X, y)``; columns follow the first record's keys."""
    records = list(records)
    if names is None:
        names = tuple(records[0].features) if records else FEATURE_NAMES
    X = np.array([[rec.features[n] for n in names] for rec in records], dtype=np.float64).reshape(len(records), len(names))
    y = np.array([rec.label for rec in records], dtype=np.int64)
    return [rec.case_id for rec in records], X, y
