import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pancrad.exceptions import DuplicateCaseError, SchemaError
from pancrad.radiomics import FEATURE_NAMES
from pancrad.tables import load_features, records_to_arrays, save_features
from pancrad.volume import CaseRecord


def _record(cid, label, rng):
    return CaseRecord(cid, label, dict(zip(FEATURE_NAMES, rng.normal(scale=1e3, size=107).tolist())))


def test_line_counts(tmp_path):
    rng = np.random.default_rng(0)
    save_features([_record("a", 1, rng), _record("b", 0, rng)], tmp_path / "f.csv")
    assert len((tmp_path / "f.csv").read_text().splitlines()) == 3
    save_features([], tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert len(lines) == 1 and lines[0].split(",")[:3] == ["case_id", "label", FEATURE_NAMES[0]]
    assert load_features(tmp_path / "e.csv") == []


def test_missing_feature_is_schema_error(tmp_path):
    rec = _record("a", 1, np.random.default_rng(0))
    del rec.features[FEATURE_NAMES[5]]
    with pytest.raises(SchemaError):
        save_features([rec], tmp_path / "f.csv")


def test_round_trip_five_records(tmp_path):
    rng = np.random.default_rng(1)
    recs = [_record(f"c{i}", i % 2, rng) for i in range(5)]
    save_features(recs, tmp_path / "f.csv")
    back = load_features(tmp_path / "f.csv")
    for a, b in zip(recs, back):
        assert a.case_id == b.case_id and a.label == b.label
        for k in FEATURE_NAMES:
            assert b.features[k] == pytest.approx(a.features[k], rel=1e-9)


def test_duplicates_and_header_errors(tmp_path):
    rng = np.random.default_rng(2)
    save_features([_record("a", 1, rng)], tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    (tmp_path / "dup.csv").write_text("\n".join([lines[0], lines[1], lines[1]]) + "\n")
    with pytest.raises(DuplicateCaseError):
        load_features(tmp_path / "dup.csv")
    short_header = ",".join(lines[0].split(",")[:-1])
    short_row = ",".join(lines[1].split(",")[:-1])
    (tmp_path / "h.csv").write_text(short_header + "\n" + short_row + "\n")
    with pytest.raises(SchemaError, match="106"):
        load_features(tmp_path / "h.csv")
    (tmp_path / "l.csv").write_text(lines[0] + "\n" + lines[1].replace("a,1,", "a,2,", 1) + "\n")
    with pytest.raises(SchemaError):
        load_features(tmp_path / "l.csv")


def test_rows_sorted_by_case_id(tmp_path):
    rng = np.random.default_rng(3)
    save_features([_record("b", 0, rng), _record("a", 1, rng)], tmp_path / "f.csv")
    ids, X, y = records_to_arrays(load_features(tmp_path / "f.csv"))
    assert ids == ["a", "b"] and X.shape == (2, 107) and y.tolist() == [1, 0]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=107, max_size=107))
def test_float_round_trip_property(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "f.csv"
    save_features([CaseRecord("x", 0, dict(zip(FEATURE_NAMES, values)))], path)
    back = load_features(path)[0].features
    for k, v in zip(FEATURE_NAMES, values):
        assert back[k] == pytest.approx(v, rel=1e-9, abs=1e-300)
