"""Synthetic data generation (counts, geometry, splits, determinism) and
CSV round-tripping with its error reporting."""

import logging

import numpy as np
import pytest

from dcl.data import (DESK_NUM_ATTRIBUTES, DESK_RATIOS, CsvSchema, Dataset,
                      SPLIT_NAMES, generate_synthetic, load_csv, save_csv)
from dcl.errors import ConfigError, DataError


def test_generation_is_deterministic_in_seed():
    a = generate_synthetic([2.0, 5.0], 300, 6, seed=3)
    b = generate_synthetic([2.0, 5.0], 300, 6, seed=3)
    c = generate_synthetic([2.0, 5.0], 300, 6, seed=4)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.split, b.split)
    assert not np.array_equal(a.features, c.features)


def test_minority_counts_match_requested_ratios():
    ratios = [1.0, 4.0, 9.0]
    ds = generate_synthetic(ratios, 1000, 8, seed=0)
    for a, r in enumerate(ratios):
        expected_minority = round(1000 / (1.0 + r))
        assert int(ds.labels[a].sum()) == expected_minority
    # Class 1 is the minority wherever there is an actual imbalance.
    assert list(ds.minority_classes("train")[1:]) == [1, 1]


def test_desk_scale_constants():
    assert DESK_NUM_ATTRIBUTES == 20
    assert len(DESK_RATIOS) == 20
    assert DESK_RATIOS[0] == 1.0
    assert DESK_RATIOS[-1] == 100.0
    assert all(b > a for a, b in zip(DESK_RATIOS, DESK_RATIOS[1:]))


def test_split_is_stratified_on_most_imbalanced_attribute(small_dataset):
    ds = small_dataset  # ratios (1, 2, 4, 8, 16, 32), n = 1200
    rarest = 5
    minority_members = ds.labels[rarest] == 1
    assert int(minority_members.sum()) == round(1200 / 33)  # 36
    per_split = [int((ds.split[minority_members] == s).sum()) for s in range(3)]
    assert per_split == [25, 4, 7]  # 70 / 10 / 20 of 36, rounded
    totals = [int((ds.split == s).sum()) for s in range(3)]
    assert totals == [840, 120, 240]


def test_class_geometry_matches_separation():
    ratios = [1.0, 2.0, 4.0]
    sep = 2.5
    ds = generate_synthetic(ratios, 4000, 8, class_separation=sep, seed=1)
    deltas = []
    for a in range(3):
        mean1 = ds.features[ds.labels[a] == 1].mean(axis=0)
        mean0 = ds.features[ds.labels[a] == 0].mean(axis=0)
        deltas.append(mean1 - mean0)
        assert np.linalg.norm(deltas[-1]) == pytest.approx(sep, abs=0.35)
    for a in range(3):
        for b in range(a + 1, 3):
            cos = np.dot(deltas[a], deltas[b]) / (
                np.linalg.norm(deltas[a]) * np.linalg.norm(deltas[b]))
            assert abs(cos) < 0.15  # attribute directions stay decoupled


def test_generation_validation():
    with pytest.raises(ConfigError):
        generate_synthetic([], 100, 4)
    with pytest.raises(ConfigError):
        generate_synthetic([0.5], 100, 4)  # ratios are majority:minority
    with pytest.raises(ConfigError):
        generate_synthetic([2.0], 1, 4)
    with pytest.raises(ConfigError):
        generate_synthetic([2.0], 100, 0)
    with pytest.raises(ConfigError):
        generate_synthetic([2.0], 100, 4, noise_sd=0.0)
    with pytest.raises(ConfigError):
        generate_synthetic([2.0], 100, 4, class_separation=-1.0)
    with pytest.raises(ConfigError):
        generate_synthetic([2.0], 100, 4, attribute_names=["only_one_but_fine", "extra"])
    with pytest.raises(ConfigError):
        generate_synthetic([100.0], 10, 4)  # rounds to zero minority samples


def test_warnings_for_fragile_configurations(caplog):
    with caplog.at_level(logging.WARNING, logger="dcl.data"):
        generate_synthetic([999.0], 1000, 4, seed=0)  # 1 minority sample
    assert any("minority" in rec.message for rec in caplog.records)
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="dcl.data"):
        ds = generate_synthetic([2.0, 3.0, 4.0], 200, 2, seed=0)
    assert any("orthogonal" in rec.message for rec in caplog.records)
    assert ds.features.shape == (200, 2)


def test_dataset_validation():
    feats = np.zeros((4, 2))
    labels = np.zeros((1, 4), dtype=np.int64)
    split = np.zeros(4, dtype=np.int8)
    with pytest.raises(ValueError):
        Dataset(features=np.zeros(4), labels=labels, attribute_names=["a"], split=split)
    with pytest.raises(ValueError):
        Dataset(features=feats, labels=np.zeros((1, 3), dtype=int), attribute_names=["a"], split=split)
    with pytest.raises(ValueError):
        Dataset(features=feats, labels=labels, attribute_names=[], split=split)
    with pytest.raises(ValueError):
        Dataset(features=feats, labels=labels, attribute_names=["a"], split=split[:2])
    with pytest.raises(DataError):
        Dataset(features=feats, labels=labels - 1, attribute_names=["a"], split=split)
    with pytest.raises(DataError):
        Dataset(features=feats, labels=labels, attribute_names=["a"], split=split + 5)
    with pytest.raises(DataError):
        bad = feats.copy()
        bad[0, 0] = np.nan
        Dataset(features=bad, labels=labels, attribute_names=["a"], split=split)


def test_csv_round_trip_is_bitwise(tmp_path, tiny_dataset):
    path = tmp_path / "data.csv"
    save_csv(tiny_dataset, path)
    back = load_csv(path)
    assert np.array_equal(back.features, tiny_dataset.features)
    assert np.array_equal(back.labels, tiny_dataset.labels)
    assert np.array_equal(back.split, tiny_dataset.split)
    assert back.attribute_names == tiny_dataset.attribute_names
    assert back.manifest == tiny_dataset.manifest
    assert (tmp_path / "data.csv.manifest.json").exists()


def test_schema_inference():
    schema = CsvSchema.infer(["feature_00", "feature_01", "age", "split", "height"])
    assert schema.feature_columns == ["feature_00", "feature_01"]
    assert schema.attribute_columns == ["age", "height"]
    assert schema.split_column == "split"
    schema = CsvSchema.infer(["feature_00", "label"])
    assert schema.split_column is None
    with pytest.raises(DataError):
        CsvSchema.infer(["a", "b"])
    with pytest.raises(DataError):
        CsvSchema.infer(["feature_00", "feature_01"])


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_without_split_column_is_deterministic(tmp_path):
    rows = ["feature_00,feature_01,attr_a,attr_b"]
    rng = np.random.default_rng(0)
    flags = [1, 1, 0, 0, 0, 0, 0, 0, 0, 0]
    for i in range(10):
        x, y = (float(v) for v in rng.normal(size=2))
        rows.append(f"{x!r},{y!r},{flags[i]},{i % 2}")
    path = _write(tmp_path, "plain.csv", "\n".join(rows) + "\n")
    first = load_csv(path)
    second = load_csv(path)
    assert np.array_equal(first.split, second.split)
    assert set(np.unique(first.split)) <= {0, 1, 2}
    assert first.manifest == {}  # no sidecar on a hand-written file


def test_load_csv_reports_line_numbers(tmp_path):
    head = "feature_00,attr_a,split\n"
    cases = [
        (head + "1.0,0,train\nnot_a_number,1,val\n", ":3:", "bad feature"),
        (head + "1.0,zero,train\n", ":2:", "integers"),
        (head + "1.0,-1,train\n", ":2:", "non-negative"),
        (head + "1.0,0,nowhere\n", ":2:", "unknown split"),
        (head + "1.0,0\n", ":2:", "expected 3 fields"),
    ]
    for i, (text, locator, message) in enumerate(cases):
        path = _write(tmp_path, f"case_{i}.csv", text)
        with pytest.raises(DataError) as err:
            load_csv(path)
        assert locator in str(err.value)
        assert message in str(err.value)


def test_load_csv_edge_cases(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_csv(tmp_path / "missing.csv")
    empty = _write(tmp_path, "empty.csv", "")
    with pytest.raises(DataError, match="header"):
        load_csv(empty)
    headers_only = _write(tmp_path, "headers.csv", "feature_00,attr_a,split\n")
    with pytest.raises(DataError, match="no data rows"):
        load_csv(headers_only)
    blank_lines = _write(
        tmp_path, "blanks.csv", "feature_00,attr_a,split\n1.5,0,train\n\n2.5,1,test\n")
    ds = load_csv(blank_lines)
    assert ds.num_samples == 2


def test_load_csv_with_explicit_schema(tmp_path):
    text = "x,y,flag\n0.25,1.5,1\n0.5,2.5,0\n0.75,3.5,0\n"
    path = _write(tmp_path, "custom.csv", text)
    schema = CsvSchema(feature_columns=["x", "y"], attribute_columns=["flag"])
    ds = load_csv(path, schema)
    assert ds.features.shape == (3, 2)
    assert ds.attribute_names == ["flag"]
    assert np.array_equal(ds.labels, [[1, 0, 0]])
    bad = CsvSchema(feature_columns=["x", "nope"], attribute_columns=["flag"])
    with pytest.raises(DataError, match="nope"):
        load_csv(path, bad)


def test_split_names_round_trip(tmp_path, tiny_dataset):
    path = tmp_path / "with_split.csv"
    save_csv(tiny_dataset, path)
    text = path.read_text(encoding="utf-8")
    for name in SPLIT_NAMES:
        assert name in text
    back = load_csv(path)
    for name in SPLIT_NAMES:
        idx = back.split_indices(name)
        assert np.array_equal(idx, tiny_dataset.split_indices(name))
