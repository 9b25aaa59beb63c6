import json

import numpy as np
import pytest

from ecganno import ingest
from ecganno.errors import Conflict, DuplicateRecordName, UnknownDataset
from ecganno.storage import Storage

from test_annotations import tiny_record
from wfdb_synth import make_record, write_dataset_dir


@pytest.fixture
def store(tmp_path):
    return Storage.initialize(tmp_path / "data")


class TestCreateDataset:
    def test_default_vocabulary(self, store):
        ds = ingest.create_dataset(store, "alpha")
        rows = store.connection().execute(
            "SELECT code, display_text FROM dataset_labels WHERE dataset_id = ?"
            " ORDER BY position",
            (ds,),
        ).fetchall()
        assert [(r["code"], r["display_text"]) for r in rows] == [
            ("NORM", "normal"),
            ("AF", "atrial fibrillation"),
            ("ER", "early repolarization"),
            ("TWC", "T wave change"),
        ]

    def test_custom_vocabulary(self, store):
        ds = ingest.create_dataset(store, "beta", [("X", "mystery"), ("Y", "other")])
        rows = store.connection().execute(
            "SELECT code FROM dataset_labels WHERE dataset_id = ? ORDER BY position",
            (ds,),
        ).fetchall()
        assert [r["code"] for r in rows] == ["X", "Y"]

    def test_duplicate_name_refused(self, store):
        ingest.create_dataset(store, "alpha")
        with pytest.raises(Conflict):
            ingest.create_dataset(store, "alpha")

    def test_vocabulary_validation(self, store):
        with pytest.raises(ValueError):
            ingest.create_dataset(store, "x", [("A B", "spaced code")])
        with pytest.raises(ValueError):
            ingest.create_dataset(store, "x", [("A", "one"), ("A", "twice")])
        with pytest.raises(ValueError):
            ingest.create_dataset(store, "x", [("A", "  ")])
        with pytest.raises(ValueError):
            ingest.create_dataset(store, "  ")


class TestAddRecord:
    def test_positions_follow_insertion_order(self, store):
        ds = ingest.create_dataset(store, "alpha")
        assert ingest.add_record(store, ds, tiny_record("b")) == 0
        assert ingest.add_record(store, ds, tiny_record("a")) == 1

    def test_duplicate_record_name(self, store):
        ds = ingest.create_dataset(store, "alpha")
        ingest.add_record(store, ds, tiny_record("r0"))
        with pytest.raises(DuplicateRecordName):
            ingest.add_record(store, ds, tiny_record("r0"))

    def test_unknown_dataset(self, store):
        with pytest.raises(UnknownDataset):
            ingest.add_record(store, "d_nope", tiny_record("r0"))

    def test_signals_and_analysis_are_persisted(self, store):
        ds = ingest.create_dataset(store, "alpha")
        record = tiny_record("r0", n=80)
        ingest.add_record(store, ds, record)
        window = store.get_signal_window("ds/r0", 0, 0, 80)
        np.testing.assert_array_equal(window.samples, record.leads[0].samples)
        row = store.connection().execute(
            "SELECT analysis_json FROM records WHERE record_id = 'ds/r0'"
        ).fetchone()
        cached = json.loads(row["analysis_json"])
        assert cached["analyzed_lead"] == "II"
        assert cached["suggestions"][0]["code"] == "NODATA"  # 80 samples is too short


def synth_dir(tmp_path, recs):
    d = tmp_path / "wfdbdir"
    write_dataset_dir(d, recs)
    return d


class TestIngestDirectory:
    def test_clean_directory(self, store, tmp_path):
        rng = np.random.default_rng(0)
        recs = [
            make_record(
                f"rec{i}",
                {"I": rng.integers(-100, 100, 40).astype(np.int32),
                 "II": rng.integers(-100, 100, 40).astype(np.int32)},
            )
            for i in range(3)
        ]
        d = synth_dir(tmp_path, recs)
        report = ingest.ingest_directory(store, "alpha", d)
        assert report.n_ok == 3
        assert report.n_skipped == 0
        rows = store.connection().execute(
            "SELECT name, position FROM records ORDER BY position"
        ).fetchall()
        assert [r["name"] for r in rows] == ["rec0", "rec1", "rec2"]

    def test_unsupported_format_skipped_not_fatal(self, store, tmp_path):
        good = make_record("good", {"II": np.arange(20, dtype=np.int32)})
        d = synth_dir(tmp_path, [good])
        (d / "bad.hea").write_text("bad 1 250 20\nbad.dat 8 200 12 0 0 0 0 II\n")
        (d / "bad.dat").write_bytes(b"\x00" * 20)
        report = ingest.ingest_directory(store, "alpha", d)
        assert report.n_ok == 1
        assert report.n_skipped == 1
        skipped = [e for e in report.entries if not e.ok][0]
        assert skipped.record_name == "bad"
        assert skipped.reason == "unsupported format"

    def test_missing_signal_file_skipped(self, store, tmp_path):
        good = make_record("good", {"II": np.arange(20, dtype=np.int32)})
        d = synth_dir(tmp_path, [good])
        (d / "lost.hea").write_text("lost 1 250 20\nlost.dat 16 200 12 0 0 0 0 II\n")
        report = ingest.ingest_directory(store, "alpha", d)
        assert report.n_ok == 1
        skipped = [e for e in report.entries if not e.ok][0]
        assert "missing signal file" in skipped.reason

    def test_truncated_dat_skipped(self, store, tmp_path):
        good = make_record("good", {"II": np.arange(20, dtype=np.int32)})
        d = synth_dir(tmp_path, [good])
        (d / "cut.hea").write_text("cut 1 250 100\ncut.dat 16 200 12 0 0 0 0 II\n")
        (d / "cut.dat").write_bytes(b"\x00" * 10)
        report = ingest.ingest_directory(store, "alpha", d)
        assert report.n_ok == 1
        skipped = [e for e in report.entries if not e.ok][0]
        assert skipped.reason == "truncated signal file"

    def test_record_ids_carry_dataset_name(self, store, tmp_path):
        d = synth_dir(
            tmp_path, [make_record("r1", {"II": np.arange(10, dtype=np.int32)})]
        )
        ingest.ingest_directory(store, "alpha", d)
        window = store.get_signal_window("alpha/r1", "II", 0, 10)
        np.testing.assert_array_equal(window.samples, np.arange(10))

    def test_empty_directory_makes_empty_dataset(self, store, tmp_path):
        d = tmp_path / "empty"
        d.mkdir()
        report = ingest.ingest_directory(store, "alpha", d)
        assert report.entries == []
        assert report.n_ok == 0
