import os
import signal
import subprocess
import sys
import threading
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecganno.errors import (
    AlreadyInitialized,
    Conflict,
    NotInitialized,
    RangeOutOfBounds,
    SchemaVersionMismatch,
    UnknownRecord,
)
from ecganno.storage import Storage

TESTS_DIR = Path(__file__).parent


@pytest.fixture
def store(tmp_path):
    return Storage.initialize(tmp_path / "data")


def add_record(store, record_id="ds/r0", n=100, gain=200.0, baseline=0, samples=None):
    if samples is None:
        samples = np.arange(n, dtype=np.int32)
    with store.transaction() as conn:
        conn.execute(
            "INSERT OR IGNORE INTO datasets (dataset_id, name, created_at)"
            " VALUES ('ds', 'ds', 't')"
        )
        conn.execute(
            "INSERT INTO records (record_id, dataset_id, name, position,"
            " sampling_frequency, n_samples, duration) VALUES (?, 'ds', ?, 0,"
            " 250.0, ?, ?)",
            (record_id, record_id.split("/")[-1], len(samples), len(samples) / 250.0),
        )
        store.put_signal(conn, record_id, 0, "II", gain, baseline, samples)
    return np.asarray(samples, dtype=np.int32)


class TestLifecycle:
    def test_initialize_then_open(self, tmp_path):
        Storage.initialize(tmp_path / "d")
        store = Storage.open(tmp_path / "d")
        assert store.db_path.exists()
        assert store.blobs.path.exists()

    def test_double_initialize_refused(self, tmp_path):
        Storage.initialize(tmp_path / "d")
        with pytest.raises(AlreadyInitialized):
            Storage.initialize(tmp_path / "d")

    def test_open_uninitialized_refused(self, tmp_path):
        with pytest.raises(NotInitialized):
            Storage.open(tmp_path / "missing")

    def test_schema_version_checked(self, tmp_path):
        store = Storage.initialize(tmp_path / "d")
        with store.transaction() as conn:
            conn.execute("UPDATE meta SET value = '999' WHERE key = 'schema_version'")
        store.close()
        with pytest.raises(SchemaVersionMismatch):
            Storage.open(tmp_path / "d")

    def test_data_survives_reopen(self, tmp_path):
        store = Storage.initialize(tmp_path / "d")
        expected = add_record(store)
        store.close()
        store2 = Storage.open(tmp_path / "d")
        got = store2.get_signal_window("ds/r0", 0, 0, 100)
        np.testing.assert_array_equal(got.samples, expected)


class TestTransactions:
    def test_rollback_on_exception(self, store):
        with pytest.raises(RuntimeError):
            with store.transaction() as conn:
                conn.execute(
                    "INSERT INTO datasets (dataset_id, name, created_at)"
                    " VALUES ('x', 'x', 't')"
                )
                raise RuntimeError("boom")
        row = store.connection().execute("SELECT COUNT(*) FROM datasets").fetchone()
        assert row[0] == 0

    def test_nested_scope_joins_outer(self, store):
        with store.transaction() as conn:
            conn.execute(
                "INSERT INTO datasets (dataset_id, name, created_at)"
                " VALUES ('x', 'x', 't')"
            )
            with store.transaction() as inner:
                assert inner is conn
                inner.execute(
                    "INSERT INTO datasets (dataset_id, name, created_at)"
                    " VALUES ('y', 'y', 't')"
                )
        row = store.connection().execute("SELECT COUNT(*) FROM datasets").fetchone()
        assert row[0] == 2

    def test_writer_lock_contention_raises_conflict(self, tmp_path):
        Storage.initialize(tmp_path / "d")
        a = Storage.open(tmp_path / "d")
        b = Storage.open(tmp_path / "d", busy_timeout=0.2)
        ctx = a.transaction()
        conn = ctx.__enter__()
        conn.execute(
            "INSERT INTO datasets (dataset_id, name, created_at) VALUES ('x','x','t')"
        )
        try:
            with pytest.raises(Conflict):
                with b.transaction():
                    pass
        finally:
            ctx.__exit__(None, None, None)
        # once the lock is released the second handle works fine
        with b.transaction() as c2:
            c2.execute(
                "INSERT INTO datasets (dataset_id, name, created_at)"
                " VALUES ('y','y','t')"
            )

    def test_concurrent_counter_increments_all_land(self, tmp_path):
        Storage.initialize(tmp_path / "d")
        with Storage.open(tmp_path / "d").transaction() as conn:
            conn.execute("INSERT INTO meta (key, value) VALUES ('n', '0')")
        n_threads, per_thread = 8, 25
        errors = []

        def work():
            try:
                handle = Storage.open(tmp_path / "d")
                for _ in range(per_thread):
                    with handle.transaction() as c:
                        v = int(
                            c.execute("SELECT value FROM meta WHERE key='n'").fetchone()[0]
                        )
                        c.execute(
                            "UPDATE meta SET value = ? WHERE key = 'n'", (str(v + 1),)
                        )
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=work) for _ in range(n_threads)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        final = Storage.open(tmp_path / "d").connection().execute(
            "SELECT value FROM meta WHERE key='n'"
        ).fetchone()
        assert int(final[0]) == n_threads * per_thread


class TestSignalBlobs:
    def test_write_then_window_read(self, store):
        add_record(store, samples=np.array([1, 2, 3], dtype=np.int32))
        got = store.get_signal_window("ds/r0", 0, 1, 3)
        np.testing.assert_array_equal(got.samples, [2, 3])

    def test_full_range_identity(self, store):
        rng = np.random.default_rng(1)
        samples = rng.integers(-(2**31), 2**31, 5000, dtype=np.int64).astype(np.int32)
        add_record(store, samples=samples)
        got = store.get_signal_window("ds/r0", 0, 0, 5000)
        np.testing.assert_array_equal(got.samples, samples)

    def test_read_past_end_rejected(self, store):
        add_record(store, n=100)
        with pytest.raises(RangeOutOfBounds):
            store.get_signal_window("ds/r0", 0, 0, 101)
        with pytest.raises(RangeOutOfBounds):
            store.get_signal_window("ds/r0", 0, -1, 10)
        with pytest.raises(RangeOutOfBounds):
            store.get_signal_window("ds/r0", 0, 50, 10)

    def test_empty_window_allowed(self, store):
        add_record(store, n=100)
        got = store.get_signal_window("ds/r0", 0, 40, 40)
        assert got.samples.size == 0

    def test_unknown_record_and_lead(self, store):
        add_record(store, n=10)
        with pytest.raises(UnknownRecord):
            store.get_signal_window("ds/nope", 0, 0, 1)
        with pytest.raises(UnknownRecord):
            store.get_signal_window("ds/r0", 7, 0, 1)
        with pytest.raises(UnknownRecord):
            store.get_signal_window("ds/r0", "V9", 0, 1)

    def test_lead_lookup_by_name(self, store):
        add_record(store, samples=np.array([5, 6, 7], dtype=np.int32))
        got = store.get_signal_window("ds/r0", "II", 0, 3)
        assert got.lead_name == "II"
        np.testing.assert_array_equal(got.samples, [5, 6, 7])

    def test_physical_calibration(self, store):
        add_record(
            store, samples=np.array([1024, 1224], dtype=np.int32), gain=200.0,
            baseline=1024,
        )
        got = store.get_signal_window("ds/r0", 0, 0, 2)
        np.testing.assert_allclose(got.physical(), [0.0, 1.0])

    def test_window_read_is_o_window_not_o_record(self, store):
        n = 1_000_000
        add_record(store, samples=np.zeros(n, dtype=np.int32))
        before = store.blobs.bytes_read
        store.get_signal_window("ds/r0", 0, 500_000, 500_250)
        assert store.blobs.bytes_read - before == 250 * 4

    def test_multiple_leads_are_independent_runs(self, store):
        a = np.arange(100, dtype=np.int32)
        b = np.arange(100, 200, dtype=np.int32)
        with store.transaction() as conn:
            conn.execute(
                "INSERT INTO datasets (dataset_id, name, created_at)"
                " VALUES ('ds', 'ds', 't')"
            )
            conn.execute(
                "INSERT INTO records (record_id, dataset_id, name, position,"
                " sampling_frequency, n_samples, duration)"
                " VALUES ('ds/r0', 'ds', 'r0', 0, 250.0, 100, 0.4)"
            )
            store.put_signal(conn, "ds/r0", 0, "I", 200.0, 0, a)
            store.put_signal(conn, "ds/r0", 1, "II", 200.0, 0, b)
        np.testing.assert_array_equal(
            store.get_signal_window("ds/r0", 0, 10, 20).samples, a[10:20]
        )
        np.testing.assert_array_equal(
            store.get_signal_window("ds/r0", 1, 10, 20).samples, b[10:20]
        )

    @settings(max_examples=30, deadline=None)
    @given(
        samples=st.lists(
            st.integers(-(2**31), 2**31 - 1), min_size=1, max_size=500
        ),
        data=st.data(),
    )
    def test_window_subarray_property(self, tmp_path_factory, samples, data):
        arr = np.asarray(samples, dtype=np.int32)
        store = Storage.initialize(tmp_path_factory.mktemp("blob") / "d")
        add_record(store, samples=arr)
        start = data.draw(st.integers(0, arr.size))
        end = data.draw(st.integers(start, arr.size))
        got = store.get_signal_window("ds/r0", 0, start, end)
        np.testing.assert_array_equal(got.samples, arr[start:end])
        store.close()


class TestCrashDurability:
    def test_kill9_never_leaves_partial_transactions(self, tmp_path):
        data_dir = tmp_path / "d"
        Storage.initialize(data_dir).close()
        env = dict(os.environ)
        env["PYTHONPATH"] = os.pathsep.join(
            [str(TESTS_DIR), str(TESTS_DIR.parent / "src"), env.get("PYTHONPATH", "")]
        )
        for round_no in range(4):
            proc = subprocess.Popen(
                [sys.executable, str(TESTS_DIR / "crash_driver.py"), str(data_dir)],
                env=env,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.PIPE,
            )
            time.sleep(0.25 + 0.1 * round_no)
            proc.send_signal(signal.SIGKILL)
            proc.wait()
            store = Storage.open(data_dir)
            conn = store.connection()
            names = [
                r[0]
                for r in conn.execute("SELECT name FROM datasets ORDER BY name").fetchall()
            ]
            assert sorted(names) == sorted(f"d{i}" for i in range(len(names)))
            for (ds_id, n_labels) in conn.execute(
                "SELECT dataset_id, COUNT(*) FROM dataset_labels GROUP BY dataset_id"
            ).fetchall():
                assert n_labels == 3, f"{ds_id} committed partially"
            counts = conn.execute(
                "SELECT (SELECT COUNT(*) FROM datasets),"
                " (SELECT COUNT(*) FROM dataset_labels)"
            ).fetchone()
            assert counts[1] == 3 * counts[0]
            assert counts[0] > 0, "driver never committed anything"
            store.close()
