"""Durable persistence: one SQLite database for aggregates plus an
append-only binary file for signal samples.

Layout under the data directory:

    ecganno.sqlite3   all aggregates (users, datasets, annotations, ...)
    signals.bin       raw ADC samples, signed 32-bit little-endian,
                      one contiguous run per (record, lead); the
                      record_leads table holds (blob_offset, n_samples)

Writers serialize through BEGIN IMMEDIATE transactions in WAL mode;
readers are never blocked. Blobs are immutable once written, so blob
reads need no locking at all.
"""
from __future__ import annotations

import os
import sqlite3
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyInitialized,
    Conflict,
    IoFailure,
    NotInitialized,
    RangeOutOfBounds,
    SchemaVersionMismatch,
    UnknownRecord,
)

SCHEMA_VERSION = 1
DB_FILENAME = "ecganno.sqlite3"
BLOB_FILENAME = "signals.bin"
BLOB_DTYPE = "<i4"
BLOB_SAMPLE_BYTES = 4
BUSY_TIMEOUT_S = 30.0

_SCHEMA = """
CREATE TABLE meta (
    key   TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE users (
    user_id         TEXT PRIMARY KEY,
    username        TEXT NOT NULL UNIQUE,
    password_digest TEXT NOT NULL,
    role            TEXT NOT NULL CHECK (role IN ('annotator','expert','admin')),
    created_at      TEXT NOT NULL
);
CREATE TABLE codes (
    code         TEXT PRIMARY KEY,
    issued_by    TEXT NOT NULL REFERENCES users(user_id),
    granted_role TEXT NOT NULL CHECK (granted_role IN ('annotator','expert')),
    consumed_by  TEXT REFERENCES users(user_id),
    issued_at    TEXT NOT NULL
);
CREATE TABLE sessions (
    token      TEXT PRIMARY KEY,
    user_id    TEXT NOT NULL REFERENCES users(user_id),
    expires_at TEXT NOT NULL
);
CREATE TABLE datasets (
    dataset_id TEXT PRIMARY KEY,
    name       TEXT NOT NULL UNIQUE,
    created_at TEXT NOT NULL
);
CREATE TABLE dataset_labels (
    dataset_id   TEXT NOT NULL REFERENCES datasets(dataset_id),
    code         TEXT NOT NULL,
    display_text TEXT NOT NULL,
    position     INTEGER NOT NULL,
    PRIMARY KEY (dataset_id, code)
);
CREATE TABLE dataset_members (
    dataset_id TEXT NOT NULL REFERENCES datasets(dataset_id),
    user_id    TEXT NOT NULL REFERENCES users(user_id),
    is_expert  INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (dataset_id, user_id)
);
CREATE TABLE records (
    record_id          TEXT PRIMARY KEY,
    dataset_id         TEXT NOT NULL REFERENCES datasets(dataset_id),
    name               TEXT NOT NULL,
    position           INTEGER NOT NULL,
    sampling_frequency REAL NOT NULL,
    n_samples          INTEGER NOT NULL,
    duration           REAL NOT NULL,
    analysis_json      TEXT,
    UNIQUE (dataset_id, name),
    UNIQUE (dataset_id, position)
);
CREATE TABLE record_leads (
    record_id   TEXT NOT NULL REFERENCES records(record_id),
    lead_index  INTEGER NOT NULL,
    lead_name   TEXT NOT NULL,
    adc_gain    REAL NOT NULL,
    baseline    INTEGER NOT NULL,
    blob_offset INTEGER NOT NULL,
    n_samples   INTEGER NOT NULL,
    PRIMARY KEY (record_id, lead_index)
);
CREATE TABLE annotations (
    annotation_id TEXT PRIMARY KEY,
    record_id     TEXT NOT NULL REFERENCES records(record_id),
    annotator_id  TEXT NOT NULL REFERENCES users(user_id),
    labels        TEXT NOT NULL,
    comment       TEXT NOT NULL DEFAULT '',
    status        TEXT NOT NULL CHECK (status IN ('confirmed','unsure')),
    revision      INTEGER NOT NULL CHECK (revision >= 1),
    created_at    TEXT NOT NULL,
    updated_at    TEXT NOT NULL,
    superseded_by TEXT REFERENCES annotations(annotation_id),
    derived_from  TEXT REFERENCES annotations(annotation_id),
    UNIQUE (record_id, annotator_id, revision)
);
CREATE UNIQUE INDEX annotations_one_head
    ON annotations (record_id, annotator_id) WHERE superseded_by IS NULL;
CREATE INDEX annotations_by_record ON annotations (record_id);
CREATE TABLE reviews (
    review_id             TEXT PRIMARY KEY,
    reviewer_id           TEXT NOT NULL REFERENCES users(user_id),
    target_annotation_id  TEXT NOT NULL REFERENCES annotations(annotation_id),
    action                TEXT NOT NULL CHECK (action IN ('approve','override')),
    override_labels       TEXT,
    created_annotation_id TEXT REFERENCES annotations(annotation_id),
    decided_at            TEXT NOT NULL
);
CREATE INDEX reviews_by_target ON reviews (target_annotation_id);
CREATE TABLE cursors (
    user_id       TEXT NOT NULL REFERENCES users(user_id),
    dataset_id    TEXT NOT NULL REFERENCES datasets(dataset_id),
    last_position INTEGER,
    PRIMARY KEY (user_id, dataset_id)
);
"""


@dataclass(frozen=True)
class LeadWindow:
    lead_name: str
    adc_gain: float
    baseline: int
    start: int
    samples: np.ndarray  # raw ADC integers, int32

    def physical(self) -> np.ndarray:
        return (self.samples.astype(np.float64) - self.baseline) / self.adc_gain


class BlobStore:
    """Append-only sample file. Offsets are stable forever, so readers
    can seek without coordination; bytes_read exists for access-pattern
    assertions in tests.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self._write_lock = threading.Lock()
        self.bytes_read = 0

    def append(self, samples) -> tuple[int, int]:
        arr = np.ascontiguousarray(np.asarray(samples), dtype=BLOB_DTYPE)
        try:
            with self._write_lock, open(self.path, "ab") as f:
                offset = f.tell()
                f.write(arr.tobytes())
                f.flush()
                os.fsync(f.fileno())
        except OSError as exc:
            raise IoFailure(f"blob append failed: {exc}") from exc
        return offset, int(arr.size)

    def read(self, offset: int, start: int, end: int) -> np.ndarray:
        """Read samples [start, end) of the run beginning at offset."""
        n = end - start
        nbytes = n * BLOB_SAMPLE_BYTES
        try:
            with open(self.path, "rb") as f:
                f.seek(offset + start * BLOB_SAMPLE_BYTES)
                data = f.read(nbytes)
        except OSError as exc:
            raise IoFailure(f"blob read failed: {exc}") from exc
        if len(data) != nbytes:
            raise IoFailure(
                f"blob truncated: wanted {nbytes} bytes at "
                f"{offset + start * BLOB_SAMPLE_BYTES}, got {len(data)}"
            )
        self.bytes_read += nbytes
        return np.frombuffer(data, dtype=BLOB_DTYPE).astype(np.int32)


class Storage:
    """Handle to one data directory. Connections are per-thread; use
    transaction() for writes and connection() for reads.
    """

    def __init__(self, data_dir: Path, busy_timeout: float = BUSY_TIMEOUT_S):
        self.data_dir = Path(data_dir)
        self.db_path = self.data_dir / DB_FILENAME
        self.blobs = BlobStore(self.data_dir / BLOB_FILENAME)
        self.busy_timeout = busy_timeout
        self._local = threading.local()

    # --- lifecycle ---

    @classmethod
    def initialize(cls, data_dir) -> "Storage":
        data_dir = Path(data_dir)
        try:
            data_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"cannot create data directory {data_dir}: {exc}") from exc
        store = cls(data_dir)
        if store.db_path.exists():
            raise AlreadyInitialized(f"{data_dir} already holds a database")
        conn = store._connect()
        with conn:
            conn.executescript(_SCHEMA)
            conn.execute(
                "INSERT INTO meta (key, value) VALUES ('schema_version', ?)",
                (str(SCHEMA_VERSION),),
            )
        store.blobs.path.touch()
        store._local.conn = conn
        return store

    @classmethod
    def open(cls, data_dir, busy_timeout: float = BUSY_TIMEOUT_S) -> "Storage":
        data_dir = Path(data_dir)
        store = cls(data_dir, busy_timeout=busy_timeout)
        if not store.db_path.exists():
            raise NotInitialized(f"{data_dir} is not an initialized data directory")
        conn = store._connect()
        row = conn.execute(
            "SELECT value FROM meta WHERE key = 'schema_version'"
        ).fetchone()
        if row is None:
            raise SchemaVersionMismatch("database has no schema version")
        if int(row[0]) != SCHEMA_VERSION:
            raise SchemaVersionMismatch(
                f"database schema v{row[0]}, this build expects v{SCHEMA_VERSION}"
            )
        store._local.conn = conn
        return store

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(
            self.db_path, timeout=self.busy_timeout, isolation_level=None
        )
        conn.row_factory = sqlite3.Row
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA synchronous=NORMAL")
        conn.execute("PRAGMA foreign_keys=ON")
        return conn

    def connection(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = self._connect()
            self._local.conn = conn
        return conn

    @contextmanager
    def transaction(self):
        """Serialized writer scope: all-or-nothing, durable on commit."""
        conn = self.connection()
        if conn.in_transaction:
            # nested scope joins the outer transaction
            yield conn
            return
        try:
            conn.execute("BEGIN IMMEDIATE")
        except sqlite3.OperationalError as exc:
            raise Conflict(f"could not acquire write transaction: {exc}") from exc
        # references are checked at commit so rows that point at each
        # other (supersession chains) can be written in either order
        conn.execute("PRAGMA defer_foreign_keys=ON")
        try:
            yield conn
        except BaseException:
            conn.rollback()
            raise
        else:
            try:
                conn.commit()
            except sqlite3.OperationalError as exc:
                conn.rollback()
                raise Conflict(f"commit failed: {exc}") from exc

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None

    # --- signal blobs ---

    def put_signal(
        self,
        conn: sqlite3.Connection,
        record_id: str,
        lead_index: int,
        lead_name: str,
        adc_gain: float,
        baseline: int,
        samples,
    ) -> None:
        """Append one lead's samples and index them. Caller supplies the
        open transaction that also inserts the records row.
        """
        offset, count = self.blobs.append(samples)
        conn.execute(
            "INSERT INTO record_leads (record_id, lead_index, lead_name,"
            " adc_gain, baseline, blob_offset, n_samples)"
            " VALUES (?, ?, ?, ?, ?, ?, ?)",
            (record_id, lead_index, lead_name, adc_gain, baseline, offset, count),
        )

    def get_signal_window(self, record_id: str, lead, start: int, end: int) -> LeadWindow:
        """Samples [start, end) of one lead; lead is an index or a name.

        Reads exactly (end - start) samples from disk regardless of the
        record's total length.
        """
        conn = self.connection()
        if isinstance(lead, int):
            row = conn.execute(
                "SELECT lead_name, adc_gain, baseline, blob_offset, n_samples"
                " FROM record_leads WHERE record_id = ? AND lead_index = ?",
                (record_id, lead),
            ).fetchone()
        else:
            row = conn.execute(
                "SELECT lead_name, adc_gain, baseline, blob_offset, n_samples"
                " FROM record_leads WHERE record_id = ? AND lead_name = ?",
                (record_id, lead),
            ).fetchone()
        if row is None:
            raise UnknownRecord(f"no lead {lead!r} for record {record_id!r}")
        if not (0 <= start <= end <= row["n_samples"]):
            raise RangeOutOfBounds(
                f"window [{start}, {end}) outside 0..{row['n_samples']}"
            )
        samples = self.blobs.read(row["blob_offset"], start, end)
        return LeadWindow(
            lead_name=row["lead_name"],
            adc_gain=row["adc_gain"],
            baseline=row["baseline"],
            start=start,
            samples=samples,
        )
