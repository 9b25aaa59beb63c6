"""Dataset creation and record ingestion into storage.

Records are analyzed once at ingest time (beat detection, rhythm
features, suggestions) and the result is cached on the record row, so
the annotation UI never waits on signal processing.
"""
from __future__ import annotations

import json
import re
import secrets
from dataclasses import dataclass, field
from pathlib import Path

from . import wfdb
from .analysis import analyze_record
from .errors import Conflict, DuplicateRecordName, EcgAnnoError, UnknownDataset
from .storage import Storage

DEFAULT_VOCABULARY = (
    ("NORM", "normal"),
    ("AF", "atrial fibrillation"),
    ("ER", "early repolarization"),
    ("TWC", "T wave change"),
)

_CODE_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class IngestEntry:
    record_name: str
    ok: bool
    reason: str = ""


@dataclass
class IngestReport:
    dataset_id: str
    dataset_name: str
    entries: list[IngestEntry] = field(default_factory=list)

    @property
    def n_ok(self) -> int:
        return sum(1 for e in self.entries if e.ok)

    @property
    def n_skipped(self) -> int:
        return sum(1 for e in self.entries if not e.ok)


def create_dataset(storage: Storage, name: str, vocabulary=None) -> str:
    """Create an empty dataset with its label vocabulary; names and
    vocabulary codes must be unique.
    """
    if not name or not name.strip():
        raise ValueError("dataset name must be non-empty")
    vocab = list(vocabulary) if vocabulary is not None else list(DEFAULT_VOCABULARY)
    seen = set()
    for code, display in vocab:
        if not _CODE_RE.match(code):
            raise ValueError(f"label code {code!r} must match {_CODE_RE.pattern}")
        if code in seen:
            raise ValueError(f"label code {code!r} appears twice")
        if not display or not display.strip():
            raise ValueError(f"label {code!r} needs display text")
        seen.add(code)
    dataset_id = f"d_{secrets.token_hex(12)}"
    with storage.transaction() as conn:
        exists = conn.execute(
            "SELECT 1 FROM datasets WHERE name = ?", (name,)
        ).fetchone()
        if exists:
            raise Conflict(f"dataset {name!r} already exists")
        conn.execute(
            "INSERT INTO datasets (dataset_id, name, created_at)"
            " VALUES (?, ?, strftime('%Y-%m-%dT%H:%M:%f+00:00', 'now'))",
            (dataset_id, name),
        )
        for position, (code, display) in enumerate(vocab):
            conn.execute(
                "INSERT INTO dataset_labels (dataset_id, code, display_text, position)"
                " VALUES (?, ?, ?, ?)",
                (dataset_id, code, display, position),
            )
    return dataset_id


def add_record(storage: Storage, dataset_id: str, record: wfdb.EcgRecord) -> int:
    """Persist one decoded record (samples to the blob store, metadata
    and cached analysis to the database); returns its position.
    """
    analysis = analyze_record(record)
    with storage.transaction() as conn:
        ds = conn.execute(
            "SELECT dataset_id FROM datasets WHERE dataset_id = ?", (dataset_id,)
        ).fetchone()
        if ds is None:
            raise UnknownDataset(f"no dataset {dataset_id!r}")
        dup = conn.execute(
            "SELECT 1 FROM records WHERE dataset_id = ? AND name = ?",
            (dataset_id, record.name),
        ).fetchone()
        if dup:
            raise DuplicateRecordName(
                f"record {record.name!r} already in dataset"
            )
        position = conn.execute(
            "SELECT COUNT(*) FROM records WHERE dataset_id = ?", (dataset_id,)
        ).fetchone()[0]
        conn.execute(
            "INSERT INTO records (record_id, dataset_id, name, position,"
            " sampling_frequency, n_samples, duration, analysis_json)"
            " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
            (
                record.record_id,
                dataset_id,
                record.name,
                position,
                record.sampling_frequency,
                record.n_samples,
                record.duration,
                json.dumps(analysis.to_json()),
            ),
        )
        for idx, lead in enumerate(record.leads):
            storage.put_signal(
                conn,
                record.record_id,
                idx,
                lead.lead_name,
                lead.adc_gain,
                lead.baseline,
                lead.samples,
            )
    return int(position)


def _skip_reason(exc: Exception) -> str:
    # CamelCase error class -> "camel case" prose for the report line
    name = re.sub(r"(?<!^)(?=[A-Z])", " ", type(exc).__name__).lower()
    return name


def ingest_directory(
    storage: Storage,
    dataset_name: str,
    path,
    vocabulary=None,
) -> IngestReport:
    """Walk a directory for .hea headers and ingest every parseable
    record into a new dataset. Failures skip that record and are
    reported; the dataset keeps whatever ingested cleanly.
    """
    path = Path(path)
    headers = sorted(path.glob("*.hea"))
    dataset_id = create_dataset(storage, dataset_name, vocabulary)
    report = IngestReport(dataset_id=dataset_id, dataset_name=dataset_name)
    for hea_path in headers:
        record_name = hea_path.stem
        try:
            header_text = hea_path.read_text()
            parsed = wfdb.parse_header(header_text)
            signal_files = {}
            for spec in parsed.signal_specs:
                if spec.file_name not in signal_files:
                    signal_files[spec.file_name] = (path / spec.file_name).read_bytes()
            record = wfdb.ingest_record(header_text, signal_files, dataset_name)
            add_record(storage, dataset_id, record)
        except FileNotFoundError as exc:
            report.entries.append(
                IngestEntry(record_name, False, f"missing signal file {exc.filename}")
            )
        except (EcgAnnoError, OSError, ValueError) as exc:
            report.entries.append(IngestEntry(record_name, False, _skip_reason(exc)))
        else:
            report.entries.append(IngestEntry(record_name, True))
    return report
