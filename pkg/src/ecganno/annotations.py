"""The annotation campaign state machine.

Datasets hold an ordered list of records plus a label vocabulary and a
member/expert roster. Every annotator keeps at most one live ("head")
annotation per record; edits append a new revision and mark the old
head superseded, so full history survives. Expert reviewers approve
heads or override them with a reviewer-attributed head. A per-user
cursor makes re-entry land on the next unfinished record.

All mutations run inside a single storage transaction; revision
numbers are assigned under the write lock, so they stay dense per
(record, annotator) even under concurrent submissions.
"""
from __future__ import annotations

import csv
import io
import json
import secrets
from dataclasses import dataclass
from datetime import datetime, timezone

from .errors import (
    AtBoundary,
    EmptyConfirmed,
    MissingOverrideLabels,
    NotAMember,
    NotAnExpert,
    NotOwnerNorExpert,
    RevisionConflict,
    StaleAnnotation,
    UnknownAnnotation,
    UnknownDataset,
    UnknownLabelCode,
    UnknownRecord,
    UnknownUser,
)
from .storage import Storage

STATUS_CONFIRMED = "confirmed"
STATUS_UNSURE = "unsure"
STATUSES = (STATUS_CONFIRMED, STATUS_UNSURE)

ACTION_APPROVE = "approve"
ACTION_OVERRIDE = "override"

EXPORT_HEADER = ["record", "labels", "status", "annotator", "reviewer"]


@dataclass(frozen=True)
class Annotation:
    annotation_id: str
    record_id: str
    annotator_id: str
    annotator_username: str
    labels: tuple[str, ...]
    comment: str
    status: str
    revision: int
    created_at: str
    updated_at: str
    superseded_by: str | None
    derived_from: str | None

    def to_json(self) -> dict:
        return {
            "annotation_id": self.annotation_id,
            "record_id": self.record_id,
            "annotator_id": self.annotator_id,
            "annotator_username": self.annotator_username,
            "labels": list(self.labels),
            "comment": self.comment,
            "status": self.status,
            "revision": self.revision,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "superseded_by": self.superseded_by,
            "derived_from": self.derived_from,
        }


@dataclass(frozen=True)
class ReviewDecision:
    review_id: str
    reviewer_id: str
    target_annotation_id: str
    action: str
    override_labels: tuple[str, ...] | None
    created_annotation_id: str | None
    decided_at: str

    def to_json(self) -> dict:
        return {
            "review_id": self.review_id,
            "reviewer_id": self.reviewer_id,
            "target_annotation_id": self.target_annotation_id,
            "action": self.action,
            "override_labels": None
            if self.override_labels is None
            else list(self.override_labels),
            "created_annotation_id": self.created_annotation_id,
            "decided_at": self.decided_at,
        }


@dataclass(frozen=True)
class ResumePoint:
    record_id: str | None
    position: int
    total: int
    annotated_count: int
    complete: bool


@dataclass(frozen=True)
class DatasetInfo:
    dataset_id: str
    name: str
    total: int
    annotated_count: int
    is_expert: bool
    labels: tuple[tuple[str, str], ...]  # (code, display_text) in seed order


@dataclass(frozen=True)
class RecordInfo:
    record_id: str
    dataset_id: str
    name: str
    position: int
    total: int
    sampling_frequency: float
    n_samples: int
    duration: float
    lead_names: tuple[str, ...]


@dataclass(frozen=True)
class RecordEntry:
    record_id: str
    record_name: str
    position: int
    annotation: Annotation


@dataclass(frozen=True)
class ReviewEntry:
    record_id: str
    record_name: str
    position: int
    heads: tuple[Annotation, ...]


@dataclass(frozen=True)
class ExportRow:
    record_name: str
    labels: tuple[str, ...]
    status: str
    annotator: str
    reviewer: str


def _now_iso(now: datetime | None) -> str:
    return (now if now is not None else datetime.now(timezone.utc)).isoformat()


def _new_id(prefix: str) -> str:
    return f"{prefix}_{secrets.token_hex(12)}"


def _dataset(conn, dataset_id):
    row = conn.execute(
        "SELECT * FROM datasets WHERE dataset_id = ?", (dataset_id,)
    ).fetchone()
    if row is None:
        raise UnknownDataset(f"no dataset {dataset_id!r}")
    return row


def _membership(conn, dataset_id, user_id):
    return conn.execute(
        "SELECT is_expert FROM dataset_members WHERE dataset_id = ? AND user_id = ?",
        (dataset_id, user_id),
    ).fetchone()


def _require_member(conn, dataset_id, user_id):
    row = _membership(conn, dataset_id, user_id)
    if row is None:
        raise NotAMember(f"user is not a member of dataset {dataset_id!r}")
    return row


def _require_expert(conn, dataset_id, user_id):
    row = _membership(conn, dataset_id, user_id)
    if row is None or not row["is_expert"]:
        raise NotAnExpert(f"user is not an expert of dataset {dataset_id!r}")


def _record(conn, record_id):
    row = conn.execute(
        "SELECT * FROM records WHERE record_id = ?", (record_id,)
    ).fetchone()
    if row is None:
        raise UnknownRecord(f"no record {record_id!r}")
    return row


def _vocabulary(conn, dataset_id) -> dict[str, int]:
    rows = conn.execute(
        "SELECT code, position FROM dataset_labels WHERE dataset_id = ?",
        (dataset_id,),
    ).fetchall()
    return {r["code"]: r["position"] for r in rows}


def _normalize_labels(conn, dataset_id, labels) -> tuple[str, ...]:
    vocab = _vocabulary(conn, dataset_id)
    seen = set()
    for code in labels:
        if code not in vocab:
            raise UnknownLabelCode(f"label code {code!r} not in dataset vocabulary")
        seen.add(code)
    return tuple(sorted(seen, key=vocab.__getitem__))


def _check_submission(labels: tuple[str, ...], comment: str, status: str) -> None:
    if status not in STATUSES:
        raise ValueError(f"status must be one of {STATUSES}")
    if status == STATUS_CONFIRMED and not labels and not comment.strip():
        raise EmptyConfirmed("a confirmed annotation needs labels or a comment")


def _row_to_annotation(row) -> Annotation:
    labels = tuple(row["labels"].split("|")) if row["labels"] else ()
    return Annotation(
        annotation_id=row["annotation_id"],
        record_id=row["record_id"],
        annotator_id=row["annotator_id"],
        annotator_username=row["username"],
        labels=labels,
        comment=row["comment"],
        status=row["status"],
        revision=row["revision"],
        created_at=row["created_at"],
        updated_at=row["updated_at"],
        superseded_by=row["superseded_by"],
        derived_from=row["derived_from"],
    )


_ANNOTATION_SELECT = (
    "SELECT a.*, u.username FROM annotations a"
    " JOIN users u ON u.user_id = a.annotator_id"
)


def _head_of(conn, record_id, annotator_id):
    return conn.execute(
        f"{_ANNOTATION_SELECT} WHERE a.record_id = ? AND a.annotator_id = ?"
        " AND a.superseded_by IS NULL",
        (record_id, annotator_id),
    ).fetchone()


def _next_revision(conn, record_id, annotator_id) -> int:
    row = conn.execute(
        "SELECT COALESCE(MAX(revision), 0) FROM annotations"
        " WHERE record_id = ? AND annotator_id = ?",
        (record_id, annotator_id),
    ).fetchone()
    return int(row[0]) + 1


def _insert_annotation(
    conn,
    *,
    record_id: str,
    annotator_id: str,
    labels: tuple[str, ...],
    comment: str,
    status: str,
    derived_from_row,
    now: datetime | None,
) -> str:
    """Write a new head row and supersede whatever it replaces: the row
    it derives from, plus the annotator's own current head if that is a
    different row (one live annotation per annotator per record).
    """
    new_id = _new_id("a")
    stamp = _now_iso(now)
    created = derived_from_row["created_at"] if derived_from_row is not None else stamp
    revision = _next_revision(conn, record_id, annotator_id)
    own_head = _head_of(conn, record_id, annotator_id)
    # supersede before inserting so the one-head-per-pair index never
    # sees two live rows; the forward reference resolves at commit
    to_supersede = set()
    if derived_from_row is not None:
        to_supersede.add(derived_from_row["annotation_id"])
    if own_head is not None:
        to_supersede.add(own_head["annotation_id"])
    for ann_id in to_supersede:
        conn.execute(
            "UPDATE annotations SET superseded_by = ? WHERE annotation_id = ?"
            " AND superseded_by IS NULL",
            (new_id, ann_id),
        )
    conn.execute(
        "INSERT INTO annotations (annotation_id, record_id, annotator_id, labels,"
        " comment, status, revision, created_at, updated_at, superseded_by,"
        " derived_from) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, NULL, ?)",
        (
            new_id,
            record_id,
            annotator_id,
            "|".join(labels),
            comment,
            status,
            revision,
            created,
            stamp,
            derived_from_row["annotation_id"] if derived_from_row is not None else None,
        ),
    )
    return new_id


def _fetch_annotation(conn, annotation_id) -> Annotation:
    row = conn.execute(
        f"{_ANNOTATION_SELECT} WHERE a.annotation_id = ?", (annotation_id,)
    ).fetchone()
    if row is None:
        raise UnknownAnnotation(f"no annotation {annotation_id!r}")
    return _row_to_annotation(row)


def _first_unannotated_at_or_after(conn, dataset_id, user_id, position):
    return conn.execute(
        "SELECT record_id, position FROM records r"
        " WHERE r.dataset_id = ? AND r.position >= ?"
        " AND NOT EXISTS (SELECT 1 FROM annotations a WHERE a.record_id = r.record_id"
        "   AND a.annotator_id = ? AND a.superseded_by IS NULL)"
        " ORDER BY r.position LIMIT 1",
        (dataset_id, position, user_id),
    ).fetchone()


def _next_unannotated(conn, dataset_id, user_id, position):
    """Forward scan from position, wrapping once to the start, so the
    result is None exactly when the user has annotated every record.
    """
    row = _first_unannotated_at_or_after(conn, dataset_id, user_id, position)
    if row is None and position > 0:
        row = _first_unannotated_at_or_after(conn, dataset_id, user_id, 0)
    return row


def _progress(conn, dataset_id, user_id) -> tuple[int, int]:
    total = conn.execute(
        "SELECT COUNT(*) FROM records WHERE dataset_id = ?", (dataset_id,)
    ).fetchone()[0]
    annotated = conn.execute(
        "SELECT COUNT(*) FROM annotations a JOIN records r ON r.record_id = a.record_id"
        " WHERE r.dataset_id = ? AND a.annotator_id = ? AND a.superseded_by IS NULL",
        (dataset_id, user_id),
    ).fetchone()[0]
    return int(total), int(annotated)


# --- dataset roster ---

def grant_member(
    storage: Storage, dataset_id: str, user_id: str, *, expert: bool = False
) -> None:
    """Add a user to a dataset (idempotent); expert=True also grants
    review rights. Expert rights are never silently revoked here.
    """
    with storage.transaction() as conn:
        _dataset(conn, dataset_id)
        user = conn.execute(
            "SELECT 1 FROM users WHERE user_id = ?", (user_id,)
        ).fetchone()
        if user is None:
            raise UnknownUser(f"no user {user_id!r}")
        conn.execute(
            "INSERT INTO dataset_members (dataset_id, user_id, is_expert)"
            " VALUES (?, ?, ?) ON CONFLICT (dataset_id, user_id)"
            " DO UPDATE SET is_expert = MAX(is_expert, excluded.is_expert)",
            (dataset_id, user_id, 1 if expert else 0),
        )


def datasets_for_user(storage: Storage, user_id: str) -> list[DatasetInfo]:
    conn = storage.connection()
    rows = conn.execute(
        "SELECT d.dataset_id, d.name, m.is_expert FROM datasets d"
        " JOIN dataset_members m ON m.dataset_id = d.dataset_id"
        " WHERE m.user_id = ? ORDER BY d.name",
        (user_id,),
    ).fetchall()
    out = []
    for row in rows:
        total, annotated = _progress(conn, row["dataset_id"], user_id)
        labels = conn.execute(
            "SELECT code, display_text FROM dataset_labels WHERE dataset_id = ?"
            " ORDER BY position",
            (row["dataset_id"],),
        ).fetchall()
        out.append(
            DatasetInfo(
                dataset_id=row["dataset_id"],
                name=row["name"],
                total=total,
                annotated_count=annotated,
                is_expert=bool(row["is_expert"]),
                labels=tuple((l["code"], l["display_text"]) for l in labels),
            )
        )
    return out


def record_info(storage: Storage, user_id: str, record_id: str) -> RecordInfo:
    conn = storage.connection()
    rec = _record(conn, record_id)
    _require_member(conn, rec["dataset_id"], user_id)
    leads = conn.execute(
        "SELECT lead_name FROM record_leads WHERE record_id = ? ORDER BY lead_index",
        (record_id,),
    ).fetchall()
    total = conn.execute(
        "SELECT COUNT(*) FROM records WHERE dataset_id = ?", (rec["dataset_id"],)
    ).fetchone()[0]
    return RecordInfo(
        record_id=rec["record_id"],
        dataset_id=rec["dataset_id"],
        name=rec["name"],
        position=rec["position"],
        total=int(total),
        sampling_frequency=rec["sampling_frequency"],
        n_samples=rec["n_samples"],
        duration=rec["duration"],
        lead_names=tuple(r["lead_name"] for r in leads),
    )


def record_analysis(storage: Storage, user_id: str, record_id: str) -> dict:
    """Beat detection and rhythm suggestions cached at ingest time."""
    conn = storage.connection()
    rec = _record(conn, record_id)
    _require_member(conn, rec["dataset_id"], user_id)
    if rec["analysis_json"] is None:
        return {"record_id": record_id}
    return json.loads(rec["analysis_json"])


def assert_expert(storage: Storage, user_id: str, dataset_id: str) -> None:
    conn = storage.connection()
    _dataset(conn, dataset_id)
    _require_expert(conn, dataset_id, user_id)


def my_head(storage: Storage, user_id: str, record_id: str) -> Annotation | None:
    """The caller's live annotation on a record, if any."""
    conn = storage.connection()
    rec = _record(conn, record_id)
    _require_member(conn, rec["dataset_id"], user_id)
    row = _head_of(conn, record_id, user_id)
    return _row_to_annotation(row) if row is not None else None


# --- workflow operations ---

def open_dataset(storage: Storage, user_id: str, dataset_id: str) -> ResumePoint:
    """Resume point: the first record at or after the cursor that the
    caller has not head-annotated, wrapping once to catch records that
    were skipped; complete only when every record carries a head by the
    caller.
    """
    conn = storage.connection()
    _dataset(conn, dataset_id)
    _require_member(conn, dataset_id, user_id)
    total, annotated = _progress(conn, dataset_id, user_id)
    cur = conn.execute(
        "SELECT last_position FROM cursors WHERE user_id = ? AND dataset_id = ?",
        (user_id, dataset_id),
    ).fetchone()
    start = cur["last_position"] if cur is not None and cur["last_position"] is not None else 0
    row = _next_unannotated(conn, dataset_id, user_id, start)
    if row is None:
        return ResumePoint(None, total, total, annotated, True)
    return ResumePoint(row["record_id"], row["position"], total, annotated, False)


def submit_annotation(
    storage: Storage,
    user_id: str,
    record_id: str,
    labels,
    comment: str,
    status: str,
    *,
    now: datetime | None = None,
) -> tuple[Annotation, str | None]:
    """Create or revise the caller's annotation on a record, advance the
    cursor, and return the auto-advance target (None = dataset complete).
    """
    with storage.transaction() as conn:
        rec = _record(conn, record_id)
        dataset_id = rec["dataset_id"]
        _require_member(conn, dataset_id, user_id)
        normalized = _normalize_labels(conn, dataset_id, labels)
        _check_submission(normalized, comment, status)
        head = _head_of(conn, record_id, user_id)
        new_id = _insert_annotation(
            conn,
            record_id=record_id,
            annotator_id=user_id,
            labels=normalized,
            comment=comment,
            status=status,
            derived_from_row=head,
            now=now,
        )
        conn.execute(
            "INSERT INTO cursors (user_id, dataset_id, last_position) VALUES (?, ?, ?)"
            " ON CONFLICT (user_id, dataset_id) DO UPDATE SET"
            " last_position = MAX(COALESCE(cursors.last_position, -1),"
            " excluded.last_position)",
            (user_id, dataset_id, rec["position"]),
        )
        nxt = _next_unannotated(conn, dataset_id, user_id, rec["position"] + 1)
        annotation = _fetch_annotation(conn, new_id)
    return annotation, (nxt["record_id"] if nxt is not None else None)


def navigate(
    storage: Storage,
    user_id: str,
    dataset_id: str,
    current_position: int,
    direction: str,
) -> tuple[str, int]:
    """Pure browsing: step to the adjacent record without touching the
    cursor or any annotation.
    """
    if direction not in ("next", "previous"):
        raise ValueError("direction must be 'next' or 'previous'")
    conn = storage.connection()
    _dataset(conn, dataset_id)
    _require_member(conn, dataset_id, user_id)
    target = current_position + (1 if direction == "next" else -1)
    if target < 0:
        raise AtBoundary("already at the first record")
    row = conn.execute(
        "SELECT record_id FROM records WHERE dataset_id = ? AND position = ?",
        (dataset_id, target),
    ).fetchone()
    if row is None:
        raise AtBoundary("already at the last record")
    return row["record_id"], target


def list_my_annotations(
    storage: Storage, user_id: str, dataset_id: str
) -> list[RecordEntry]:
    conn = storage.connection()
    _dataset(conn, dataset_id)
    _require_member(conn, dataset_id, user_id)
    rows = conn.execute(
        f"{_ANNOTATION_SELECT} JOIN records r ON r.record_id = a.record_id"
        " WHERE r.dataset_id = ? AND a.annotator_id = ? AND a.superseded_by IS NULL"
        " ORDER BY r.position",
        (dataset_id, user_id),
    ).fetchall()
    return [_record_entry(conn, row) for row in rows]


def _record_entry(conn, row) -> RecordEntry:
    rec = _record(conn, row["record_id"])
    return RecordEntry(
        record_id=rec["record_id"],
        record_name=rec["name"],
        position=rec["position"],
        annotation=_row_to_annotation(row),
    )


def revise_annotation(
    storage: Storage,
    user_id: str,
    annotation_id: str,
    labels,
    comment: str,
    status: str,
    *,
    expected_revision: int | None = None,
    now: datetime | None = None,
) -> Annotation:
    """Replace a head annotation with a new revision attributed to the
    caller (owner or a dataset expert). The superseded row stays in
    history; expected_revision guards against replayed or racing edits.
    """
    with storage.transaction() as conn:
        row = conn.execute(
            f"{_ANNOTATION_SELECT} WHERE a.annotation_id = ?", (annotation_id,)
        ).fetchone()
        if row is None:
            raise UnknownAnnotation(f"no annotation {annotation_id!r}")
        rec = _record(conn, row["record_id"])
        dataset_id = rec["dataset_id"]
        if row["annotator_id"] != user_id:
            membership = _membership(conn, dataset_id, user_id)
            if membership is None or not membership["is_expert"]:
                raise NotOwnerNorExpert(
                    "only the annotation's owner or a dataset expert may revise it"
                )
        if row["superseded_by"] is not None:
            raise StaleAnnotation("annotation already superseded by a newer revision")
        if expected_revision is not None and row["revision"] != expected_revision:
            raise RevisionConflict(
                f"annotation is at revision {row['revision']},"
                f" caller expected {expected_revision}"
            )
        normalized = _normalize_labels(conn, dataset_id, labels)
        _check_submission(normalized, comment, status)
        new_id = _insert_annotation(
            conn,
            record_id=row["record_id"],
            annotator_id=user_id,
            labels=normalized,
            comment=comment,
            status=status,
            derived_from_row=row,
            now=now,
        )
        return _fetch_annotation(conn, new_id)


def list_unsure(storage: Storage, user_id: str, dataset_id: str) -> list[RecordEntry]:
    """All members' unsure heads, visible to every member."""
    conn = storage.connection()
    _dataset(conn, dataset_id)
    _require_member(conn, dataset_id, user_id)
    rows = conn.execute(
        f"{_ANNOTATION_SELECT} JOIN records r ON r.record_id = a.record_id"
        " WHERE r.dataset_id = ? AND a.superseded_by IS NULL AND a.status = ?"
        " ORDER BY r.position, u.username",
        (dataset_id, STATUS_UNSURE),
    ).fetchall()
    return [_record_entry(conn, row) for row in rows]


def expert_review(
    storage: Storage, reviewer_id: str, dataset_id: str
) -> list[ReviewEntry]:
    """Every record with its current head annotations, for the review
    queue; experts only.
    """
    conn = storage.connection()
    _dataset(conn, dataset_id)
    _require_expert(conn, dataset_id, reviewer_id)
    records = conn.execute(
        "SELECT record_id, name, position FROM records WHERE dataset_id = ?"
        " ORDER BY position",
        (dataset_id,),
    ).fetchall()
    out = []
    for rec in records:
        heads = conn.execute(
            f"{_ANNOTATION_SELECT} WHERE a.record_id = ? AND a.superseded_by IS NULL"
            " ORDER BY u.username",
            (rec["record_id"],),
        ).fetchall()
        out.append(
            ReviewEntry(
                record_id=rec["record_id"],
                record_name=rec["name"],
                position=rec["position"],
                heads=tuple(_row_to_annotation(h) for h in heads),
            )
        )
    return out


def expert_decide(
    storage: Storage,
    reviewer_id: str,
    annotation_id: str,
    action: str,
    override_labels=None,
    *,
    now: datetime | None = None,
) -> tuple[ReviewDecision, Annotation | None]:
    """Approve a head as-is, or override it with reviewer-supplied labels
    (which creates a reviewer-attributed head). Returns the decision and
    the override head, if one was created.
    """
    if action not in (ACTION_APPROVE, ACTION_OVERRIDE):
        raise ValueError(f"action must be {ACTION_APPROVE!r} or {ACTION_OVERRIDE!r}")
    with storage.transaction() as conn:
        row = conn.execute(
            f"{_ANNOTATION_SELECT} WHERE a.annotation_id = ?", (annotation_id,)
        ).fetchone()
        if row is None:
            raise UnknownAnnotation(f"no annotation {annotation_id!r}")
        rec = _record(conn, row["record_id"])
        _require_expert(conn, rec["dataset_id"], reviewer_id)
        if row["superseded_by"] is not None:
            raise StaleAnnotation("annotation already superseded; review the new head")
        decided = _now_iso(now)
        review_id = _new_id("v")
        created_annotation = None
        labels_field = None
        if action == ACTION_OVERRIDE:
            if not override_labels:
                raise MissingOverrideLabels("override requires replacement labels")
            normalized = _normalize_labels(conn, rec["dataset_id"], override_labels)
            new_id = _insert_annotation(
                conn,
                record_id=row["record_id"],
                annotator_id=reviewer_id,
                labels=normalized,
                comment="",
                status=STATUS_CONFIRMED,
                derived_from_row=row,
                now=now,
            )
            created_annotation = _fetch_annotation(conn, new_id)
            labels_field = "|".join(normalized)
        conn.execute(
            "INSERT INTO reviews (review_id, reviewer_id, target_annotation_id,"
            " action, override_labels, created_annotation_id, decided_at)"
            " VALUES (?, ?, ?, ?, ?, ?, ?)",
            (
                review_id,
                reviewer_id,
                annotation_id,
                action,
                labels_field,
                created_annotation.annotation_id if created_annotation else None,
                decided,
            ),
        )
        decision = ReviewDecision(
            review_id=review_id,
            reviewer_id=reviewer_id,
            target_annotation_id=annotation_id,
            action=action,
            override_labels=created_annotation.labels if created_annotation else None,
            created_annotation_id=(
                created_annotation.annotation_id if created_annotation else None
            ),
            decided_at=decided,
        )
    return decision, created_annotation


# --- export ---

def _chain_root_annotator(conn, row) -> str:
    """Username of the annotator at the start of a supersession chain."""
    current = row
    while current["derived_from"] is not None:
        current = conn.execute(
            "SELECT a.annotation_id, a.annotator_id, a.derived_from, u.username"
            " FROM annotations a JOIN users u ON u.user_id = a.annotator_id"
            " WHERE a.annotation_id = ?",
            (current["derived_from"],),
        ).fetchone()
    return current["username"]


def export_final_labels(storage: Storage, dataset_id: str) -> list[ExportRow]:
    """One row per record. The final head is the most recent review
    decision whose outcome still stands (an override's new head, or an
    approved head); with no usable decision, the most recently updated
    head wins. Records nobody annotated export as 'unannotated'.
    """
    conn = storage.connection()
    _dataset(conn, dataset_id)
    records = conn.execute(
        "SELECT record_id, name FROM records WHERE dataset_id = ? ORDER BY position",
        (dataset_id,),
    ).fetchall()
    out = []
    for rec in records:
        heads = conn.execute(
            f"{_ANNOTATION_SELECT} WHERE a.record_id = ? AND a.superseded_by IS NULL"
            " ORDER BY a.updated_at DESC, a.rowid DESC",
            (rec["record_id"],),
        ).fetchall()
        if not heads:
            out.append(ExportRow(rec["name"], (), "unannotated", "", ""))
            continue
        final = None
        reviewer = ""
        decisions = conn.execute(
            "SELECT v.*, u.username AS reviewer_username FROM reviews v"
            " JOIN annotations t ON t.annotation_id = v.target_annotation_id"
            " JOIN users u ON u.user_id = v.reviewer_id"
            " WHERE t.record_id = ? ORDER BY v.decided_at DESC, v.rowid DESC",
            (rec["record_id"],),
        ).fetchall()
        for dec in decisions:
            outcome_id = (
                dec["created_annotation_id"]
                if dec["action"] == ACTION_OVERRIDE
                else dec["target_annotation_id"]
            )
            cand = conn.execute(
                f"{_ANNOTATION_SELECT} WHERE a.annotation_id = ?", (outcome_id,)
            ).fetchone()
            if cand is not None and cand["superseded_by"] is None:
                final = cand
                reviewer = dec["reviewer_username"]
                break
        if final is None:
            final = heads[0]
        annotation = _row_to_annotation(final)
        out.append(
            ExportRow(
                record_name=rec["name"],
                labels=annotation.labels,
                status=annotation.status,
                annotator=_chain_root_annotator(conn, final),
                reviewer=reviewer,
            )
        )
    return out


def render_export_csv(rows: list[ExportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPORT_HEADER)
    for row in rows:
        writer.writerow(
            [row.record_name, "|".join(row.labels), row.status, row.annotator,
             row.reviewer]
        )
    return buf.getvalue()
