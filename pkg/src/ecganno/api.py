"""HTTP service for the annotation workflow.

Deliberately thin: each route parses inputs, calls one function from
auth/annotations/storage, and serializes the resulting dataclasses.
Domain errors carry no HTTP knowledge; a single exception handler maps
each error class to a (status, machine-readable code) pair so clients
can branch on stable codes instead of message text.

Record ids contain a slash (``<dataset>/<record>``), hence the ``:path``
converters on the record routes.
"""
from __future__ import annotations

from typing import Literal

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import annotations as anno
from . import auth
from .analysis import downsample_minmax, window_indices
from .auth import DEFAULT_SESSION_HOURS, Identity
from .errors import (
    AtBoundary,
    CodeAlreadyUsed,
    Conflict,
    EcgAnnoError,
    EmptyConfirmed,
    InvalidCode,
    InvalidCredentials,
    InvalidOrExpiredSession,
    MissingOverrideLabels,
    NotAdmin,
    NotAMember,
    NotAnExpert,
    NotOwnerNorExpert,
    RangeOutOfBounds,
    RevisionConflict,
    StaleAnnotation,
    UnknownAnnotation,
    UnknownDataset,
    UnknownLabelCode,
    UnknownLead,
    UnknownRecord,
    UnknownUser,
    UsernameTaken,
    WeakPassword,
    WindowOutOfRange,
)
from .storage import Storage

DEFAULT_SEGMENT_SECONDS = 10.0
DEFAULT_MAX_BUCKETS = 2000
MAX_BUCKETS_CAP = 10_000
DEFAULT_PAGE_LIMIT = 200
MAX_PAGE_LIMIT = 1000

# Each domain error surfaces as exactly one (status, code) pair; the
# test suite freezes this table as part of the wire contract.
ERROR_STATUS: dict[type, tuple[int, str]] = {
    InvalidCredentials: (401, "invalid_credentials"),
    InvalidOrExpiredSession: (401, "invalid_session"),
    NotAMember: (403, "not_a_member"),
    NotAnExpert: (403, "not_an_expert"),
    NotOwnerNorExpert: (403, "not_owner_nor_expert"),
    NotAdmin: (403, "not_admin"),
    UnknownDataset: (404, "unknown_dataset"),
    UnknownRecord: (404, "unknown_record"),
    UnknownAnnotation: (404, "unknown_annotation"),
    UnknownUser: (404, "unknown_user"),
    CodeAlreadyUsed: (409, "code_already_used"),
    UsernameTaken: (409, "username_taken"),
    RevisionConflict: (409, "revision_conflict"),
    StaleAnnotation: (409, "stale_annotation"),
    Conflict: (409, "conflict"),
    InvalidCode: (422, "invalid_code"),
    WeakPassword: (422, "weak_password"),
    UnknownLabelCode: (422, "unknown_label"),
    EmptyConfirmed: (422, "empty_confirmed"),
    AtBoundary: (422, "at_boundary"),
    WindowOutOfRange: (422, "bad_window"),
    RangeOutOfBounds: (422, "bad_window"),
    UnknownLead: (422, "unknown_lead"),
    MissingOverrideLabels: (422, "missing_override_labels"),
}


def _json_error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


def _classify(exc: EcgAnnoError) -> tuple[int, str]:
    for klass in type(exc).__mro__:
        if klass in ERROR_STATUS:
            return ERROR_STATUS[klass]
    return 500, "internal"


class RegisterBody(BaseModel):
    code: str
    username: str = Field(min_length=1)
    password: str


class LoginBody(BaseModel):
    username: str
    password: str


class AnnotationBody(BaseModel):
    labels: list[str] = Field(default_factory=list)
    comment: str = ""
    status: Literal["confirmed", "unsure"]


class RevisionBody(AnnotationBody):
    # required so a replayed or out-of-date PUT turns into a 409
    # instead of silently stacking another revision
    expected_revision: int


class DecisionBody(BaseModel):
    action: Literal["approve", "override"]
    override_labels: list[str] | None = None


def _annotation_json(a: anno.Annotation | None) -> dict | None:
    return a.to_json() if a is not None else None


def _entry_json(e: anno.RecordEntry) -> dict:
    return {
        "record_id": e.record_id,
        "record_name": e.record_name,
        "position": e.position,
        "annotation": e.annotation.to_json(),
    }


def _page(items: list, offset: int, limit: int) -> dict:
    return {
        "total": len(items),
        "offset": offset,
        "limit": limit,
        "entries": items[offset : offset + limit],
    }


def create_app(
    storage: Storage,
    *,
    session_hours: float = DEFAULT_SESSION_HOURS,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="ecganno")

    @app.exception_handler(EcgAnnoError)
    async def on_domain_error(_request: Request, exc: EcgAnnoError):
        status, code = _classify(exc)
        return _json_error(status, code, str(exc))

    @app.exception_handler(ValueError)
    async def on_value_error(_request: Request, exc: ValueError):
        return _json_error(422, "validation_error", str(exc))

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        message = f"{where}: {first.get('msg', 'invalid request')}"
        return _json_error(422, "validation_error", message)

    def bearer_token(request: Request) -> str:
        header = request.headers.get("authorization") or ""
        if not header.lower().startswith("bearer "):
            raise InvalidOrExpiredSession("missing bearer token")
        return header[7:].strip()

    def current_identity(request: Request) -> Identity:
        return auth.authenticate(storage, bearer_token(request))

    # --- accounts and sessions ---

    @app.post("/api/register", status_code=201)
    def register(body: RegisterBody):
        account = auth.register(storage, body.code, body.username, body.password)
        return {
            "user_id": account.user_id,
            "username": account.username,
            "role": account.role,
        }

    @app.post("/api/login")
    def login(body: LoginBody):
        session = auth.login(
            storage, body.username, body.password, lifetime_hours=session_hours
        )
        identity = auth.authenticate(storage, session.token)
        return {
            "token": session.token,
            "user_id": identity.user_id,
            "username": identity.username,
            "role": identity.role,
            "expires_at": session.expires_at,
        }

    @app.post("/api/logout", status_code=204)
    def logout(request: Request):
        auth.logout(storage, bearer_token(request))
        return Response(status_code=204)

    @app.get("/api/me")
    def me(identity: Identity = Depends(current_identity)):
        return {
            "user_id": identity.user_id,
            "username": identity.username,
            "role": identity.role,
        }

    # --- datasets and navigation ---

    @app.get("/api/datasets")
    def list_datasets(identity: Identity = Depends(current_identity)):
        infos = anno.datasets_for_user(storage, identity.user_id)
        return {
            "datasets": [
                {
                    "dataset_id": d.dataset_id,
                    "name": d.name,
                    "total": d.total,
                    "annotated_count": d.annotated_count,
                    "is_expert": d.is_expert,
                    "labels": [
                        {"code": code, "display_text": text} for code, text in d.labels
                    ],
                }
                for d in infos
            ]
        }

    @app.get("/api/datasets/{dataset_id}/resume")
    def resume(dataset_id: str, identity: Identity = Depends(current_identity)):
        point = anno.open_dataset(storage, identity.user_id, dataset_id)
        return {
            "record_id": point.record_id,
            "position": point.position,
            "total": point.total,
            "annotated_count": point.annotated_count,
            "complete": point.complete,
        }

    @app.get("/api/datasets/{dataset_id}/navigate")
    def navigate(
        dataset_id: str,
        position: int = Query(ge=0),
        direction: Literal["next", "previous"] = Query(),
        identity: Identity = Depends(current_identity),
    ):
        record_id, new_position = anno.navigate(
            storage, identity.user_id, dataset_id, position, direction
        )
        return {"record_id": record_id, "position": new_position}

    @app.get("/api/datasets/{dataset_id}/unsure")
    def unsure(
        dataset_id: str,
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=DEFAULT_PAGE_LIMIT, ge=1, le=MAX_PAGE_LIMIT),
        identity: Identity = Depends(current_identity),
    ):
        entries = anno.list_unsure(storage, identity.user_id, dataset_id)
        return _page([_entry_json(e) for e in entries], offset, limit)

    @app.get("/api/datasets/{dataset_id}/review")
    def review(
        dataset_id: str,
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=DEFAULT_PAGE_LIMIT, ge=1, le=MAX_PAGE_LIMIT),
        identity: Identity = Depends(current_identity),
    ):
        entries = anno.expert_review(storage, identity.user_id, dataset_id)
        payload = [
            {
                "record_id": e.record_id,
                "record_name": e.record_name,
                "position": e.position,
                "heads": [h.to_json() for h in e.heads],
            }
            for e in entries
        ]
        return _page(payload, offset, limit)

    @app.get("/api/datasets/{dataset_id}/export")
    def export(dataset_id: str, identity: Identity = Depends(current_identity)):
        anno.assert_expert(storage, identity.user_id, dataset_id)
        rows = anno.export_final_labels(storage, dataset_id)
        csv_text = anno.render_export_csv(rows)
        return PlainTextResponse(
            csv_text,
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": "attachment; filename=export.csv"},
        )

    @app.get("/api/me/annotations")
    def my_annotations(
        dataset: str = Query(),
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=DEFAULT_PAGE_LIMIT, ge=1, le=MAX_PAGE_LIMIT),
        identity: Identity = Depends(current_identity),
    ):
        entries = anno.list_my_annotations(storage, identity.user_id, dataset)
        return _page([_entry_json(e) for e in entries], offset, limit)

    # --- records ---
    # Specific sub-resources first: the :path converter is greedy, so
    # the bare record route must be registered last.

    @app.get("/api/records/{record_id:path}/segment")
    def segment(
        record_id: str,
        start: float | None = Query(default=None),
        end: float | None = Query(default=None),
        leads: str | None = Query(default=None),
        max_buckets: int = Query(default=DEFAULT_MAX_BUCKETS, ge=1),
        identity: Identity = Depends(current_identity),
    ):
        info = anno.record_info(storage, identity.user_id, record_id)
        t0 = start if start is not None else 0.0
        t1 = end if end is not None else min(info.duration, t0 + DEFAULT_SEGMENT_SECONDS)
        buckets = min(max_buckets, MAX_BUCKETS_CAP)
        i0, i1 = window_indices(t0, t1, info.sampling_frequency, info.n_samples)
        if leads is not None and leads.strip():
            requested = list(dict.fromkeys(s for s in leads.split(",") if s))
            known = set(info.lead_names)
            for name in requested:
                if name not in known:
                    raise UnknownLead(f"record {record_id!r} has no lead {name!r}")
        else:
            requested = list(info.lead_names)
        out = []
        for name in requested:
            w = storage.get_signal_window(record_id, name, i0, i1)
            phys = w.physical()
            if phys.size:
                seg = downsample_minmax(
                    phys, 0.0, phys.size / info.sampling_frequency,
                    info.sampling_frequency, buckets, lead_name=name,
                )
                extrema = seg.extrema.tolist()
                width = seg.bucket_width
            else:
                extrema, width = [], 1
            out.append({"lead_name": name, "bucket_width": width, "extrema": extrema})
        return {
            "record_id": record_id,
            "t_start": t0,
            "t_end": t1,
            "sampling_frequency": info.sampling_frequency,
            "n_samples": i1 - i0,
            "lead_names": list(info.lead_names),
            "leads": out,
        }

    @app.get("/api/records/{record_id:path}/analysis")
    def analysis(record_id: str, identity: Identity = Depends(current_identity)):
        return anno.record_analysis(storage, identity.user_id, record_id)

    @app.post("/api/records/{record_id:path}/annotation", status_code=201)
    def submit(
        record_id: str,
        body: AnnotationBody,
        identity: Identity = Depends(current_identity),
    ):
        annotation, next_record_id = anno.submit_annotation(
            storage,
            identity.user_id,
            record_id,
            list(body.labels),
            body.comment,
            body.status,
        )
        return {
            "annotation": annotation.to_json(),
            "next_record_id": next_record_id,
            "complete": next_record_id is None,
        }

    @app.get("/api/records/{record_id:path}")
    def record_metadata(record_id: str, identity: Identity = Depends(current_identity)):
        info = anno.record_info(storage, identity.user_id, record_id)
        head = anno.my_head(storage, identity.user_id, record_id)
        return {
            "record_id": info.record_id,
            "dataset_id": info.dataset_id,
            "name": info.name,
            "position": info.position,
            "total": info.total,
            "sampling_frequency": info.sampling_frequency,
            "n_samples": info.n_samples,
            "duration": info.duration,
            "lead_names": list(info.lead_names),
            "my_annotation": _annotation_json(head),
        }

    # --- annotations and review ---

    @app.put("/api/annotations/{annotation_id}")
    def revise(
        annotation_id: str,
        body: RevisionBody,
        identity: Identity = Depends(current_identity),
    ):
        annotation = anno.revise_annotation(
            storage,
            identity.user_id,
            annotation_id,
            list(body.labels),
            body.comment,
            body.status,
            expected_revision=body.expected_revision,
        )
        return {"annotation": annotation.to_json()}

    @app.post("/api/annotations/{annotation_id}/decision", status_code=201)
    def decide(
        annotation_id: str,
        body: DecisionBody,
        identity: Identity = Depends(current_identity),
    ):
        decision, created = anno.expert_decide(
            storage,
            identity.user_id,
            annotation_id,
            body.action,
            body.override_labels,
        )
        return {"decision": decision.to_json(), "annotation": _annotation_json(created)}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
