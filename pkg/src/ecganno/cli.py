"""Operator commands: initialize a data directory, ingest records,
mint verification codes, grant dataset membership, export labels, and
run the HTTP server.

Exit codes: 0 on success, 1 on a domain failure (uninitialized
directory, unknown dataset, refusal to overwrite, ...), 2 on usage
errors (click's own convention).
"""
from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import uvicorn

from . import annotations as anno
from . import auth, ingest
from .api import create_app
from .config import load_config
from .errors import EcgAnnoError, UnknownDataset, UnknownUser
from .storage import Storage

ROLES = ("annotator", "expert", "admin")


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def domain_errors(fn):
    """Turn domain exceptions into exit code 1 with a one-line message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (EcgAnnoError, FileNotFoundError, ValueError) as exc:
            _fail(str(exc))

    return wrapper


def _data_dir_option(fn):
    return click.option(
        "--data-dir",
        default=None,
        help="Data directory (default ./data; a config file or"
        " ECGANNO_DATA_DIR overrides it).",
    )(fn)


def _open(data_dir) -> Storage:
    cfg = load_config(data_dir=data_dir)
    return Storage.open(cfg.data_dir)


def _dataset_by_name(store: Storage, name: str) -> str:
    row = store.connection().execute(
        "SELECT dataset_id FROM datasets WHERE name = ?", (name,)
    ).fetchone()
    if row is None:
        raise UnknownDataset(f"no dataset named {name!r}")
    return row["dataset_id"]


def _user_by_name(store: Storage, username: str) -> str:
    row = store.connection().execute(
        "SELECT user_id FROM users WHERE username = ?", (username,)
    ).fetchone()
    if row is None:
        raise UnknownUser(f"no user named {username!r}")
    return row["user_id"]


def _any_admin(store: Storage) -> str:
    row = store.connection().execute(
        "SELECT user_id FROM users WHERE role = 'admin' ORDER BY rowid LIMIT 1"
    ).fetchone()
    if row is None:
        raise UnknownUser("no admin account exists; run init first")
    return row["user_id"]


def _read_vocabulary(path) -> list[tuple[str, str]]:
    """One 'CODE,display text' pair per line; blank lines and #-comments
    are ignored.
    """
    vocab = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," not in line:
            raise ValueError(f"{path}:{lineno}: expected 'CODE,display text'")
        code, display = line.split(",", 1)
        vocab.append((code.strip(), display.strip()))
    if not vocab:
        raise ValueError(f"{path}: no label definitions found")
    return vocab


@click.group()
def main():
    """Self-hosted ECG annotation service."""


@main.command()
@_data_dir_option
@click.option("--admin-user", required=True, help="Username for the first admin.")
@click.option("--admin-password", required=True, help="Password for the first admin.")
@domain_errors
def init(data_dir, admin_user, admin_password):
    """Create an empty data directory with one admin account."""
    cfg = load_config(data_dir=data_dir)
    store = Storage.initialize(cfg.data_dir)
    try:
        auth.create_admin(store, admin_user, admin_password)
    except BaseException:
        # leave no half-initialized directory behind, so init is retryable
        store.close()
        for suffix in ("", "-wal", "-shm"):
            Path(str(store.db_path) + suffix).unlink(missing_ok=True)
        raise
    store.close()
    click.echo(f"initialized {cfg.data_dir}")
    click.echo(f"admin account {admin_user!r} created")


@main.command(name="ingest")
@_data_dir_option
@click.option("--dataset", required=True, help="Name for the new dataset.")
@click.option(
    "--path",
    "directory",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Directory holding .hea/.dat record files.",
)
@click.option(
    "--labels",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="Label vocabulary file, one 'CODE,display text' per line"
    " (default: NORM/AF/ER/TWC).",
)
@domain_errors
def ingest_cmd(data_dir, dataset, directory, labels):
    """Ingest every WFDB record in a directory into a new dataset."""
    vocabulary = _read_vocabulary(labels) if labels else None
    store = _open(data_dir)
    try:
        report = ingest.ingest_directory(store, dataset, directory, vocabulary)
    finally:
        store.close()
    for entry in report.entries:
        if entry.ok:
            click.echo(f"{entry.record_name}: OK")
        else:
            click.echo(f"{entry.record_name}: SKIP ({entry.reason})")
    click.echo(f"{report.n_ok} ingested, {report.n_skipped} skipped")


@main.group()
def user():
    """Account management."""


@user.command()
@_data_dir_option
@click.option(
    "--role",
    default="annotator",
    type=click.Choice(ROLES),
    help="Role granted to whoever registers with the code.",
)
@domain_errors
def code(data_dir, role):
    """Mint a one-time verification code for self-registration."""
    store = _open(data_dir)
    try:
        issued = auth.issue_code(store, _any_admin(store), role)
    finally:
        store.close()
    click.echo(issued.code)


@user.command()
@_data_dir_option
@click.option("--dataset", required=True, help="Dataset name.")
@click.option("--user", "username", required=True, help="Username to grant.")
@click.option("--expert", is_flag=True, help="Grant expert review rights.")
@domain_errors
def grant(data_dir, dataset, username, expert):
    """Make a user a member (or expert) of a dataset."""
    store = _open(data_dir)
    try:
        dataset_id = _dataset_by_name(store, dataset)
        user_id = _user_by_name(store, username)
        anno.grant_member(store, dataset_id, user_id, expert=expert)
    finally:
        store.close()
    suffix = " as expert" if expert else ""
    click.echo(f"granted {username!r} access to {dataset!r}{suffix}")


@main.command()
@_data_dir_option
@click.option("--dataset", required=True, help="Dataset name.")
@click.option(
    "--out",
    required=True,
    type=click.Path(dir_okay=False),
    help="Output CSV path.",
)
@click.option("--force", is_flag=True, help="Overwrite an existing output file.")
@domain_errors
def export(data_dir, dataset, out, force):
    """Write the final per-record labels to a CSV file."""
    out_path = Path(out)
    if out_path.exists() and not force:
        _fail(f"{out_path} exists; pass --force to overwrite")
    store = _open(data_dir)
    try:
        dataset_id = _dataset_by_name(store, dataset)
        rows = anno.export_final_labels(store, dataset_id)
    finally:
        store.close()
    out_path.write_text(anno.render_export_csv(rows))
    click.echo(f"wrote {len(rows)} rows to {out_path}")


@main.command()
@_data_dir_option
@click.option("--host", default=None, help="Bind address.")
@click.option("--port", default=None, type=int, help="Bind port.")
@click.option(
    "--config",
    "config_path",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="TOML config file (flags override it).",
)
@click.option(
    "--static-dir",
    default=None,
    type=click.Path(exists=True, file_okay=False),
    help="Directory with the web UI build, served at /.",
)
@domain_errors
def serve(data_dir, host, port, config_path, static_dir):
    """Run the HTTP server."""
    cfg = load_config(
        config_path=config_path,
        data_dir=data_dir,
        host=host,
        port=port,
        static_dir=static_dir,
    )
    store = Storage.open(cfg.data_dir)
    app = create_app(
        store, session_hours=cfg.session_hours, static_dir=cfg.static_dir
    )
    click.echo(f"serving {cfg.data_dir} on http://{cfg.host}:{cfg.port}")
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


if __name__ == "__main__":
    main()
