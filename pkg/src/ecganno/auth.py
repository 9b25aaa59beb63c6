"""Accounts, verification codes, sessions.

Passwords are stored as salted scrypt digests with a tunable work
factor; the default (n = 2^15, r = 8, p = 1) costs tens of
milliseconds per verification on commodity hardware. Verification
codes and session tokens come from the OS CSPRNG.
"""
from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import (
    CodeAlreadyUsed,
    InvalidCode,
    InvalidCredentials,
    InvalidOrExpiredSession,
    NotAdmin,
    UsernameTaken,
    WeakPassword,
)
from .storage import Storage

ROLE_ANNOTATOR = "annotator"
ROLE_EXPERT = "expert"
ROLE_ADMIN = "admin"
CODE_ROLES = (ROLE_ANNOTATOR, ROLE_EXPERT)

MIN_PASSWORD_LENGTH = 8
DEFAULT_LOG2_N = 15
SCRYPT_R = 8
SCRYPT_P = 1
SCRYPT_MAXMEM = 1 << 27
DERIVED_KEY_LEN = 32

CODE_BYTES = 16     # 128-bit verification codes
TOKEN_BYTES = 32    # 256-bit session tokens
DEFAULT_SESSION_HOURS = 24.0


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    username: str
    role: str
    created_at: str


@dataclass(frozen=True)
class VerificationCode:
    code: str
    issued_by: str
    granted_role: str
    consumed_by: str | None
    issued_at: str


@dataclass(frozen=True)
class Session:
    token: str
    user_id: str
    expires_at: str


@dataclass(frozen=True)
class Identity:
    user_id: str
    username: str
    role: str


def _now(now: datetime | None) -> datetime:
    return now if now is not None else datetime.now(timezone.utc)


def _iso(dt: datetime) -> str:
    return dt.isoformat()


def hash_password(password: str, *, log2_n: int = DEFAULT_LOG2_N) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(
        password.encode("utf-8"),
        salt=salt,
        n=1 << log2_n,
        r=SCRYPT_R,
        p=SCRYPT_P,
        maxmem=SCRYPT_MAXMEM,
        dklen=DERIVED_KEY_LEN,
    )
    return f"scrypt${log2_n}${SCRYPT_R}${SCRYPT_P}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, log2_n, r, p, salt_hex, digest_hex = stored.split("$")
        if scheme != "scrypt":
            return False
        recomputed = hashlib.scrypt(
            password.encode("utf-8"),
            salt=bytes.fromhex(salt_hex),
            n=1 << int(log2_n),
            r=int(r),
            p=int(p),
            maxmem=SCRYPT_MAXMEM,
            dklen=len(bytes.fromhex(digest_hex)),
        )
    except (ValueError, TypeError):
        return False
    return hmac.compare_digest(recomputed.hex(), digest_hex)


# verifying against this burns the same work as a real check, so login
# timing does not reveal whether a username exists
_DUMMY_DIGEST = hash_password(secrets.token_hex(8))


def _new_id(prefix: str) -> str:
    return f"{prefix}_{secrets.token_hex(12)}"


def create_admin(
    storage: Storage,
    username: str,
    password: str,
    *,
    log2_n: int = DEFAULT_LOG2_N,
    now: datetime | None = None,
) -> UserAccount:
    """Bootstrap account; used once at instance initialization."""
    _check_password(password)
    digest = hash_password(password, log2_n=log2_n)
    created = _iso(_now(now))
    user_id = _new_id("u")
    with storage.transaction() as conn:
        taken = conn.execute(
            "SELECT 1 FROM users WHERE username = ?", (username,)
        ).fetchone()
        if taken:
            raise UsernameTaken(f"username {username!r} already exists")
        conn.execute(
            "INSERT INTO users (user_id, username, password_digest, role, created_at)"
            " VALUES (?, ?, ?, ?, ?)",
            (user_id, username, digest, ROLE_ADMIN, created),
        )
    return UserAccount(user_id, username, ROLE_ADMIN, created)


def issue_code(
    storage: Storage,
    issuer_user_id: str,
    granted_role: str,
    *,
    now: datetime | None = None,
) -> VerificationCode:
    if granted_role not in CODE_ROLES:
        raise ValueError(f"granted_role must be one of {CODE_ROLES}")
    code = secrets.token_urlsafe(CODE_BYTES)
    issued = _iso(_now(now))
    with storage.transaction() as conn:
        issuer = conn.execute(
            "SELECT role FROM users WHERE user_id = ?", (issuer_user_id,)
        ).fetchone()
        if issuer is None or issuer["role"] != ROLE_ADMIN:
            raise NotAdmin("only an admin can issue verification codes")
        conn.execute(
            "INSERT INTO codes (code, issued_by, granted_role, consumed_by, issued_at)"
            " VALUES (?, ?, ?, NULL, ?)",
            (code, issuer_user_id, granted_role, issued),
        )
    return VerificationCode(code, issuer_user_id, granted_role, None, issued)


def _check_password(password: str) -> None:
    if len(password) < MIN_PASSWORD_LENGTH:
        raise WeakPassword(
            f"password must be at least {MIN_PASSWORD_LENGTH} characters"
        )


def register(
    storage: Storage,
    code: str,
    username: str,
    password: str,
    *,
    log2_n: int = DEFAULT_LOG2_N,
    now: datetime | None = None,
) -> UserAccount:
    """Create an account from an unconsumed verification code.

    The code is consumed in the same transaction that inserts the
    account, so concurrent attempts with one code admit exactly one user.
    """
    if not username or not username.strip():
        raise ValueError("username must be non-empty")
    _check_password(password)
    digest = hash_password(password, log2_n=log2_n)  # outside the write lock
    created = _iso(_now(now))
    user_id = _new_id("u")
    with storage.transaction() as conn:
        row = conn.execute(
            "SELECT granted_role, consumed_by FROM codes WHERE code = ?", (code,)
        ).fetchone()
        if row is None:
            raise InvalidCode("verification code not recognized")
        if row["consumed_by"] is not None:
            raise CodeAlreadyUsed("verification code was already used")
        taken = conn.execute(
            "SELECT 1 FROM users WHERE username = ?", (username,)
        ).fetchone()
        if taken:
            raise UsernameTaken(f"username {username!r} already exists")
        conn.execute(
            "INSERT INTO users (user_id, username, password_digest, role, created_at)"
            " VALUES (?, ?, ?, ?, ?)",
            (user_id, username, digest, row["granted_role"], created),
        )
        consumed = conn.execute(
            "UPDATE codes SET consumed_by = ? WHERE code = ? AND consumed_by IS NULL",
            (user_id, code),
        )
        if consumed.rowcount != 1:
            raise CodeAlreadyUsed("verification code was already used")
    return UserAccount(user_id, username, row["granted_role"], created)


def login(
    storage: Storage,
    username: str,
    password: str,
    *,
    lifetime_hours: float = DEFAULT_SESSION_HOURS,
    now: datetime | None = None,
) -> Session:
    """Verify credentials and mint a session. Unknown-user and
    wrong-password failures are the same error and cost the same time.
    """
    conn = storage.connection()
    row = conn.execute(
        "SELECT user_id, password_digest FROM users WHERE username = ?", (username,)
    ).fetchone()
    if row is None:
        verify_password(password, _DUMMY_DIGEST)
        raise InvalidCredentials("unknown username or wrong password")
    if not verify_password(password, row["password_digest"]):
        raise InvalidCredentials("unknown username or wrong password")
    token = secrets.token_urlsafe(TOKEN_BYTES)
    expires = _iso(_now(now) + timedelta(hours=lifetime_hours))
    with storage.transaction() as c:
        c.execute(
            "INSERT INTO sessions (token, user_id, expires_at) VALUES (?, ?, ?)",
            (token, row["user_id"], expires),
        )
    return Session(token, row["user_id"], expires)


def authenticate(storage: Storage, token: str, *, now: datetime | None = None) -> Identity:
    conn = storage.connection()
    row = conn.execute(
        "SELECT s.user_id, s.expires_at, u.username, u.role"
        " FROM sessions s JOIN users u ON u.user_id = s.user_id"
        " WHERE s.token = ?",
        (token,),
    ).fetchone()
    if row is None:
        raise InvalidOrExpiredSession("session not recognized")
    if datetime.fromisoformat(row["expires_at"]) <= _now(now):
        raise InvalidOrExpiredSession("session expired")
    return Identity(row["user_id"], row["username"], row["role"])


def logout(storage: Storage, token: str) -> None:
    with storage.transaction() as conn:
        conn.execute("DELETE FROM sessions WHERE token = ?", (token,))
