"""Canonical JSON serialization, content hashing and timestamp helpers.

All persisted records use one canonical form: UTF-8 JSON with
lexicographically sorted keys and no insignificant whitespace. Object ids
are the lowercase hex SHA-256 of those bytes, so identical records always
hash identically across processes and runs.
"""
import hashlib
import json
from datetime import datetime, timedelta, timezone

TS_FORMAT = "%Y-%m-%dT%H:%M:%S.%f"


def canonical_bytes(record: dict) -> bytes:
    """Serialize a JSON-compatible dict to its canonical byte form."""
    return json.dumps(
        record, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def canonical_dumps(record) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def record_id(record: dict) -> str:
    """Content address of a record: SHA-256 over its canonical bytes."""
    return sha256_hex(canonical_bytes(record))


def format_ts(dt: datetime) -> str:
    """RFC 3339 UTC timestamp with millisecond precision."""
    dt = dt.astimezone(timezone.utc)
    return dt.strftime(TS_FORMAT)[:-3] + "Z"


def parse_ts(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1]
    if "." not in value:
        value = value + ".000"
    return datetime.strptime(value, TS_FORMAT).replace(tzinfo=timezone.utc)


def now_ts() -> str:
    return format_ts(datetime.now(timezone.utc))


def ts_after(candidate: str, floor: str) -> str:
    """Return ``candidate``, bumped to strictly after ``floor`` if needed.

    Keeps timestamps strictly increasing along a version chain even when
    the wall clock (or a replay script) stands still.
    """
    if parse_ts(candidate) > parse_ts(floor):
        return candidate
    return format_ts(parse_ts(floor) + timedelta(milliseconds=1))


def ts_at_or_after(candidate: str, floor: str) -> str:
    """Return ``candidate``, bumped to at least ``floor`` (non-decreasing)."""
    if parse_ts(candidate) >= parse_ts(floor):
        return candidate
    return floor
