"""UTC timestamps at seconds precision.

All temporal fields are RFC 3339 strings of the exact shape
``YYYY-MM-DDThh:mm:ssZ``. Because the shape is fixed width and zero padded,
lexicographic order on the strings equals temporal order, which the
temporal-sanity rules rely on.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone

from .errors import ValidationFailed

_TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")


def parse_ts(value: str) -> datetime:
    """Validate a timestamp string, returning the aware datetime."""
    if not isinstance(value, str) or not _TS_RE.match(value):
        raise ValidationFailed(
            f"timestamp {value!r} is not of the form YYYY-MM-DDThh:mm:ssZ"
        )
    try:
        parsed = datetime.strptime(value, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError as exc:
        raise ValidationFailed(f"invalid timestamp {value!r}: {exc}") from exc
    return parsed.replace(tzinfo=timezone.utc)


def is_ts(value: str) -> bool:
    try:
        parse_ts(value)
        return True
    except ValidationFailed:
        return False


def format_ts(moment: datetime) -> str:
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def now_ts() -> str:
    return format_ts(datetime.now(timezone.utc))
