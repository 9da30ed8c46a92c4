"""
Timestamp renderings used by tapes, ARC files, indexes and the OAI-PMH layer.

Two renderings exist: the seconds-granularity UTC datestamp
`YYYY-MM-DDThh:mm:ssZ` (tapes, indexes, OAI-PMH, locator) and the 14-digit
`YYYYMMDDHHMMSS` ARC date. Both parsers are strict.
"""

import re
from datetime import datetime, timedelta, timezone
from typing import Callable, Optional

Clock = Callable[[], datetime]

_DATESTAMP_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_DAY_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_ARC_DATE_RE = re.compile(r"^\d{14}$")


def utc_now() -> datetime:
    """Default clock: the current time in UTC."""
    return datetime.now(timezone.utc)


class DateFormat:
    """Rendering and parsing of the repository's timestamp formats."""

    GRANULARITY = "YYYY-MM-DDThh:mm:ssZ"
    DATESTAMP = "%Y-%m-%dT%H:%M:%SZ"
    ARC_DATE = "%Y%m%d%H%M%S"

    @classmethod
    def truncate(cls, value: datetime) -> datetime:
        """
        Normalize a datetime to UTC and drop sub-second precision (truncation, not rounding).

        Naive datetimes are taken to be UTC.
        """
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc).replace(microsecond=0)

    @classmethod
    def format(cls, value: datetime) -> str:
        return cls.truncate(value).strftime(cls.DATESTAMP)

    @classmethod
    def parse(cls, text: str) -> datetime:
        """
        Parse a seconds-granularity datestamp.

        Raises:
            ValueError: If the text is not exactly `YYYY-MM-DDThh:mm:ssZ` or not a real date.
        """
        if not isinstance(text, str) or not _DATESTAMP_RE.match(text):
            raise ValueError(f"Not a datestamp of the form {cls.GRANULARITY}: {text!r}")
        return datetime.strptime(text, cls.DATESTAMP).replace(tzinfo=timezone.utc)

    @classmethod
    def is_valid(cls, text: str) -> bool:
        try:
            cls.parse(text)
        except ValueError:
            return False
        return True

    @classmethod
    def format_arc(cls, value: datetime) -> str:
        return cls.truncate(value).strftime(cls.ARC_DATE)

    @classmethod
    def parse_arc(cls, text: str) -> datetime:
        if not _ARC_DATE_RE.match(text):
            raise ValueError(f"Not a 14-digit ARC date: {text!r}")
        return datetime.strptime(text, cls.ARC_DATE).replace(tzinfo=timezone.utc)

    @classmethod
    def parse_harvest_bound(cls, text: str, upper: bool) -> tuple[datetime, str]:
        """
        Parse an OAI-PMH `from`/`until` argument.

        Day granularity is widened to the whole day: the first second for a
        lower bound, the last second for an upper bound.

        Returns:
            tuple[datetime, str]: The bound and its granularity ("day" or "seconds").
        """
        if _DAY_RE.match(text or ""):
            day = datetime.strptime(text, "%Y-%m-%d").replace(tzinfo=timezone.utc)
            if upper:
                day += timedelta(days=1, seconds=-1)
            return day, "day"
        return cls.parse(text), "seconds"


def sample_clock(clock: Clock, previous: Optional[datetime] = None) -> datetime:
    """
    Take one clock sample at seconds precision, never earlier than `previous`.
    """
    now = DateFormat.truncate(clock())
    if previous is not None and now < previous:
        return previous
    return now
