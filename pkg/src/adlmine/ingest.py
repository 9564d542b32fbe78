"""Parse, validate and index raw sensor logs.

Canonical CSV schema: ``timestamp,participant_id,sensor_id,kind,channel,value``
with ISO-8601 UTC timestamps and an empty channel for single-channel sensors.
JSONL carries the same fields as one object per line. Gzip input is accepted
by extension sniffing.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union
from zoneinfo import ZoneInfo

from .domain import (
    UTC,
    Diagnostic,
    SensorEvent,
    SensorKind,
    format_timestamp,
    format_value,
    parse_timestamp,
    validate_event,
)

CSV_HEADER = ["timestamp", "participant_id", "sensor_id", "kind", "channel", "value"]


@dataclass(frozen=True)
class EventLog:
    """Time-sorted, deduplicated record of one participant's sensor events."""

    participant_id: str
    events: tuple[SensorEvent, ...]
    span: tuple[datetime, datetime]
    sensor_inventory: frozenset[str]

    def events_between(self, start: datetime, end: datetime) -> Sequence[SensorEvent]:
        """Events with start <= timestamp < end (events are timestamp-sorted)."""
        lo = bisect_left(self.events, start, key=lambda e: e.timestamp)
        hi = bisect_left(self.events, end, key=lambda e: e.timestamp)
        return self.events[lo:hi]


def _open_source(source: Union[str, Path, IO]) -> IO:
    if isinstance(source, (str, Path)):
        path = Path(source)
        if path.suffix == ".gz":
            return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
        return open(path, "r", encoding="utf-8")
    return source


def _sniff_format(source: Union[str, Path, IO], format: Optional[str]) -> str:
    if format:
        return format
    name = str(getattr(source, "name", source))
    for suffix in (".gz", ""):
        if name.endswith(".csv" + suffix):
            return "csv"
        if name.endswith((".jsonl" + suffix, ".ndjson" + suffix)):
            return "jsonl"
    raise ValueError(f"cannot infer format of {name!r}; pass format explicitly")


def parse_events(
    source: Union[str, Path, IO], format: Optional[str] = None
) -> tuple[list[SensorEvent], list[Diagnostic]]:
    """Parse a CSV or JSONL event stream.

    Every well-formed line yields one event. Malformed lines yield a
    line-numbered diagnostic and are skipped; the parse never aborts on them.
    """
    fmt = _sniff_format(source, format)
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    events: list[SensorEvent] = []
    diagnostics: list[Diagnostic] = []
    stream = _open_source(source)
    try:
        if fmt == "csv":
            _parse_csv(stream, events, diagnostics)
        else:
            _parse_jsonl(stream, events, diagnostics)
    finally:
        if stream is not source:
            stream.close()
    return events, diagnostics


def _parse_csv(stream: IO, events: list, diagnostics: list) -> None:
    reader = csv.reader(stream)
    lineno = 0
    for row in reader:
        lineno += 1
        if not row or all(not cell.strip() for cell in row):
            continue
        if lineno == 1 and [c.strip() for c in row] == CSV_HEADER:
            continue
        if len(row) != len(CSV_HEADER):
            diagnostics.append(
                Diagnostic("warning", f"expected {len(CSV_HEADER)} fields, got {len(row)}", lineno)
            )
            continue
        record = dict(zip(CSV_HEADER, (cell.strip() for cell in row)))
        _accept(record, lineno, events, diagnostics)


def _parse_jsonl(stream: IO, events: list, diagnostics: list) -> None:
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(Diagnostic("warning", f"invalid JSON: {exc.msg}", lineno))
            continue
        _accept(record, lineno, events, diagnostics)


def _accept(record: dict, lineno: int, events: list, diagnostics: list) -> None:
    try:
        kind = SensorKind(record["kind"])
    except (KeyError, ValueError):
        diagnostics.append(
            Diagnostic("warning", f"unknown sensor kind {record.get('kind')!r}", lineno)
        )
        return
    try:
        timestamp = parse_timestamp(record["timestamp"])
    except (KeyError, ValueError, TypeError):
        diagnostics.append(
            Diagnostic("warning", f"bad timestamp {record.get('timestamp')!r}", lineno)
        )
        return
    raw_value = record.get("value")
    try:
        value = float(raw_value)
    except (TypeError, ValueError):
        diagnostics.append(
            Diagnostic("warning", f"non-numeric value {raw_value!r}", lineno)
        )
        return
    event = SensorEvent(
        participant_id=str(record.get("participant_id", "")),
        sensor_id=str(record.get("sensor_id", "")),
        timestamp=timestamp,
        kind=kind,
        channel=(record.get("channel") or None),
        value=value,
    )
    problem = validate_event(event)
    if problem is not None:
        diagnostics.append(Diagnostic("warning", problem, lineno))
        return
    events.append(event)


def build_log(events: Iterable[SensorEvent]) -> EventLog:
    """Sort, deduplicate and span-index one participant's events.

    Exact duplicate (timestamp, sensor, channel, value) rows collapse to one;
    distinct values at the same timestamp are all kept.
    """
    ordered = sorted(events, key=SensorEvent.sort_key)
    if not ordered:
        raise ValueError("cannot build a log from zero events")
    participants = {e.participant_id for e in ordered}
    if len(participants) > 1:
        raise ValueError(f"mixed participants in one log: {sorted(participants)}")
    deduped: list[SensorEvent] = []
    seen_key = None
    for event in ordered:
        key = (event.timestamp, event.sensor_id, event.channel, event.value)
        if key == seen_key:
            continue
        seen_key = key
        deduped.append(event)
    return EventLog(
        participant_id=deduped[0].participant_id,
        events=tuple(deduped),
        span=(deduped[0].timestamp, deduped[-1].timestamp),
        sensor_inventory=frozenset(e.sensor_id for e in deduped),
    )


def logging_days(log: EventLog, tz: Union[str, ZoneInfo] = "UTC") -> int:
    """Number of distinct local calendar dates with at least one event."""
    if not log.events:
        raise ValueError("empty log has no logging days")
    zone = ZoneInfo(tz) if isinstance(tz, str) else tz
    return len({e.timestamp.astimezone(zone).date() for e in log.events})


def serialize_events(events: Iterable[SensorEvent], format: str = "csv") -> str:
    """Canonical text form; parse(serialize(x)) == x for well-formed events."""
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for e in events:
            writer.writerow(
                [
                    format_timestamp(e.timestamp),
                    e.participant_id,
                    e.sensor_id,
                    e.kind.value,
                    e.channel or "",
                    format_value(e.value),
                ]
            )
        return out.getvalue()
    if format == "jsonl":
        return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events)
    raise ValueError(f"unknown format {format!r}")
