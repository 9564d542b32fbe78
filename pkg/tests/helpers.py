"""Small constructors shared across the test modules."""

from __future__ import annotations

from datetime import datetime, timezone

from adlmine.domain import SensorEvent, SensorKind, parse_timestamp

UTC = timezone.utc


def ts(text: str) -> datetime:
    if "T" not in text:
        text = "2022-03-15T" + text
    if not text.endswith("Z") and "+" not in text:
        text += "Z"
    return parse_timestamp(text)


def ev(
    when: str,
    sensor_id: str,
    kind: SensorKind,
    value: float,
    channel: str | None = None,
    pid: str = "P1",
) -> SensorEvent:
    return SensorEvent(
        participant_id=pid,
        sensor_id=sensor_id,
        timestamp=ts(when),
        kind=kind,
        channel=channel,
        value=value,
    )


def contact(when: str, sensor_id: str, value: float = 1.0, pid: str = "P1") -> SensorEvent:
    return ev(when, sensor_id, SensorKind.Contact, value, pid=pid)


def motion(when: str, sensor_id: str, pid: str = "P1") -> SensorEvent:
    return ev(when, sensor_id, SensorKind.Motion, 1.0, pid=pid)


def plug(when: str, sensor_id: str, watts: float, pid: str = "P1") -> SensorEvent:
    return ev(when, sensor_id, SensorKind.SmartPlug, watts, pid=pid)


def multi(
    when: str, sensor_id: str, channel: str, value: float, pid: str = "P1"
) -> SensorEvent:
    return ev(when, sensor_id, SensorKind.MultiEnvironment, value, channel, pid=pid)
