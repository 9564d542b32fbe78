import gzip
import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adlmine.domain import SensorKind
from adlmine.ingest import (
    EventLog,
    build_log,
    logging_days,
    parse_events,
    serialize_events,
)
from helpers import contact, motion, plug, ts

CSV_HEADER = "timestamp,participant_id,sensor_id,kind,channel,value\n"


def test_parse_smartplug_line():
    src = io.StringIO(
        CSV_HEADER + "2022-03-15T08:01:00Z,H024,kettle_plug,SmartPlug,,1850\n"
    )
    events, diags = parse_events(src, "csv")
    assert diags == []
    (event,) = events
    assert event.kind is SensorKind.SmartPlug
    assert event.value == 1850.0
    assert event.participant_id == "H024"
    assert event.timestamp == ts("08:01:00")


def test_malformed_value_yields_diagnostic_and_skips():
    src = io.StringIO(
        CSV_HEADER
        + "2022-03-15T08:01:00Z,H024,kettle_plug,SmartPlug,,abc\n"
        + "2022-03-15T08:02:00Z,H024,kettle_plug,SmartPlug,,1850\n"
    )
    events, diags = parse_events(src, "csv")
    assert len(events) == 1
    assert len(diags) == 1
    assert "non-numeric value" in diags[0].message
    assert diags[0].line == 2


def test_parse_never_aborts_on_garbage():
    src = io.StringIO(
        CSV_HEADER
        + "not,even,close\n"
        + "2022-03-15T08:01:00Z,P1,d1,Contact,,1\n"
        + "2022-99-99T08:01:00Z,P1,d1,Contact,,1\n"
        + "2022-03-15T08:03:00Z,P1,d1,UnknownKind,,1\n"
    )
    events, diags = parse_events(src, "csv")
    assert len(events) == 1
    assert len(diags) == 3


def test_sixteen_sensor_inventory():
    rows = [CSV_HEADER]
    for day in range(15, 22):  # a 7-day export
        for i in range(16):
            rows.append(f"2022-03-{day:02d}T08:{i:02d}:00Z,H024,s{i:02d},Motion,,1\n")
    events, diags = parse_events(io.StringIO("".join(rows)), "csv")
    assert not diags
    log = build_log(events)
    assert len(log.sensor_inventory) == 16
    assert logging_days(log) == 7


def test_jsonl_parse_and_identity():
    events = [contact("08:00:00", "d1"), plug("08:01:00", "p1", 1850.0)]
    text = serialize_events(events, "jsonl")
    parsed, diags = parse_events(io.StringIO(text), "jsonl")
    assert not diags
    assert parsed == events


def test_gzip_by_extension(tmp_path):
    events = [contact("08:00:00", "d1"), contact("09:00:00", "d1", 0.0)]
    path = tmp_path / "events.csv.gz"
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        fh.write(serialize_events(events, "csv"))
    parsed, diags = parse_events(path)
    assert not diags
    assert parsed == events


def test_build_log_dedups_exact_duplicates():
    e = contact("08:00:00", "d1")
    log = build_log([e, e])
    assert len(log.events) == 1


def test_build_log_keeps_distinct_values_at_same_timestamp():
    log = build_log([contact("08:00:00", "d1", 1.0), contact("08:00:00", "d1", 0.0)])
    assert len(log.events) == 2


def test_build_log_sorts_with_sensor_tiebreak():
    events = [contact("09:00:00", "b"), contact("08:00:00", "z"), contact("09:00:00", "a")]
    log = build_log(events)
    assert [(e.timestamp, e.sensor_id) for e in log.events] == [
        (ts("08:00:00"), "z"),
        (ts("09:00:00"), "a"),
        (ts("09:00:00"), "b"),
    ]


def test_build_log_mixed_participants_rejected():
    with pytest.raises(ValueError, match="mixed participants"):
        build_log([contact("08:00:00", "d1", pid="A"), contact("09:00:00", "d1", pid="B")])


def test_build_log_empty_rejected():
    with pytest.raises(ValueError):
        build_log([])


def test_span_of_171_day_log():
    events = [contact("2022-01-01T12:00:00Z", "d1"), contact("2022-06-20T12:00:00Z", "d1")]
    log = build_log(events)
    assert (log.span[1] - log.span[0]).days == 170  # first day + 170 more = 171 days
    assert logging_days(log) == 2  # only two days actually logged


def test_logging_days_single_day():
    log = build_log([contact("08:00:00", "d1"), contact("20:00:00", "d1")])
    assert logging_days(log) == 1


def test_logging_days_ten_of_fourteen():
    # brute-force oracle: count distinct local dates over the event list
    days = [1, 2, 3, 5, 6, 8, 9, 11, 13, 14]
    events = [contact(f"2022-03-{d:02d}T10:00:00Z", "d1") for d in days]
    events.append(contact("2022-03-05T23:00:00Z", "d1"))  # same day twice
    expected = len({e.timestamp.date() for e in events})
    assert expected == 10
    assert logging_days(build_log(events)) == expected


def test_logging_days_continuous_171():
    events = []
    for i in range(171):
        month_day = ts("2022-01-01T06:00:00Z") + __import__("datetime").timedelta(days=i)
        events.append(contact(month_day.isoformat(), "d1"))
    log = build_log(events)
    assert logging_days(log) == 171


def test_logging_days_respects_timezone():
    # 23:30 UTC on the 15th is already the 16th in Dublin summer time
    log = build_log([contact("2022-06-15T23:30:00Z", "d1")])
    assert logging_days(log, "UTC") == 1
    assert logging_days(log, "Europe/Dublin") == 1
    log2 = build_log(
        [contact("2022-06-15T10:00:00Z", "d1"), contact("2022-06-15T23:30:00Z", "d1")]
    )
    assert logging_days(log2, "UTC") == 1
    assert logging_days(log2, "Europe/Dublin") == 2


# -- properties ---------------------------------------------------------------

event_lists = st.lists(
    st.builds(
        lambda minute, sensor, watts: plug(f"08:{minute:02d}:00", sensor, watts),
        minute=st.integers(0, 59),
        sensor=st.sampled_from(["p1", "p2"]),
        watts=st.integers(0, 2500).map(float),
    ),
    min_size=1,
    max_size=30,
)


@given(event_lists)
def test_parse_serialize_identity_on_wellformed(events):
    log = build_log(events)
    for fmt in ("csv", "jsonl"):
        text = serialize_events(log.events, fmt)
        parsed, diags = parse_events(io.StringIO(text), fmt)
        assert not diags
        assert tuple(parsed) == log.events
        # canonical text is a fixpoint of parse∘serialize
        assert serialize_events(parsed, fmt) == text


@given(event_lists)
def test_build_log_idempotent(events):
    once = build_log(events)
    twice = build_log(once.events)
    assert once == twice


@given(event_lists)
def test_logging_days_bounded_by_span(events):
    log = build_log(events)
    span_days = (log.span[1] - log.span[0]).total_seconds() / 86400.0
    assert 1 <= logging_days(log) <= math.ceil(span_days) + 1
