"""Strided window grid generation and training-label attachment.

The grid is re-anchored at each local midnight so rule mining sees comparable
morning and evening windows across days; daily routines are local-clock
phenomena even though all stored timestamps are UTC.
"""

from __future__ import annotations

from collections import Counter
from datetime import datetime, timedelta
from typing import Iterable, Optional, Sequence, Union
from zoneinfo import ZoneInfo

from .binarize import items_for_window
from .domain import (
    UTC,
    AdlKind,
    Annotation,
    Diagnostic,
    MiningParams,
    SensorMap,
    Transaction,
    Verdict,
    Window,
)
from .ingest import EventLog


def _as_zone(tz: Union[str, ZoneInfo]) -> ZoneInfo:
    return ZoneInfo(tz) if isinstance(tz, str) else tz


def generate_windows(
    span: tuple[datetime, datetime],
    size_minutes: int,
    stride_minutes: float,
    tz: Union[str, ZoneInfo] = "UTC",
    participant_id: str = "",
) -> list[Window]:
    """All windows whose start lies on the stride grid and meets the span.

    Each local calendar day contributes ticks at midnight + k*stride up to
    (but excluding) the next local midnight. The first window starts at the
    last tick at or before the span start, so events in the span head are
    covered even when the span is not grid-aligned; the last start is below
    the span end. Windows keep their nominal size even when they run past
    the span end (item collection is bounded by the data anyway).
    """
    if stride_minutes <= 0 or size_minutes <= 0:
        raise ValueError("window size and stride must be positive")
    if stride_minutes > size_minutes:
        raise ValueError("stride must not exceed the window size")
    start, end = span
    if start > end:
        raise ValueError("span is inverted")
    zone = _as_zone(tz)
    stride = timedelta(minutes=stride_minutes)
    windows: list[Window] = []
    day = start.astimezone(zone).date()
    last_day = end.astimezone(zone).date()
    first_midnight = datetime(day.year, day.month, day.day, tzinfo=zone).astimezone(UTC)
    first_tick = first_midnight + ((start - first_midnight) // stride) * stride
    while day <= last_day:
        midnight = datetime(day.year, day.month, day.day, tzinfo=zone).astimezone(UTC)
        next_day = day + timedelta(days=1)
        next_midnight = datetime(
            next_day.year, next_day.month, next_day.day, tzinfo=zone
        ).astimezone(UTC)
        tick = midnight
        while tick < next_midnight:
            if first_tick <= tick and tick < end:
                windows.append(Window(participant_id, tick, size_minutes))
            tick = tick + stride
        day = next_day
    if not windows:
        # degenerate span (single instant on a tick): still cover it
        windows.append(Window(participant_id, first_tick, size_minutes))
    return windows


def _resolve_annotations(annotations: Iterable[Annotation]) -> list[Annotation]:
    """Apply last-writer-wins per candidate id, keep everything else as is."""
    by_candidate: dict[str, Annotation] = {}
    independent: list[Annotation] = []
    for ann in annotations:
        if ann.candidate_id:
            by_candidate[ann.candidate_id] = ann
        else:
            independent.append(ann)
    return independent + list(by_candidate.values())


def label_windows(
    transactions: Sequence[Transaction],
    annotations: Iterable[Annotation],
    adl: AdlKind,
    span: Optional[tuple[datetime, datetime]] = None,
) -> tuple[list[Transaction], list[Diagnostic]]:
    """Attach training labels for one ADL to binarized transactions.

    A transaction is labelled when a Confirmed or Added annotation for this
    ADL intersects its window; windows intersecting a Rejected candidate are
    forced unlabeled (hard negatives), overriding any positive. The result is
    independent of annotation input order: rejection resolution is
    last-writer-wins per candidate id and interval checks are set-based.
    """
    diagnostics: list[Diagnostic] = []
    positives: list[tuple[datetime, datetime]] = []
    rejected: list[tuple[datetime, datetime]] = []
    for ann in _resolve_annotations(annotations):
        if ann.adl is not adl:
            continue
        if span is not None and (ann.end < span[0] or ann.start > span[1]):
            diagnostics.append(
                Diagnostic(
                    "warning",
                    f"annotation {ann.verdict.value} {ann.adl.value} at "
                    f"{ann.start.isoformat()} lies outside the log span; ignored",
                )
            )
            continue
        if ann.verdict in (Verdict.Confirmed, Verdict.Added):
            positives.append((ann.start, ann.end))
        elif ann.verdict is Verdict.Rejected:
            rejected.append((ann.start, ann.end))
    labeled: list[Transaction] = []
    for tx in transactions:
        label: Optional[AdlKind] = None
        if any(tx.window.intersects(s, e) for s, e in positives):
            label = adl
        if any(tx.window.intersects(s, e) for s, e in rejected):
            label = None
        labeled.append(Transaction(tx.window, tx.items, label))
    return labeled, diagnostics


def build_training_transactions(
    log: EventLog,
    sensor_map: SensorMap,
    annotations: Sequence[Annotation],
    params: MiningParams,
    tz: Union[str, ZoneInfo] = "UTC",
) -> tuple[dict[AdlKind, list[Transaction]], Counter, list[Diagnostic]]:
    """Binarize and label the full grid once per ADL at that ADL's window size.

    Empty-item transactions are excluded (they carry no evidence either way).
    Returns the per-ADL labeled transactions, the unmapped-sensor tally and
    any labelling diagnostics.
    """
    params.validate()
    unmapped: Counter = Counter()
    diagnostics: list[Diagnostic] = []
    by_adl: dict[AdlKind, list[Transaction]] = {}
    for adl in AdlKind:
        size = params.window_sizes[adl]
        grid = generate_windows(
            log.span, size, params.stride_minutes, tz, log.participant_id
        )
        transactions = [
            tx
            for w in grid
            if (tx := items_for_window(log, w, sensor_map, params, unmapped)).items
        ]
        labeled, diags = label_windows(transactions, annotations, adl, log.span)
        diagnostics.extend(diags)
        by_adl[adl] = labeled
    return by_adl, unmapped, diagnostics
