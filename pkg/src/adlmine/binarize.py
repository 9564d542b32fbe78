"""Turn the raw events inside one window into a binary item set.

Activation semantics per sensor kind:

* Contact: any open event (value 1); closes carry no signal.
* Motion (standalone or the motion channel of a multi-sensor): any activation.
* SmartPlug: any reading at or above the configured on-watts threshold.
* Humidity channel: a rise of at least the configured delta somewhere inside
  the window (an earlier low reading followed by a higher one), so a
  drying-out bathroom never produces the item.
* Temperature and light channels are parsed but yield no items.
"""

from __future__ import annotations

from collections import Counter
from datetime import datetime
from typing import Optional, Sequence

from .domain import (
    MiningParams,
    SensorKind,
    SensorMap,
    Transaction,
    Window,
    canonical_role,
)
from .ingest import EventLog


def humidity_rise(
    readings: Sequence[tuple[datetime, float]], delta: float
) -> bool:
    """True when some later reading exceeds an earlier one by at least delta.

    Fewer than two readings is insufficient evidence. Adding readings can
    never turn a detected rise back off, which keeps window item sets
    monotone under added events.
    """
    if len(readings) < 2:
        return False
    best = 0.0
    running_min = readings[0][1]
    for _ts, value in readings[1:]:
        if value - running_min > best:
            best = value - running_min
        if value < running_min:
            running_min = value
    return best >= delta


def _rise_extent(
    readings: Sequence[tuple[datetime, float]], delta: float
) -> Optional[tuple[datetime, datetime]]:
    """Timestamps of the (min, max) pair realising the first best rise."""
    if len(readings) < 2:
        return None
    best = 0.0
    best_pair: Optional[tuple[datetime, datetime]] = None
    running_min = readings[0][1]
    running_min_ts = readings[0][0]
    for ts, value in readings[1:]:
        if value - running_min > best:
            best = value - running_min
            best_pair = (running_min_ts, ts)
        if value < running_min:
            running_min = value
            running_min_ts = ts
    if best >= delta and best_pair is not None:
        return best_pair
    return None


def window_activations(
    log: EventLog,
    window: Window,
    sensor_map: SensorMap,
    params: MiningParams,
    unmapped: Optional[Counter] = None,
) -> dict[str, tuple[datetime, ...]]:
    """Map each activated role to its activation timestamps inside the window.

    The keys are exactly the window's transaction items. For humidity roles
    the timestamps are the reading pair realising the qualifying rise.
    """
    activations: dict[str, list[datetime]] = {}
    humidity_readings: dict[str, list[tuple[datetime, float]]] = {}
    for event in log.events_between(window.start, window.end):
        if event.kind is SensorKind.MultiEnvironment and event.channel in (
            "temperature",
            "light",
        ):
            continue  # parsed but never itemised
        role = canonical_role(sensor_map, event.sensor_id, event.channel)
        if role is None:
            if unmapped is not None:
                key = event.sensor_id + (f":{event.channel}" if event.channel else "")
                unmapped[key] += 1
            continue
        if event.kind is SensorKind.MultiEnvironment and event.channel == "humidity":
            humidity_readings.setdefault(role, []).append(
                (event.timestamp, event.value)
            )
            continue
        activated = False
        if event.kind is SensorKind.Contact:
            activated = event.value == 1.0
        elif event.kind is SensorKind.Motion:
            activated = event.value == 1.0
        elif event.kind is SensorKind.SmartPlug:
            activated = event.value >= params.plug_on_watts
        elif event.kind is SensorKind.MultiEnvironment and event.channel == "motion":
            activated = event.value == 1.0
        if activated:
            activations.setdefault(role, []).append(event.timestamp)
    for role, readings in humidity_readings.items():
        extent = _rise_extent(readings, params.humidity_rise_delta)
        if extent is not None:
            activations.setdefault(role, []).extend(extent)
    return {role: tuple(sorted(times)) for role, times in activations.items()}


def items_for_window(
    log: EventLog,
    window: Window,
    sensor_map: SensorMap,
    params: MiningParams,
    unmapped: Optional[Counter] = None,
) -> Transaction:
    """Binarize one window into an order-independent transaction."""
    acts = window_activations(log, window, sensor_map, params, unmapped)
    return Transaction(window=window, items=frozenset(acts))
