"""Apply a rule set over the strided grid and merge positives into events.

Each ADL is detected independently of the others, so a bath followed
immediately by dressing produces two events that may overlap in time.
Within one ADL, chained positive windows merge into a single event whose
extent is bounded by the contributing sensor activations, not the window
edges — a two-minute kettle burst never reports an hour of eating.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Mapping, Optional, Sequence, Union
from zoneinfo import ZoneInfo

from .apriori import RuleSet
from .binarize import window_activations
from .domain import (
    AdlKind,
    AdlEvent,
    Diagnostic,
    MiningParams,
    SensorEvent,
    SensorKind,
    SensorMap,
    Window,
    format_timestamp,
)
from .ingest import EventLog
from .windows import generate_windows

#: A leaving-house candidate is suppressed when interior motion fires within
#: this long after the door's last activation (callers and deliveries open
#: the door without the occupant leaving).
LEAVING_QUIET_MINUTES = 15


@dataclass(frozen=True)
class PositiveWindow:
    window: Window
    rule_ids: tuple[str, ...]
    activations: Mapping[str, tuple[datetime, ...]]  # matched antecedent roles only


def _is_interior_motion(event: SensorEvent) -> bool:
    if event.kind is SensorKind.Motion:
        return event.value == 1.0
    if event.kind is SensorKind.MultiEnvironment and event.channel == "motion":
        return event.value == 1.0
    return False


def _suppress_departure(
    log: EventLog,
    sensor_map: SensorMap,
    acts: Mapping[str, tuple[datetime, ...]],
    matched_roles: frozenset[str],
) -> bool:
    door_roles = [
        r
        for r in matched_roles
        if AdlKind.LeavingHouse in sensor_map.groups_for(r) and acts.get(r)
    ]
    if not door_roles:
        return False
    last_door = max(acts[r][-1] for r in door_roles)
    horizon = last_door + timedelta(minutes=LEAVING_QUIET_MINUTES)
    for event in log.events_between(last_door, horizon + timedelta(milliseconds=1)):
        if event.timestamp > last_door and _is_interior_motion(event):
            return True
    return False


def detect_adl(
    log: EventLog,
    sensor_map: SensorMap,
    ruleset: RuleSet,
    adl: AdlKind,
    params: MiningParams,
    tz: Union[str, ZoneInfo] = "UTC",
) -> tuple[list[PositiveWindow], list[Diagnostic]]:
    """Windows where at least one rule's antecedent is contained in the items."""
    rules = ruleset.rules.get(adl, ())
    if not rules:
        return [], [Diagnostic("warning", f"no rule group for {adl.value}")]
    size = params.window_sizes[adl]
    positives: list[PositiveWindow] = []
    for window in generate_windows(
        log.span, size, params.stride_minutes, tz, log.participant_id
    ):
        acts = window_activations(log, window, sensor_map, params)
        if not acts:
            continue
        items = frozenset(acts)
        matched = [r for r in rules if r.matches(items)]
        if not matched:
            continue
        matched_roles = frozenset().union(*(r.antecedent for r in matched))
        if adl is AdlKind.LeavingHouse and _suppress_departure(
            log, sensor_map, acts, matched_roles
        ):
            continue
        positives.append(
            PositiveWindow(
                window=window,
                rule_ids=tuple(sorted(r.id for r in matched)),
                activations={r: acts[r] for r in sorted(matched_roles) if r in acts},
            )
        )
    return positives, []


def merge_candidates(
    positives: Sequence[PositiveWindow], adl: AdlKind
) -> list[AdlEvent]:
    """Merge overlapping or touching positive windows into disjoint events.

    The merged extent runs from the earliest to the latest contributing
    activation inside the chained windows.
    """
    if not positives:
        return []
    ordered = sorted(positives, key=lambda p: p.window.start)
    events: list[AdlEvent] = []
    chain: list[PositiveWindow] = [ordered[0]]
    chain_end = ordered[0].window.end
    for pos in ordered[1:]:
        if pos.window.start <= chain_end:
            chain.append(pos)
            chain_end = max(chain_end, pos.window.end)
        else:
            events.append(_chain_to_event(chain, adl))
            chain = [pos]
            chain_end = pos.window.end
    events.append(_chain_to_event(chain, adl))
    return events


def _chain_to_event(chain: Sequence[PositiveWindow], adl: AdlKind) -> AdlEvent:
    times = [t for pos in chain for ts in pos.activations.values() for t in ts]
    items = frozenset(role for pos in chain for role in pos.activations)
    rule_ids = frozenset(rid for pos in chain for rid in pos.rule_ids)
    return AdlEvent(
        participant_id=chain[0].window.participant_id,
        adl=adl,
        start=min(times),
        end=max(times),
        contributing_items=items,
        rule_ids=rule_ids,
    )


def detect_all(
    log: EventLog,
    sensor_map: SensorMap,
    ruleset: RuleSet,
    params: Optional[MiningParams] = None,
    tz: Union[str, ZoneInfo] = "UTC",
) -> tuple[dict[AdlKind, list[AdlEvent]], list[Diagnostic]]:
    """Per-ADL detection timelines; different ADLs may overlap in time."""
    params = params or ruleset.params
    timelines: dict[AdlKind, list[AdlEvent]] = {}
    diagnostics: list[Diagnostic] = []
    for adl in AdlKind:
        positives, diags = detect_adl(log, sensor_map, ruleset, adl, params, tz)
        diagnostics.extend(diags)
        timelines[adl] = merge_candidates(positives, adl)
    return timelines, diagnostics


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def events_to_jsonl(timelines: Mapping[AdlKind, Sequence[AdlEvent]]) -> str:
    lines = []
    for adl in AdlKind:
        for event in timelines.get(adl, []):
            lines.append(json.dumps(event.to_dict(), sort_keys=True))
    return "".join(line + "\n" for line in lines)


def events_from_jsonl(text: str) -> list[AdlEvent]:
    return [AdlEvent.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def timeline_document(
    log: EventLog,
    sensor_map: SensorMap,
    timelines: Mapping[AdlKind, Sequence[AdlEvent]],
    range_from: Optional[datetime] = None,
    range_to: Optional[datetime] = None,
) -> dict:
    """Combined raw-sensor lanes + candidate ADL document for the briefing UI.

    One lane per physical sensor (a multi-sensor is one lane with per-event
    channels), categorised by sensor kind; candidates carry their rule ids so
    the UI can show why a window was flagged.
    """
    lo = range_from or log.span[0]
    hi = range_to or log.span[1]
    if lo > hi:
        raise ValueError("inverted timeline range")
    lanes: dict[str, dict] = {}
    for sid in sorted(log.sensor_inventory):
        lanes[sid] = {"sensor_id": sid, "kind": None, "events": []}
    for event in log.events_between(lo, hi + timedelta(milliseconds=1)):
        lane = lanes[event.sensor_id]
        lane["kind"] = event.kind.value
        lane["events"].append(
            {
                "t": format_timestamp(event.timestamp),
                "channel": event.channel,
                "value": event.value,
            }
        )
    for lane in lanes.values():
        if lane["kind"] is None:
            # sensor silent inside the range; kind from any event in the log
            for event in log.events:
                if event.sensor_id == lane["sensor_id"]:
                    lane["kind"] = event.kind.value
                    break
    roles = [
        {"sensor_id": sid, "channel": ch, "role": role}
        for (sid, ch), role in sorted(
            sensor_map.entries.items(), key=lambda kv: (kv[0][0], kv[0][1] or "")
        )
    ]
    candidates = []
    for adl in AdlKind:
        for event in timelines.get(adl, []):
            if event.start <= hi and event.end >= lo:
                candidates.append(event.to_dict())
    return {
        "schema_version": 1,
        "participant_id": log.participant_id,
        "from": format_timestamp(lo),
        "to": format_timestamp(hi),
        "lanes": [lanes[sid] for sid in sorted(lanes)],
        "roles": roles,
        "candidates": candidates,
    }
