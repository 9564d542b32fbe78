"""Core data model shared by the whole toolkit.

Everything in here is an immutable value: events, windows, transactions,
rules, annotations and detected ADL events. Instances are safe to share
between threads and to use as dict keys where hashable.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Iterable, Mapping, Optional

UTC = timezone.utc

#: Channels a multi-environment ("6-in-1") sensor may report on.
MULTI_CHANNELS = ("humidity", "temperature", "light", "motion")


class SensorKind(Enum):
    Contact = "Contact"
    Motion = "Motion"
    SmartPlug = "SmartPlug"
    MultiEnvironment = "MultiEnvironment"


class AdlKind(Enum):
    EatingDrinking = "EatingDrinking"
    Dressing = "Dressing"
    Bathing = "Bathing"
    LeavingHouse = "LeavingHouse"


class Verdict(Enum):
    Confirmed = "Confirmed"
    Rejected = "Rejected"
    Added = "Added"


# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------

def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp into a UTC datetime at millisecond precision.

    A trailing ``Z`` is accepted as UTC. Naive timestamps are rejected so that
    files are unambiguous regardless of where they were written.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    dt = dt.astimezone(UTC)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def format_timestamp(dt: datetime) -> str:
    """Canonical wire form: UTC, ``Z`` suffix, milliseconds only when nonzero."""
    dt = dt.astimezone(UTC)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        return f"{base}.{dt.microsecond // 1000:03d}Z"
    return base + "Z"


def format_value(value: float) -> str:
    """Numeric wire form without a trailing ``.0`` on whole numbers."""
    if value == int(value):
        return str(int(value))
    return repr(value)


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensorEvent:
    participant_id: str
    sensor_id: str
    timestamp: datetime
    kind: SensorKind
    channel: Optional[str]
    value: float

    def sort_key(self) -> tuple:
        return (self.timestamp, self.sensor_id, self.channel or "", self.value)

    def to_dict(self) -> dict:
        return {
            "timestamp": format_timestamp(self.timestamp),
            "participant_id": self.participant_id,
            "sensor_id": self.sensor_id,
            "kind": self.kind.value,
            "channel": self.channel,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SensorEvent":
        return cls(
            participant_id=str(d["participant_id"]),
            sensor_id=str(d["sensor_id"]),
            timestamp=parse_timestamp(d["timestamp"]),
            kind=SensorKind(d["kind"]),
            channel=d.get("channel") or None,
            value=float(d["value"]),
        )


def validate_event(event: SensorEvent) -> Optional[str]:
    """Return a human-readable problem with the event, or None if well formed.

    Checks the channel rules (only multi-environment sensors carry one) and
    the per-kind value domains.
    """
    if event.kind is SensorKind.MultiEnvironment:
        if event.channel not in MULTI_CHANNELS:
            return f"multi-environment event needs a channel in {MULTI_CHANNELS}"
        if event.channel == "humidity" and not (0.0 <= event.value <= 100.0):
            return f"humidity {event.value} outside [0, 100]"
    else:
        if event.channel is not None:
            return f"{event.kind.value} event must not carry a channel"
        if event.kind is SensorKind.Contact and event.value not in (0.0, 1.0):
            return f"contact value {event.value} not in {{0, 1}}"
        if event.kind is SensorKind.Motion and event.value != 1.0:
            return f"motion value {event.value} != 1"
        if event.kind is SensorKind.SmartPlug and event.value < 0.0:
            return f"negative plug power {event.value}"
    if event.timestamp.tzinfo is None:
        return "timestamp is naive"
    return None


# ---------------------------------------------------------------------------
# Canonical role registry
# ---------------------------------------------------------------------------

#: Canonical role vocabulary and the ADL group(s) each role may indicate.
#: Role names are shared across homes so pooled rules transfer; an indexed
#: variant like ``StaplesPress2`` inherits the groups of its base name.
DEFAULT_ROLE_GROUPS: dict[str, frozenset[AdlKind]] = {
    # kitchen appliances and storage
    "Kettle": frozenset({AdlKind.EatingDrinking}),
    "Microwave": frozenset({AdlKind.EatingDrinking}),
    "Toaster": frozenset({AdlKind.EatingDrinking}),
    "Fridge": frozenset({AdlKind.EatingDrinking}),
    "CutleryDrawer": frozenset({AdlKind.EatingDrinking}),
    "CrockeryCupboard": frozenset({AdlKind.EatingDrinking}),
    "DelphPress": frozenset({AdlKind.EatingDrinking}),
    "StaplesPress": frozenset({AdlKind.EatingDrinking}),
    "PotsCupboard": frozenset({AdlKind.EatingDrinking}),
    "KitchenMotion": frozenset({AdlKind.EatingDrinking}),
    # bedroom storage
    "Wardrobe": frozenset({AdlKind.Dressing}),
    "UnderwearDrawer": frozenset({AdlKind.Dressing}),
    "DresserDrawer": frozenset({AdlKind.Dressing}),
    # bathroom multi-sensor
    "BathroomHumidity": frozenset({AdlKind.Bathing}),
    "BathroomMotion": frozenset({AdlKind.Bathing}),
    # external doors
    "FrontDoor": frozenset({AdlKind.LeavingHouse}),
    "PatioDoor": frozenset({AdlKind.LeavingHouse}),
    "BackDoor": frozenset({AdlKind.LeavingHouse}),
    # presence / furniture that indicates no ADL on its own
    "HallMotion": frozenset(),
    "LandingMotion": frozenset(),
    "HallPress": frozenset(),
    "GaragePress": frozenset(),
    "LinenPress": frozenset(),
}

_INDEX_SUFFIX = re.compile(r"\d+$")

#: Default physical layout used by the synthetic generator and by sensor-map
#: auto-derivation when no explicit map file is given: role -> (sensor_id,
#: kind, channel). Multi-environment sensors appear once per mapped channel.
ROLE_SENSORS: dict[str, tuple[str, SensorKind, Optional[str]]] = {
    "Kettle": ("kettle_plug", SensorKind.SmartPlug, None),
    "Microwave": ("microwave_plug", SensorKind.SmartPlug, None),
    "Toaster": ("toaster_plug", SensorKind.SmartPlug, None),
    "Fridge": ("fridge_door", SensorKind.Contact, None),
    "CutleryDrawer": ("cutlery_drawer", SensorKind.Contact, None),
    "CrockeryCupboard": ("crockery_cupboard", SensorKind.Contact, None),
    "DelphPress": ("delph_press", SensorKind.Contact, None),
    "StaplesPress": ("staples_press", SensorKind.Contact, None),
    "StaplesPress2": ("staples_press_2", SensorKind.Contact, None),
    "PotsCupboard": ("pots_cupboard", SensorKind.Contact, None),
    "KitchenMotion": ("kitchen_multi", SensorKind.MultiEnvironment, "motion"),
    "Wardrobe": ("wardrobe_door", SensorKind.Contact, None),
    "UnderwearDrawer": ("underwear_drawer", SensorKind.Contact, None),
    "DresserDrawer": ("dresser_drawer", SensorKind.Contact, None),
    "BathroomHumidity": ("bathroom_multi", SensorKind.MultiEnvironment, "humidity"),
    "BathroomMotion": ("bathroom_multi", SensorKind.MultiEnvironment, "motion"),
    "FrontDoor": ("front_door", SensorKind.Contact, None),
    "PatioDoor": ("patio_door", SensorKind.Contact, None),
    "BackDoor": ("back_door", SensorKind.Contact, None),
    "HallMotion": ("hall_motion", SensorKind.Motion, None),
    "LandingMotion": ("landing_motion", SensorKind.Motion, None),
    "HallPress": ("hall_press", SensorKind.Contact, None),
    "GaragePress": ("garage_press", SensorKind.Contact, None),
    "LinenPress": ("linen_press", SensorKind.Contact, None),
}


@dataclass(frozen=True)
class SensorMap:
    """Participant-specific mapping from physical sensors to canonical roles."""

    participant_id: str
    entries: Mapping[tuple[str, Optional[str]], str]
    role_groups: Mapping[str, frozenset[AdlKind]] = field(default_factory=dict)

    def groups_for(self, role: str) -> frozenset[AdlKind]:
        if role in self.role_groups:
            return frozenset(self.role_groups[role])
        if role in DEFAULT_ROLE_GROUPS:
            return DEFAULT_ROLE_GROUPS[role]
        base = _INDEX_SUFFIX.sub("", role).rstrip("_")
        if base in self.role_groups:
            return frozenset(self.role_groups[base])
        return DEFAULT_ROLE_GROUPS.get(base, frozenset())

    def roles(self) -> frozenset[str]:
        return frozenset(self.entries.values())

    def roles_for_group(self, adl: AdlKind) -> frozenset[str]:
        return frozenset(r for r in self.roles() if adl in self.groups_for(r))

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "entries": [
                {"sensor_id": sid, "channel": ch, "role": role}
                for (sid, ch), role in sorted(
                    self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1] or "")
                )
            ],
            "role_groups": {
                role: sorted(g.value for g in groups)
                for role, groups in sorted(self.role_groups.items())
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SensorMap":
        entries = {
            (e["sensor_id"], e.get("channel") or None): e["role"]
            for e in d.get("entries", [])
        }
        role_groups = {
            role: frozenset(AdlKind(g) for g in groups)
            for role, groups in d.get("role_groups", {}).items()
        }
        return cls(
            participant_id=str(d["participant_id"]),
            entries=entries,
            role_groups=role_groups,
        )


def canonical_role(
    sensor_map: SensorMap, sensor_id: str, channel: Optional[str] = None
) -> Optional[str]:
    """Look up the canonical role for a sensor (and channel).

    Total function: unmapped sensors yield None, which callers must count
    rather than silently drop.
    """
    return sensor_map.entries.get((sensor_id, channel or None))


def default_sensor_map(
    participant_id: str, roles: Optional[Iterable[str]] = None
) -> SensorMap:
    """Build a SensorMap over the default layout, optionally for a role subset."""
    wanted = set(roles) if roles is not None else set(ROLE_SENSORS)
    entries = {}
    for role in sorted(wanted):
        if role not in ROLE_SENSORS:
            raise ValueError(f"no default sensor layout for role {role!r}")
        sid, _kind, ch = ROLE_SENSORS[role]
        entries[(sid, ch)] = role
    return SensorMap(participant_id=participant_id, entries=entries)


def derive_sensor_map(participant_id: str, sensor_ids: Iterable[str]) -> SensorMap:
    """Best-effort map for logs that follow the default sensor naming.

    Sensors with unrecognised ids stay unmapped (and get tallied downstream).
    """
    by_sensor: dict[str, list[tuple[Optional[str], str]]] = {}
    for role, (sid, _kind, ch) in ROLE_SENSORS.items():
        by_sensor.setdefault(sid, []).append((ch, role))
    entries = {}
    for sid in sensor_ids:
        for ch, role in by_sensor.get(sid, []):
            entries[(sid, ch)] = role
    return SensorMap(participant_id=participant_id, entries=entries)


# ---------------------------------------------------------------------------
# Windows, transactions, rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    participant_id: str
    start: datetime
    size_minutes: int

    @property
    def end(self) -> datetime:
        return self.start + timedelta(minutes=self.size_minutes)

    def contains(self, instant: datetime) -> bool:
        return self.start <= instant < self.end

    def intersects(self, start: datetime, end: datetime) -> bool:
        """True when [start, end] (closed) meets this half-open window."""
        return self.start <= end and start < self.end


@dataclass(frozen=True)
class Transaction:
    window: Window
    items: frozenset[str]
    label: Optional[AdlKind] = None

    def to_dict(self) -> dict:
        return {
            "window_start": format_timestamp(self.window.start),
            "window_minutes": self.window.size_minutes,
            "items": sorted(self.items),
            "label": self.label.value if self.label else None,
        }


def rule_id(adl: AdlKind, antecedent: Iterable[str]) -> str:
    """Stable id for a rule: same (adl, antecedent) hashes identically forever."""
    payload = adl.value + "|" + ",".join(sorted(antecedent))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Rule:
    adl: AdlKind
    antecedent: frozenset[str]
    support: float
    confidence: float
    window_minutes: int

    @property
    def id(self) -> str:
        return rule_id(self.adl, self.antecedent)

    def matches(self, items: frozenset[str]) -> bool:
        return self.antecedent <= items

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "adl": self.adl.value,
            "antecedent": sorted(self.antecedent),
            "support": self.support,
            "confidence": self.confidence,
            "window_minutes": self.window_minutes,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Rule":
        return cls(
            adl=AdlKind(d["adl"]),
            antecedent=frozenset(d["antecedent"]),
            support=float(d["support"]),
            confidence=float(d["confidence"]),
            window_minutes=int(d["window_minutes"]),
        )


DEFAULT_WINDOW_SIZES: dict[AdlKind, int] = {
    AdlKind.EatingDrinking: 60,
    AdlKind.Bathing: 60,
    AdlKind.Dressing: 30,
    AdlKind.LeavingHouse: 30,
}


@dataclass(frozen=True)
class MiningParams:
    min_support: float = 0.15
    min_confidence: float = 0.5
    window_sizes: Mapping[AdlKind, int] = field(
        default_factory=lambda: dict(DEFAULT_WINDOW_SIZES)
    )
    stride_minutes: float = 5.0
    plug_on_watts: float = 5.0
    humidity_rise_delta: float = 5.0

    def validate(self) -> None:
        if not (0.0 < self.min_support <= 1.0):
            raise ValueError(f"min_support {self.min_support} outside (0, 1]")
        if not (0.0 < self.min_confidence <= 1.0):
            raise ValueError(f"min_confidence {self.min_confidence} outside (0, 1]")
        if self.stride_minutes <= 0:
            raise ValueError("stride must be positive")
        for adl, size in self.window_sizes.items():
            if size <= 0:
                raise ValueError(f"window size for {adl.value} must be positive")
            if self.stride_minutes > size:
                raise ValueError(
                    f"stride {self.stride_minutes} exceeds {adl.value} window {size}"
                )

    def to_dict(self) -> dict:
        return {
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "window_sizes": {
                adl.value: self.window_sizes[adl]
                for adl in AdlKind
                if adl in self.window_sizes
            },
            "stride_minutes": self.stride_minutes,
            "plug_on_watts": self.plug_on_watts,
            "humidity_rise_delta": self.humidity_rise_delta,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MiningParams":
        """Build params from a (possibly partial) JSON override of the defaults."""
        base = cls()
        sizes = dict(base.window_sizes)
        for key, val in d.get("window_sizes", {}).items():
            sizes[AdlKind(key)] = int(val)
        params = cls(
            min_support=float(d.get("min_support", base.min_support)),
            min_confidence=float(d.get("min_confidence", base.min_confidence)),
            window_sizes=sizes,
            stride_minutes=float(d.get("stride_minutes", base.stride_minutes)),
            plug_on_watts=float(d.get("plug_on_watts", base.plug_on_watts)),
            humidity_rise_delta=float(
                d.get("humidity_rise_delta", base.humidity_rise_delta)
            ),
        )
        params.validate()
        return params


# ---------------------------------------------------------------------------
# Annotations and detected events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Annotation:
    participant_id: str
    adl: AdlKind
    start: datetime
    end: datetime
    verdict: Verdict
    briefing_id: str
    note: Optional[str] = None
    candidate_id: Optional[str] = None

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("annotation interval is inverted")
        if self.verdict is Verdict.Rejected and not self.candidate_id:
            raise ValueError("rejected verdicts must reference a candidate id")

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "adl": self.adl.value,
            "start": format_timestamp(self.start),
            "end": format_timestamp(self.end),
            "verdict": self.verdict.value,
            "briefing_id": self.briefing_id,
            "note": self.note,
            "candidate_id": self.candidate_id,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Annotation":
        if "at" in d and "start" not in d:
            start = end = parse_timestamp(d["at"])
        else:
            start = parse_timestamp(d["start"])
            end = parse_timestamp(d.get("end", d["start"]))
        return cls(
            participant_id=str(d["participant_id"]),
            adl=AdlKind(d["adl"]),
            start=start,
            end=end,
            verdict=Verdict(d["verdict"]),
            briefing_id=str(d.get("briefing_id", "")),
            note=d.get("note"),
            candidate_id=d.get("candidate_id"),
        )


def candidate_id(
    participant_id: str, adl: AdlKind, start: datetime, end: datetime
) -> str:
    payload = "|".join(
        (participant_id, adl.value, format_timestamp(start), format_timestamp(end))
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class AdlEvent:
    participant_id: str
    adl: AdlKind
    start: datetime
    end: datetime
    contributing_items: frozenset[str]
    rule_ids: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("event interval is inverted")
        if not self.contributing_items:
            raise ValueError("event has no contributing items")

    @property
    def candidate_id(self) -> str:
        return candidate_id(self.participant_id, self.adl, self.start, self.end)

    def overlaps(self, other: "AdlEvent") -> bool:
        return self.start <= other.end and other.start <= self.end

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "adl": self.adl.value,
            "start": format_timestamp(self.start),
            "end": format_timestamp(self.end),
            "contributing_items": sorted(self.contributing_items),
            "rule_ids": sorted(self.rule_ids),
            "candidate_id": self.candidate_id,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AdlEvent":
        return cls(
            participant_id=str(d["participant_id"]),
            adl=AdlKind(d["adl"]),
            start=parse_timestamp(d["start"]),
            end=parse_timestamp(d["end"]),
            contributing_items=frozenset(d["contributing_items"]),
            rule_ids=frozenset(d.get("rule_ids", [])),
        )


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.severity}: {self.message}{where}"


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diagnostics)
