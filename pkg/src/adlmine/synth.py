"""Deterministic synthetic smart-home generator.

Provides ground truth for training and evaluation at desk scale: scripted
daily routines emit their sensor signatures inside jittered occurrence
windows, spurious noise events stress rule precision, and the bathroom
humidity channel is synthesised as a baseline with an exponential rise and
decay around each scripted bath. Same seed, same bytes out.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta
from typing import Mapping, Optional, Sequence
from zoneinfo import ZoneInfo

from .domain import (
    UTC,
    AdlKind,
    AdlEvent,
    DEFAULT_ROLE_GROUPS,
    ROLE_SENSORS,
    SensorEvent,
    SensorKind,
    SensorMap,
    default_sensor_map,
)
from .ingest import EventLog, build_log


@dataclass(frozen=True)
class ScheduleEntry:
    adl: AdlKind
    at: str  # "HH:MM" local wall clock
    jitter_minutes: int
    duration_minutes: int
    signature: tuple[str, ...]
    skip_weekdays: tuple[int, ...] = ()  # 0=Monday .. 6=Sunday

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScheduleEntry":
        return cls(
            adl=AdlKind(d["adl"]),
            at=str(d["at"]),
            jitter_minutes=int(d.get("jitter_minutes", 0)),
            duration_minutes=int(d["duration_minutes"]),
            signature=tuple(d["signature"]),
            skip_weekdays=tuple(d.get("skip_weekdays", ())),
        )

    def to_dict(self) -> dict:
        return {
            "adl": self.adl.value,
            "at": self.at,
            "jitter_minutes": self.jitter_minutes,
            "duration_minutes": self.duration_minutes,
            "signature": list(self.signature),
            "skip_weekdays": list(self.skip_weekdays),
        }


@dataclass(frozen=True)
class CallerVisit:
    """Front-door confounder: the door opens but interior motion continues."""

    at: str
    jitter_minutes: int = 0
    door_role: str = "FrontDoor"
    motion_role: str = "HallMotion"
    skip_weekdays: tuple[int, ...] = ()

    @classmethod
    def from_dict(cls, d: Mapping) -> "CallerVisit":
        return cls(
            at=str(d["at"]),
            jitter_minutes=int(d.get("jitter_minutes", 0)),
            door_role=d.get("door_role", "FrontDoor"),
            motion_role=d.get("motion_role", "HallMotion"),
            skip_weekdays=tuple(d.get("skip_weekdays", ())),
        )

    def to_dict(self) -> dict:
        return {
            "at": self.at,
            "jitter_minutes": self.jitter_minutes,
            "door_role": self.door_role,
            "motion_role": self.motion_role,
            "skip_weekdays": list(self.skip_weekdays),
        }


@dataclass(frozen=True)
class RoutineScript:
    participant_id: str
    seed: int
    schedule: tuple[ScheduleEntry, ...]
    callers: tuple[CallerVisit, ...] = ()
    noise_per_hour: float = 0.0
    noise_roles: tuple[str, ...] = ("HallPress", "GaragePress", "LinenPress")
    presence_per_hour: float = 0.0
    presence_roles: tuple[str, ...] = ("HallMotion",)
    timezone: str = "UTC"
    start_date: str = "2024-03-04"  # a Monday
    humidity_baseline: float = 55.0
    humidity_peak: float = 75.0
    humidity_sample_minutes: int = 10
    reentry_motion_role: str = "HallMotion"

    def validate(self) -> None:
        for entry in self.schedule:
            for role in entry.signature:
                if role == "BathroomHumidity":
                    continue  # realised through the humidity trace
                groups = DEFAULT_ROLE_GROUPS.get(role)
                if groups is None or entry.adl not in groups:
                    raise ValueError(
                        f"signature role {role!r} is not mapped to the "
                        f"{entry.adl.value} group"
                    )
        for role in self.noise_roles + self.presence_roles:
            if role not in ROLE_SENSORS:
                raise ValueError(f"unknown noise role {role!r}")
        if self.noise_per_hour < 0 or self.presence_per_hour < 0:
            raise ValueError("noise rate must be >= 0")

    def all_roles(self) -> frozenset[str]:
        roles = {role for entry in self.schedule for role in entry.signature}
        roles.update(self.noise_roles)
        if self.presence_per_hour > 0:
            roles.update(self.presence_roles)
        roles.add(self.reentry_motion_role)
        for caller in self.callers:
            roles.add(caller.door_role)
            roles.add(caller.motion_role)
        if any(AdlKind.Bathing is e.adl for e in self.schedule):
            roles.add("BathroomHumidity")
        return frozenset(roles)

    def sensor_map(self) -> SensorMap:
        return default_sensor_map(self.participant_id, self.all_roles())

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "seed": self.seed,
            "timezone": self.timezone,
            "start_date": self.start_date,
            "noise_per_hour": self.noise_per_hour,
            "noise_roles": list(self.noise_roles),
            "presence_per_hour": self.presence_per_hour,
            "presence_roles": list(self.presence_roles),
            "humidity": {
                "baseline": self.humidity_baseline,
                "peak": self.humidity_peak,
                "sample_minutes": self.humidity_sample_minutes,
            },
            "reentry_motion_role": self.reentry_motion_role,
            "schedule": [e.to_dict() for e in self.schedule],
            "callers": [c.to_dict() for c in self.callers],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RoutineScript":
        humidity = d.get("humidity", {})
        script = cls(
            participant_id=str(d["participant_id"]),
            seed=int(d["seed"]),
            timezone=d.get("timezone", "UTC"),
            start_date=d.get("start_date", "2024-03-04"),
            noise_per_hour=float(d.get("noise_per_hour", 0.0)),
            noise_roles=tuple(d.get("noise_roles", ("HallPress", "GaragePress", "LinenPress"))),
            presence_per_hour=float(d.get("presence_per_hour", 0.0)),
            presence_roles=tuple(d.get("presence_roles", ("HallMotion",))),
            humidity_baseline=float(humidity.get("baseline", 55.0)),
            humidity_peak=float(humidity.get("peak", 75.0)),
            humidity_sample_minutes=int(humidity.get("sample_minutes", 10)),
            reentry_motion_role=d.get("reentry_motion_role", "HallMotion"),
            schedule=tuple(ScheduleEntry.from_dict(e) for e in d.get("schedule", [])),
            callers=tuple(CallerVisit.from_dict(c) for c in d.get("callers", [])),
        )
        script.validate()
        return script


def load_script(path) -> RoutineScript:
    with open(path, "r", encoding="utf-8") as fh:
        return RoutineScript.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _utc(epoch: float) -> datetime:
    return datetime.fromtimestamp(int(epoch), tz=UTC)


class _Emitter:
    def __init__(self, script: RoutineScript, rng: random.Random):
        self.script = script
        self.rng = rng
        self.events: list[SensorEvent] = []

    def _sensor(self, role: str) -> tuple[str, SensorKind, Optional[str]]:
        return ROLE_SENSORS[role]

    def emit(self, role: str, epoch: float, value: float) -> None:
        sid, kind, channel = self._sensor(role)
        self.events.append(
            SensorEvent(
                participant_id=self.script.participant_id,
                sensor_id=sid,
                timestamp=_utc(epoch),
                kind=kind,
                channel=channel,
                value=value,
            )
        )

    def activation(self, role: str, epoch: float) -> None:
        """One activation appropriate to the role's sensor kind."""
        _sid, kind, channel = self._sensor(role)
        if kind is SensorKind.Contact:
            self.emit(role, epoch, 1.0)
            self.emit(role, epoch + 10, 0.0)
        elif kind is SensorKind.SmartPlug:
            self.emit(role, epoch, round(self.rng.uniform(800.0, 2200.0), 1))
        elif kind is SensorKind.Motion:
            self.emit(role, epoch, 1.0)
        elif kind is SensorKind.MultiEnvironment and channel == "motion":
            self.emit(role, epoch, 1.0)
        else:
            raise ValueError(f"role {role!r} has no direct activation semantics")


def generate(
    script: RoutineScript, days: int
) -> tuple[EventLog, list[AdlEvent]]:
    """Synthesise an event log and its ground-truth ADL events.

    Deterministic for a given (script, days): every random draw comes from a
    single seeded stream consumed in a fixed order.
    """
    if days < 1:
        raise ValueError("days must be >= 1")
    script.validate()
    zone = ZoneInfo(script.timezone)
    rng = random.Random(script.seed)
    emitter = _Emitter(script, rng)
    first_day = date.fromisoformat(script.start_date)

    def local_epoch(day_index: int, hhmm: str = "00:00") -> float:
        d = first_day + timedelta(days=day_index)
        hh, mm = (int(p) for p in hhmm.split(":"))
        return datetime(d.year, d.month, d.day, hh, mm, tzinfo=zone).timestamp()

    truth: list[AdlEvent] = []
    baths: list[tuple[float, float]] = []
    absences: list[tuple[float, float]] = []

    for day in range(days):
        weekday = (first_day + timedelta(days=day)).weekday()
        for entry in script.schedule:
            if weekday in entry.skip_weekdays:
                continue
            jitter = rng.randint(-entry.jitter_minutes, entry.jitter_minutes) * 60
            start = local_epoch(day, entry.at) + jitter
            end = start + entry.duration_minutes * 60
            if entry.adl is AdlKind.LeavingHouse:
                _emit_departure(emitter, entry, start, end)
                absences.append((start, end))
            else:
                _emit_occurrence(emitter, entry, start, end, baths)
            truth.append(
                AdlEvent(
                    participant_id=script.participant_id,
                    adl=entry.adl,
                    start=_utc(start),
                    end=_utc(end),
                    contributing_items=frozenset(entry.signature),
                )
            )
        for caller in script.callers:
            if weekday in caller.skip_weekdays:
                continue
            jitter = rng.randint(-caller.jitter_minutes, caller.jitter_minutes) * 60
            at = local_epoch(day, caller.at) + jitter
            emitter.activation(caller.door_role, at)
            emitter.activation(caller.motion_role, at + 120)
            emitter.activation(caller.motion_role, at + 420)

    span_start = local_epoch(0)
    span_end = local_epoch(days)

    # Background in-home presence: motion while the occupant is actually home,
    # so presence roles do not spuriously correlate with scripted ADLs.
    presence_count = round(script.presence_per_hour * (span_end - span_start) / 3600.0)
    for _ in range(presence_count):
        at = span_start + rng.randrange(int(span_end - span_start))
        role = script.presence_roles[rng.randrange(len(script.presence_roles))]
        if any(s <= at <= e for s, e in absences):
            continue  # nobody home; draw is consumed to keep the stream stable
        emitter.activation(role, at)

    noise_count = round(script.noise_per_hour * (span_end - span_start) / 3600.0)
    for _ in range(noise_count):
        at = span_start + rng.randrange(int(span_end - span_start))
        role = script.noise_roles[rng.randrange(len(script.noise_roles))]
        emitter.activation(role, at)

    if "BathroomHumidity" in script.all_roles():
        _emit_humidity_trace(emitter, baths, span_start, span_end)

    log = build_log(emitter.events)
    truth.sort(key=lambda e: (e.adl.value, e.start))
    return log, truth


def _emit_occurrence(
    emitter: _Emitter,
    entry: ScheduleEntry,
    start: float,
    end: float,
    baths: list[tuple[float, float]],
) -> None:
    rng = emitter.rng
    span = max(1, int(end - start) - 30)
    for role in entry.signature:
        if role == "BathroomHumidity":
            baths.append((start, end))
            continue
        _sid, kind, channel = ROLE_SENSORS[role]
        if kind is SensorKind.SmartPlug:
            n = 2
        elif kind is SensorKind.Contact:
            n = 1 + rng.randrange(2)
        else:
            n = 1 + rng.randrange(3)
        offsets = sorted(rng.randrange(span) for _ in range(n))
        for off in offsets:
            emitter.activation(role, start + off)


def _emit_departure(
    emitter: _Emitter, entry: ScheduleEntry, start: float, end: float
) -> None:
    """Door opens on the way out, again on return, then interior motion."""
    for role in entry.signature:
        emitter.activation(role, start)
        emitter.activation(role, end - 30)
    emitter.activation(emitter.script.reentry_motion_role, end + 90)
    emitter.activation(emitter.script.reentry_motion_role, end + 300)


def _emit_humidity_trace(
    emitter: _Emitter,
    baths: Sequence[tuple[float, float]],
    span_start: float,
    span_end: float,
) -> None:
    script = emitter.script
    step = script.humidity_sample_minutes * 60
    swing = script.humidity_peak - script.humidity_baseline
    decay_tau = 25 * 60.0
    t = span_start
    while t < span_end:
        bump = 0.0
        for s, e in baths:
            rise_tau = max(1.0, (e - s) / 3.0)
            if s <= t <= e:
                bump = max(bump, swing * (1.0 - math.exp(-(t - s) / rise_tau)))
            elif t > e:
                attained = swing * (1.0 - math.exp(-(e - s) / rise_tau))
                bump = max(bump, attained * math.exp(-(t - e) / decay_tau))
        value = script.humidity_baseline + bump + emitter.rng.uniform(-0.4, 0.4)
        emitter.emit("BathroomHumidity", t, round(min(100.0, max(0.0, value)), 1))
        t += step


def demo_cohort(
    n: int = 5, noise_per_hour: float = 2.0, presence_per_hour: float = 1.5
) -> list[RoutineScript]:
    """Five varied synthetic participants sharing the canonical role vocabulary.

    Signatures overlap but differ per home (different appliances, doors and
    meal times) so pooled rules have to generalise rather than memorise.
    """
    eat = AdlKind.EatingDrinking
    cohorts = [
        dict(
            schedule=(
                ScheduleEntry(eat, "08:10", 10, 25, ("Kettle", "Fridge", "CutleryDrawer", "KitchenMotion")),
                ScheduleEntry(eat, "13:30", 10, 30, ("Microwave", "Fridge", "KitchenMotion")),
                ScheduleEntry(eat, "18:30", 20, 35, ("Kettle", "Toaster", "StaplesPress", "KitchenMotion")),
                ScheduleEntry(AdlKind.Bathing, "09:10", 10, 20, ("BathroomHumidity", "BathroomMotion")),
                ScheduleEntry(AdlKind.Dressing, "09:45", 10, 10, ("Wardrobe", "UnderwearDrawer")),
                ScheduleEntry(AdlKind.LeavingHouse, "10:45", 15, 120, ("FrontDoor",), skip_weekdays=(6,)),
            ),
            callers=(CallerVisit("15:00", 30, skip_weekdays=(0, 2, 4)),),
        ),
        dict(
            schedule=(
                ScheduleEntry(eat, "07:40", 10, 20, ("Toaster", "Fridge", "KitchenMotion")),
                ScheduleEntry(eat, "12:30", 15, 25, ("Kettle", "StaplesPress", "KitchenMotion")),
                ScheduleEntry(eat, "19:00", 15, 40, ("Microwave", "Fridge", "CrockeryCupboard", "KitchenMotion")),
                ScheduleEntry(AdlKind.Bathing, "21:30", 15, 25, ("BathroomHumidity", "BathroomMotion")),
                ScheduleEntry(AdlKind.Dressing, "08:15", 10, 10, ("Wardrobe", "DresserDrawer")),
                ScheduleEntry(AdlKind.LeavingHouse, "14:00", 20, 90, ("FrontDoor",), skip_weekdays=(2, 5)),
            ),
            callers=(CallerVisit("10:30", 20, skip_weekdays=(1, 3)),),
        ),
        dict(
            schedule=(
                ScheduleEntry(eat, "08:40", 15, 30, ("Kettle", "CrockeryCupboard", "KitchenMotion")),
                ScheduleEntry(eat, "13:30", 10, 25, ("Fridge", "CutleryDrawer", "KitchenMotion")),
                ScheduleEntry(eat, "18:00", 10, 30, ("Kettle", "Microwave", "KitchenMotion")),
                ScheduleEntry(AdlKind.Bathing, "07:50", 10, 15, ("BathroomHumidity", "BathroomMotion")),
                ScheduleEntry(AdlKind.Dressing, "08:20", 5, 10, ("Wardrobe", "UnderwearDrawer")),
                ScheduleEntry(AdlKind.LeavingHouse, "11:00", 20, 90, ("BackDoor",), skip_weekdays=(0, 6)),
            ),
            callers=(),
        ),
        dict(
            schedule=(
                ScheduleEntry(eat, "09:00", 20, 30, ("Kettle", "Fridge", "KitchenMotion")),
                ScheduleEntry(eat, "17:45", 20, 45, ("Toaster", "StaplesPress", "KitchenMotion")),
                ScheduleEntry(AdlKind.Bathing, "20:00", 20, 20, ("BathroomHumidity", "BathroomMotion")),
                ScheduleEntry(AdlKind.Dressing, "09:40", 10, 15, ("Wardrobe", "UnderwearDrawer")),
                ScheduleEntry(AdlKind.LeavingHouse, "15:30", 30, 60, ("FrontDoor",), skip_weekdays=(3,)),
            ),
            callers=(CallerVisit("11:00", 30, skip_weekdays=(5, 6)),),
        ),
        dict(
            schedule=(
                ScheduleEntry(eat, "08:00", 10, 25, ("Kettle", "Fridge", "CutleryDrawer", "KitchenMotion")),
                ScheduleEntry(eat, "13:00", 10, 20, ("Microwave", "KitchenMotion")),
                ScheduleEntry(eat, "19:15", 15, 30, ("Kettle", "Fridge", "KitchenMotion")),
                ScheduleEntry(AdlKind.Bathing, "08:45", 10, 20, ("BathroomHumidity", "BathroomMotion")),
                ScheduleEntry(AdlKind.Dressing, "09:20", 10, 10, ("Wardrobe", "UnderwearDrawer")),
                ScheduleEntry(AdlKind.LeavingHouse, "10:15", 15, 110, ("FrontDoor",), skip_weekdays=(1, 6)),
            ),
            callers=(CallerVisit("16:00", 30, skip_weekdays=(0, 4)),),
        ),
    ]
    scripts = []
    for i, spec_kwargs in enumerate(cohorts[:n], start=1):
        scripts.append(
            RoutineScript(
                participant_id=f"SYN{i:02d}",
                seed=100 + i,
                timezone="Europe/Dublin",
                noise_per_hour=noise_per_hour,
                presence_per_hour=presence_per_hour,
                **spec_kwargs,
            )
        )
    return scripts


def truth_to_annotations(
    truth: Sequence[AdlEvent],
    until: Optional[datetime] = None,
    briefing_id: str = "truth",
):
    """Confirmed annotations from ground truth, optionally only up to a cutoff.

    This stands in for the human briefing when training on synthetic data.
    """
    from .domain import Annotation, Verdict

    out = []
    for event in truth:
        if until is not None and event.start >= until:
            continue
        out.append(
            Annotation(
                participant_id=event.participant_id,
                adl=event.adl,
                start=event.start,
                end=event.end,
                verdict=Verdict.Confirmed,
                briefing_id=briefing_id,
            )
        )
    return out
