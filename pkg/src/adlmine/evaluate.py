"""Score detections against ground truth and summarise detections.

Matching is greedy 1-to-1 by earliest start: transparent and easy to audit
by hand, at the cost of occasionally missing an optimal assignment.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import timedelta
from typing import Mapping, Optional, Sequence

from .apriori import RuleSet
from .domain import AdlKind, AdlEvent


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: tuple[tuple[AdlEvent, AdlEvent], ...] = ()


def _check_disjoint(events: Sequence[AdlEvent], name: str) -> None:
    ordered = sorted(events, key=lambda e: e.start)
    for a, b in zip(ordered, ordered[1:]):
        if a.end > b.start:
            raise ValueError(f"{name} events overlap: {a.candidate_id} / {b.candidate_id}")


def match_events(
    detected: Sequence[AdlEvent],
    truth: Sequence[AdlEvent],
    adl: AdlKind,
    window_minutes: int,
) -> MatchResult:
    """Greedy interval matching for one ADL.

    A detected/truth pair matches when their intervals overlap or their
    midpoints are within the ADL's window size. Each event is used at most
    once; detected events are processed in start order and take the earliest
    compatible truth event.
    """
    detected = [e for e in detected if e.adl is adl]
    truth = [e for e in truth if e.adl is adl]
    _check_disjoint(detected, "detected")
    _check_disjoint(truth, "truth")
    tolerance = timedelta(minutes=window_minutes)
    remaining = sorted(truth, key=lambda e: e.start)
    pairs = []
    fp = 0
    for det in sorted(detected, key=lambda e: e.start):
        hit = None
        for t in remaining:
            overlap = det.start <= t.end and t.start <= det.end
            mid_det = det.start + (det.end - det.start) / 2
            mid_t = t.start + (t.end - t.start) / 2
            if overlap or abs(mid_det - mid_t) <= tolerance:
                hit = t
                break
        if hit is not None:
            remaining.remove(hit)
            pairs.append((det, hit))
        else:
            fp += 1
    return MatchResult(tp=len(pairs), fp=fp, fn=len(remaining), pairs=tuple(pairs))


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall, F1 with the 0/0-means-perfect convention."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def counts_per_day(
    timelines: Mapping[AdlKind, Sequence[AdlEvent]], logging_days: int
) -> dict[AdlKind, float]:
    """Event counts normalised by the denominator the caller chose.

    Pass the participant's own logging-day count for self-normalisation, or
    the cohort's longest logging duration to compare across participants.
    """
    if logging_days < 1:
        raise ValueError("logging_days must be >= 1")
    return {adl: len(timelines.get(adl, [])) / logging_days for adl in AdlKind}


def proportions(counts: Mapping[AdlKind, float]) -> dict[AdlKind, float]:
    total = sum(counts.get(adl, 0.0) for adl in AdlKind)
    if total <= 0:
        raise ValueError("cannot compute proportions of all-zero counts")
    return {adl: counts.get(adl, 0.0) / total for adl in AdlKind}


def sensor_importance(
    ruleset: RuleSet, timelines: Mapping[AdlKind, Sequence[AdlEvent]]
) -> list[tuple[str, int, int]]:
    """Roles ranked by use: (role, rule appearances, detection triggers).

    Descending by trigger count, ties broken by rule appearances then name.
    Only roles that appear in some rule or some detection are listed.
    """
    rule_count: dict[str, int] = {}
    for rule in ruleset.all_rules():
        for role in rule.antecedent:
            rule_count[role] = rule_count.get(role, 0) + 1
    trigger_count: dict[str, int] = {}
    for adl in AdlKind:
        for event in timelines.get(adl, []):
            for role in event.contributing_items:
                trigger_count[role] = trigger_count.get(role, 0) + 1
    roles = set(rule_count) | set(trigger_count)
    ranked = sorted(
        (
            (role, rule_count.get(role, 0), trigger_count.get(role, 0))
            for role in roles
        ),
        key=lambda r: (-r[2], -r[1], r[0]),
    )
    return ranked


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def metrics_report(
    per_adl: Mapping[AdlKind, MatchResult],
) -> dict:
    report: dict = {"per_adl": {}, "overall": {}}
    tp = fp = fn = 0
    for adl in AdlKind:
        if adl not in per_adl:
            continue
        m = per_adl[adl]
        p, r, f1 = prf(m.tp, m.fp, m.fn)
        report["per_adl"][adl.value] = {
            "tp": m.tp,
            "fp": m.fp,
            "fn": m.fn,
            "precision": p,
            "recall": r,
            "f1": f1,
        }
        tp, fp, fn = tp + m.tp, fp + m.fp, fn + m.fn
    p, r, f1 = prf(tp, fp, fn)
    report["overall"] = {
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "precision": p,
        "recall": r,
        "f1": f1,
    }
    return report


def counts_csv(rows: Sequence[tuple[str, Mapping[AdlKind, float], int]]) -> str:
    """Per-day count table: one row per participant, one column per ADL."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["participant_id"] + [adl.value for adl in AdlKind] + ["logging_days"]
    )
    for pid, counts, days in rows:
        writer.writerow(
            [pid] + [f"{counts.get(adl, 0.0):.6f}" for adl in AdlKind] + [days]
        )
    return out.getvalue()


def proportions_csv(rows: Sequence[tuple[str, Mapping[AdlKind, float]]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["participant_id"] + [adl.value for adl in AdlKind])
    for pid, props in rows:
        writer.writerow([pid] + [f"{props.get(adl, 0.0):.6f}" for adl in AdlKind])
    return out.getvalue()
