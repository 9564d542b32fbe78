"""Batch entry point wiring the pipeline: ingest -> mine -> detect -> eval.

All pipeline state flows through files so runs are diffable and
reproducible; identical inputs produce byte-identical artifacts. Exit codes:
0 success, 1 data errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import apriori, detect, evaluate, ingest, synth, windows
from .domain import (
    AdlKind,
    Annotation,
    Diagnostic,
    MiningParams,
    SensorMap,
    derive_sensor_map,
    has_errors,
    parse_timestamp,
)

ENV_TZ = "ADLMINE_TZ"


def _default_tz(flag: Optional[str]) -> str:
    return flag or os.environ.get(ENV_TZ) or "UTC"


def _dump_json(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _print_diagnostics(diagnostics: Sequence[Diagnostic]) -> None:
    for d in diagnostics:
        print(str(d), file=sys.stderr)


def _load_log(path: str, fmt: Optional[str] = None):
    events, diags = ingest.parse_events(path, fmt)
    if not events:
        raise ValueError(f"no valid events in {path}")
    return ingest.build_log(events), diags


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _load_annotations(path: str) -> list[Annotation]:
    annotations = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                annotations.append(Annotation.from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                print(f"warning: bad annotation line {lineno}: {exc}", file=sys.stderr)
    return annotations


def _load_map(path: Optional[str], log: ingest.EventLog) -> SensorMap:
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            return SensorMap.from_dict(json.load(fh))
    return derive_sensor_map(log.participant_id, sorted(log.sensor_inventory))


def _load_params(path: Optional[str]) -> MiningParams:
    if not path:
        return MiningParams()
    with open(path, "r", encoding="utf-8") as fh:
        return MiningParams.from_dict(json.load(fh))


def _load_ruleset(path: str) -> apriori.RuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        return apriori.RuleSet.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    log, diags = _load_log(args.events, args.format)
    _print_diagnostics(diags)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(ingest.serialize_events(log.events, "csv"), encoding="utf-8")
    if args.report:
        tz = _default_tz(args.tz)
        report = {
            "participant_id": log.participant_id,
            "events": len(log.events),
            "span": [log.span[0].isoformat(), log.span[1].isoformat()],
            "logging_days": ingest.logging_days(log, tz),
            "timezone": tz,
            "sensor_inventory": sorted(log.sensor_inventory),
            "diagnostics": [str(d) for d in diags],
        }
        _dump_json(report, Path(args.report))
    return 1 if has_errors(diags) else 0


def cmd_synth(args) -> int:
    script = synth.load_script(args.script)
    if args.seed is not None:
        script = dataclasses.replace(script, seed=args.seed)
    log, truth = synth.generate(script, args.days)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "events.csv").write_text(
        ingest.serialize_events(log.events, "csv"), encoding="utf-8"
    )
    (out_dir / "truth.jsonl").write_text(
        "".join(json.dumps(t.to_dict(), sort_keys=True) + "\n" for t in truth),
        encoding="utf-8",
    )
    _dump_json(script.sensor_map().to_dict(), out_dir / "map.json")
    if args.annotate_days:
        from zoneinfo import ZoneInfo
        from datetime import datetime, timedelta

        zone = ZoneInfo(script.timezone)
        first = datetime.fromisoformat(script.start_date).replace(tzinfo=zone)
        cutoff = first + timedelta(days=args.annotate_days)
        annotations = synth.truth_to_annotations(truth, until=cutoff)
        (out_dir / "annotations.jsonl").write_text(
            "".join(json.dumps(a.to_dict(), sort_keys=True) + "\n" for a in annotations),
            encoding="utf-8",
        )
    return 0


def _training_transactions(events_path, annotations_path, map_path, params, tz):
    log, diags = _load_log(events_path)
    sensor_map = _load_map(map_path, log)
    annotations = _load_annotations(annotations_path) if annotations_path else []
    labeled, unmapped, label_diags = windows.build_training_transactions(
        log, sensor_map, annotations, params, tz
    )
    diags = list(diags) + list(label_diags)
    if unmapped:
        diags.append(
            Diagnostic(
                "warning",
                "unmapped sensor activity: "
                + ", ".join(f"{k}x{v}" for k, v in sorted(unmapped.items())),
            )
        )
    return labeled, sensor_map, diags, log.participant_id


def cmd_mine(args) -> int:
    params = _load_params(args.params)
    tz = _default_tz(args.tz)
    labeled, _map, diags, pid = _training_transactions(
        args.events, args.annotations, args.map, params, tz
    )
    ruleset, mine_diags = apriori.mine_adl_rules(labeled, params, pid)
    diags.extend(mine_diags)
    _print_diagnostics(diags)
    _dump_json(ruleset.to_dict(), Path(args.out))
    return 1 if has_errors(diags) else 0


def cmd_pool(args) -> int:
    params = _load_params(args.params)
    tz = _default_tz(args.tz)
    manifest_path = Path(args.manifest)
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    base = manifest_path.parent
    entries = manifest.get("participants", [])
    if not entries:
        return _fail("manifest lists no participants")

    def build(entry):
        labeled, smap, diags, _pid = _training_transactions(
            str(base / entry["events"]),
            str(base / entry["annotations"]) if entry.get("annotations") else None,
            str(base / entry["map"]) if entry.get("map") else None,
            params,
            tz,
        )
        return entry["id"], labeled, smap, diags

    all_diags: list[Diagnostic] = []
    labeled_by_pid = {}
    maps = []
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(build, entries))
    else:
        results = [build(e) for e in entries]
    for pid, labeled, smap, diags in sorted(results, key=lambda r: r[0]):
        labeled_by_pid[pid] = labeled
        maps.append(smap)
        all_diags.extend(diags)
    ruleset, pool_diags = apriori.pool_and_mine(labeled_by_pid, params, maps)
    all_diags.extend(pool_diags)
    _print_diagnostics(all_diags)
    _dump_json(ruleset.to_dict(), Path(args.out))
    return 1 if has_errors(all_diags) else 0


def cmd_detect(args) -> int:
    ruleset = _load_ruleset(args.rules)
    params = _load_params(args.params) if args.params else ruleset.params
    tz = _default_tz(args.tz)
    log, diags = _load_log(args.events)
    sensor_map = _load_map(args.map, log)
    timelines, det_diags = detect.detect_all(log, sensor_map, ruleset, params, tz)
    diags = list(diags) + list(det_diags)
    _print_diagnostics(diags)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(detect.events_to_jsonl(timelines), encoding="utf-8")
    return 1 if has_errors(diags) else 0


def cmd_eval(args) -> int:
    tz = _default_tz(args.tz)
    params = _load_params(args.params)
    with open(args.detected, "r", encoding="utf-8") as fh:
        detected = detect.events_from_jsonl(fh.read())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_pid: dict[str, dict[AdlKind, list]] = {}
    for event in detected:
        by_pid.setdefault(event.participant_id, {adl: [] for adl in AdlKind})[
            event.adl
        ].append(event)

    days_by_pid: dict[str, int] = {}
    if args.events:
        for path in args.events:
            log, _diags = _load_log(path)
            days_by_pid[log.participant_id] = ingest.logging_days(log, tz)
    denominator = dict(days_by_pid)
    if args.normalize_by == "longest" and days_by_pid:
        longest = max(days_by_pid.values())
        denominator = {pid: longest for pid in days_by_pid}

    count_rows = []
    prop_rows = []
    for pid in sorted(by_pid):
        days = denominator.get(pid, 1)
        counts = evaluate.counts_per_day(by_pid[pid], days)
        count_rows.append((pid, counts, days))
        try:
            prop_rows.append((pid, evaluate.proportions(counts)))
        except ValueError:
            pass
    (out_dir / "counts_per_day.csv").write_text(
        evaluate.counts_csv(count_rows), encoding="utf-8"
    )
    (out_dir / "proportions.csv").write_text(
        evaluate.proportions_csv(prop_rows), encoding="utf-8"
    )

    report: dict = {"participants": {}}
    if args.truth:
        with open(args.truth, "r", encoding="utf-8") as fh:
            truth = detect.events_from_jsonl(fh.read())
        truth_by_pid: dict[str, list] = {}
        for event in truth:
            truth_by_pid.setdefault(event.participant_id, []).append(event)
        for pid in sorted(set(by_pid) | set(truth_by_pid)):
            det_events = [e for evs in by_pid.get(pid, {}).values() for e in evs]
            results = {}
            for adl in AdlKind:
                results[adl] = evaluate.match_events(
                    det_events,
                    truth_by_pid.get(pid, []),
                    adl,
                    params.window_sizes[adl],
                )
            report["participants"][pid] = evaluate.metrics_report(results)
    _dump_json(report, out_dir / "metrics.json")
    return 0


def cmd_export_timeline(args) -> int:
    ruleset = _load_ruleset(args.rules)
    params = _load_params(args.params) if args.params else ruleset.params
    tz = _default_tz(args.tz)
    log, diags = _load_log(args.events)
    sensor_map = _load_map(args.map, log)
    timelines, det_diags = detect.detect_all(log, sensor_map, ruleset, params, tz)
    _print_diagnostics(list(diags) + list(det_diags))
    lo = parse_timestamp(args.range_from) if args.range_from else None
    hi = parse_timestamp(args.range_to) if args.range_to else None
    doc = detect.timeline_document(log, sensor_map, timelines, lo, hi)
    _dump_json(doc, Path(args.out))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceStore, create_app

    store = ServiceStore(
        Path(args.data_dir),
        params=_load_params(args.params),
        tz=_default_tz(args.tz),
    )
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adlmine",
        description="Detect activities of daily living from in-home sensor logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--tz", help=f"IANA timezone (default ${ENV_TZ} or UTC)")
        p.add_argument("--params", help="JSON file overriding mining parameters")

    p = sub.add_parser("ingest", help="validate and normalise a raw event log")
    p.add_argument("--events", required=True)
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--out", required=True, help="normalised canonical CSV")
    p.add_argument("--report", help="JSON summary path")
    p.add_argument("--tz", help=f"IANA timezone (default ${ENV_TZ} or UTC)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic home with ground truth")
    p.add_argument("--script", required=True, help="RoutineScript JSON")
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--seed", type=int, help="override the script seed")
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--annotate-days",
        type=int,
        help="also write confirmed annotations for the first N days",
    )
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine", help="mine per-participant rules from annotations")
    p.add_argument("--events", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--map", help="sensor map JSON (derived from ids when omitted)")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("pool", help="pool training data across participants and mine")
    p.add_argument("--manifest", required=True, help="cohort manifest JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    add_common(p)
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("detect", help="apply a rule set to an event log")
    p.add_argument("--events", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--map")
    p.add_argument("--out", required=True, help="AdlEvent JSONL")
    add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detections and write summary tables")
    p.add_argument("--detected", required=True, help="AdlEvent JSONL")
    p.add_argument("--truth", help="ground-truth AdlEvent JSONL")
    p.add_argument(
        "--events",
        nargs="*",
        help="event logs for logging-day denominators (one per participant)",
    )
    p.add_argument("--normalize-by", choices=["self", "longest"], default="self")
    p.add_argument("--out-dir", required=True)
    add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-timeline", help="combined raw + ADL timeline JSON")
    p.add_argument("--events", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--map")
    p.add_argument("--out", required=True)
    p.add_argument("--from", dest="range_from")
    p.add_argument("--to", dest="range_to")
    add_common(p)
    p.set_defaults(func=cmd_export_timeline)

    p = sub.add_parser("serve", help="run the briefing HTTP service")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    add_common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError, KeyError, MemoryError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
