"""HTTP facade for the briefing loop.

Serves raw+candidate timelines, accepts annotation verdicts and triggers
re-mining. Persistence is an append-only JSONL annotation log plus immutable
rule-set JSON files keyed by content hash; replaying the log after a restart
reproduces the revision counter and the active rule sets exactly.

Endpoints (media type application/vnd.adlmine.v1+json):

* GET  /participants
* GET  /participants/{id}/timeline?from&to
* GET  /participants/{id}/labels?adl=        (debug: training labels)
* POST /participants/{id}/annotations        (atomic verdict batch)
* POST /remine?scope=pooled|<participant id>
* GET  /rulesets/{id}
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Mapping, Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse

from . import apriori, detect, ingest, windows
from .domain import (
    AdlKind,
    Annotation,
    MiningParams,
    SensorMap,
    Verdict,
    derive_sensor_map,
    format_timestamp,
    parse_timestamp,
)

MEDIA_TYPE = "application/vnd.adlmine.v1+json"


class ApiResponse(JSONResponse):
    media_type = MEDIA_TYPE


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class ServiceStore:
    """File-backed state: event logs, annotation log, rule sets, active ids.

    Mutations (annotation appends, re-mining) are serialized under one lock;
    reads work against plain immutable values and never observe a torn batch.
    """

    def __init__(
        self,
        data_dir: Path,
        params: Optional[MiningParams] = None,
        tz: str = "UTC",
    ):
        self.data_dir = Path(data_dir)
        self.params = params or MiningParams()
        self.tz = tz
        self._lock = threading.Lock()
        self.logs: dict[str, ingest.EventLog] = {}
        self.maps: dict[str, SensorMap] = {}
        self.annotations: dict[str, list[Annotation]] = {}
        self.revision = 0
        self.active: dict[str, Any] = {"pooled": None, "participants": {}}
        self.candidates: dict[str, tuple[str, Any]] = {}
        self._load()

    # -- loading -----------------------------------------------------------

    def _load(self) -> None:
        participants_dir = self.data_dir / "participants"
        if participants_dir.is_dir():
            for pdir in sorted(participants_dir.iterdir()):
                if not pdir.is_dir():
                    continue
                events_file = next(
                    (
                        pdir / name
                        for name in ("events.csv", "events.csv.gz", "events.jsonl")
                        if (pdir / name).exists()
                    ),
                    None,
                )
                if events_file is None:
                    continue
                events, _diags = ingest.parse_events(events_file)
                if not events:
                    continue
                log = ingest.build_log(events)
                self.logs[log.participant_id] = log
                map_file = pdir / "map.json"
                if map_file.exists():
                    self.maps[log.participant_id] = SensorMap.from_dict(
                        json.loads(map_file.read_text())
                    )
                else:
                    self.maps[log.participant_id] = derive_sensor_map(
                        log.participant_id, sorted(log.sensor_inventory)
                    )
        log_file = self._annotation_log_path()
        if log_file.exists():
            with open(log_file, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    ann = Annotation.from_dict(record["annotation"])
                    self.annotations.setdefault(ann.participant_id, []).append(ann)
                    self.revision = max(self.revision, int(record["revision"]))
        active_file = self.data_dir / "active.json"
        if active_file.exists():
            self.active = json.loads(active_file.read_text())

    def _annotation_log_path(self) -> Path:
        return self.data_dir / "annotations.jsonl"

    def _ruleset_path(self, ruleset_id: str) -> Path:
        return self.data_dir / "rulesets" / f"{ruleset_id}.json"

    # -- reads -------------------------------------------------------------

    def participants(self) -> list[dict]:
        out = []
        for pid in sorted(self.logs):
            log = self.logs[pid]
            out.append(
                {
                    "participant_id": pid,
                    "span": {
                        "from": format_timestamp(log.span[0]),
                        "to": format_timestamp(log.span[1]),
                    },
                    "logging_days": ingest.logging_days(log, self.tz),
                    "annotations": len(self.annotations.get(pid, [])),
                }
            )
        return out

    def active_ruleset_id(self, pid: str) -> Optional[str]:
        return self.active["participants"].get(pid) or self.active.get("pooled")

    def load_ruleset(self, ruleset_id: str) -> apriori.RuleSet:
        path = self._ruleset_path(ruleset_id)
        if not path.exists():
            raise ApiError(404, "ruleset_not_found", f"no ruleset {ruleset_id}")
        return apriori.RuleSet.from_dict(json.loads(path.read_text()))

    def _require_log(self, pid: str) -> ingest.EventLog:
        if pid not in self.logs:
            raise ApiError(404, "unknown_participant", f"no participant {pid}")
        return self.logs[pid]

    def candidates_for(self, pid: str) -> dict[AdlKind, list]:
        log = self._require_log(pid)
        rid = self.active_ruleset_id(pid)
        if rid is None:
            return {adl: [] for adl in AdlKind}
        ruleset = self.load_ruleset(rid)
        timelines, _diags = detect.detect_all(
            log, self.maps[pid], ruleset, ruleset.params, self.tz
        )
        for adl in AdlKind:
            for event in timelines[adl]:
                self.candidates[event.candidate_id] = (pid, event)
        return timelines

    def timeline(
        self, pid: str, range_from: Optional[str], range_to: Optional[str]
    ) -> dict:
        log = self._require_log(pid)
        lo = parse_timestamp(range_from) if range_from else None
        hi = parse_timestamp(range_to) if range_to else None
        if lo is not None and hi is not None and lo > hi:
            raise ApiError(400, "inverted_range", "from is after to")
        timelines = self.candidates_for(pid)
        doc = detect.timeline_document(log, self.maps[pid], timelines, lo, hi)
        doc["revision"] = self.revision
        doc["active_ruleset"] = self.active_ruleset_id(pid)
        return doc

    def labels_debug(self, pid: str, adl: AdlKind) -> dict:
        """Labeled transactions as the next mining run would see them."""
        log = self._require_log(pid)
        labeled, _unmapped, _diags = windows.build_training_transactions(
            log, self.maps[pid], self.annotations.get(pid, []), self.params, self.tz
        )
        return {
            "participant_id": pid,
            "adl": adl.value,
            "revision": self.revision,
            "transactions": [t.to_dict() for t in labeled[adl]],
        }

    # -- mutations ---------------------------------------------------------

    def _resolve_verdict(self, pid: str, verdict: Mapping) -> Annotation:
        try:
            kind = Verdict(verdict["verdict"])
        except (KeyError, ValueError):
            raise ApiError(
                422, "invalid_verdict", f"unknown verdict {verdict.get('verdict')!r}"
            )
        briefing_id = str(verdict.get("briefing_id", ""))
        note = verdict.get("note")
        if kind is Verdict.Rejected:
            cid = verdict.get("candidate_id")
            if not cid:
                raise ApiError(
                    422, "invalid_verdict", "rejected verdicts need a candidate_id"
                )
            if cid not in self.candidates:
                self.candidates_for(pid)  # lazily rebuild after a restart
            if cid not in self.candidates or self.candidates[cid][0] != pid:
                raise ApiError(
                    422, "unknown_candidate", f"candidate {cid} was never issued"
                )
            event = self.candidates[cid][1]
            return Annotation(
                participant_id=pid,
                adl=event.adl,
                start=event.start,
                end=event.end,
                verdict=kind,
                briefing_id=briefing_id,
                note=note,
                candidate_id=cid,
            )
        try:
            adl = AdlKind(verdict["adl"])
            if "at" in verdict:
                start = end = parse_timestamp(verdict["at"])
            else:
                start = parse_timestamp(verdict["start"])
                end = parse_timestamp(verdict.get("end", verdict["start"]))
        except (KeyError, ValueError) as exc:
            raise ApiError(422, "invalid_verdict", f"malformed verdict: {exc}")
        return Annotation(
            participant_id=pid,
            adl=adl,
            start=start,
            end=end,
            verdict=kind,
            briefing_id=briefing_id,
            note=note,
            candidate_id=verdict.get("candidate_id"),
        )

    def append_annotations(self, pid: str, verdicts: list[Mapping]) -> int:
        self._require_log(pid)
        if not verdicts:
            raise ApiError(422, "empty_batch", "no verdicts in batch")
        resolved = [self._resolve_verdict(pid, v) for v in verdicts]
        with self._lock:
            revision = self.revision + 1
            lines = "".join(
                json.dumps(
                    {"revision": revision, "annotation": ann.to_dict()},
                    sort_keys=True,
                )
                + "\n"
                for ann in resolved
            )
            path = self._annotation_log_path()
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(lines)
                fh.flush()
                os.fsync(fh.fileno())
            self.annotations.setdefault(pid, []).extend(resolved)
            self.revision = revision
        return revision

    def remine(self, scope: str) -> dict:
        with self._lock:
            if scope == "pooled":
                pids = sorted(p for p in self.logs if self.annotations.get(p))
                if not pids:
                    raise ApiError(409, "no_annotations", "no participant has annotations")
            else:
                if scope not in self.logs:
                    raise ApiError(404, "unknown_participant", f"no participant {scope}")
                if not self.annotations.get(scope):
                    raise ApiError(
                        409, "no_annotations", f"{scope} has no annotations yet"
                    )
                pids = [scope]
            labeled_by_pid = {}
            for pid in pids:
                labeled, _unmapped, _diags = windows.build_training_transactions(
                    self.logs[pid],
                    self.maps[pid],
                    self.annotations.get(pid, []),
                    self.params,
                    self.tz,
                )
                labeled_by_pid[pid] = labeled
            if scope == "pooled":
                ruleset, _diags2 = apriori.pool_and_mine(
                    labeled_by_pid, self.params, [self.maps[p] for p in pids]
                )
            else:
                ruleset, _diags2 = apriori.mine_adl_rules(
                    labeled_by_pid[scope], self.params, scope
                )
            rid = ruleset.content_hash()
            path = self._ruleset_path(rid)
            path.parent.mkdir(parents=True, exist_ok=True)
            if not path.exists():
                path.write_text(
                    json.dumps(ruleset.to_dict(), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8",
                )
            if scope == "pooled":
                self.active["pooled"] = rid
            else:
                self.active["participants"][scope] = rid
            tmp = self.data_dir / "active.json.tmp"
            tmp.write_text(json.dumps(self.active, sort_keys=True, indent=2) + "\n")
            tmp.replace(self.data_dir / "active.json")
        return {
            "ruleset_id": rid,
            "scope": ruleset.scope,
            "rules": len(ruleset.all_rules()),
        }


# ---------------------------------------------------------------------------
# FastAPI wiring
# ---------------------------------------------------------------------------

def create_app(store: ServiceStore) -> FastAPI:
    app = FastAPI(title="adlmine briefing service", default_response_class=ApiResponse)

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError):
        return ApiResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(HTTPException)
    async def handle_http_error(_req: Request, exc: HTTPException):
        return ApiResponse(
            status_code=exc.status_code,
            content={"code": "http_error", "message": str(exc.detail)},
        )

    @app.get("/participants")
    def list_participants():
        return {"participants": store.participants(), "revision": store.revision}

    @app.get("/participants/{pid}/timeline")
    def get_timeline(
        pid: str,
        range_from: Optional[str] = Query(None, alias="from"),
        range_to: Optional[str] = Query(None, alias="to"),
    ):
        return store.timeline(pid, range_from, range_to)

    @app.get("/participants/{pid}/labels")
    def get_labels(pid: str, adl: str):
        try:
            kind = AdlKind(adl)
        except ValueError:
            raise ApiError(422, "unknown_adl", f"unknown ADL {adl!r}")
        return store.labels_debug(pid, kind)

    @app.post("/participants/{pid}/annotations")
    def post_annotations(pid: str, body: dict):
        verdicts = body.get("verdicts")
        if not isinstance(verdicts, list):
            raise ApiError(422, "invalid_batch", "body needs a 'verdicts' list")
        briefing = body.get("briefing_id")
        if briefing:
            verdicts = [{**v, "briefing_id": v.get("briefing_id", briefing)} for v in verdicts]
        revision = store.append_annotations(pid, verdicts)
        return {"revision": revision, "accepted": len(verdicts)}

    @app.post("/remine")
    def post_remine(scope: str = "pooled"):
        return store.remine(scope)

    @app.get("/rulesets/{ruleset_id}")
    def get_ruleset(ruleset_id: str):
        ruleset = store.load_ruleset(ruleset_id)
        return ruleset.to_dict()

    return app
