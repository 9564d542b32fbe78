/** Pure view-model builders for the timeline: no DOM, fully unit-testable.
 *
 * Positions are fractions of the viewport width (0..1) so the renderer can
 * scale to any pixel size. The four sensor categories mirror the deployed
 * device classes; candidates overlay as one colour-coded row per ADL.
 */

import type { AdlKind, Candidate, TimelineDocument } from "./types.js";
import { ADL_KINDS } from "./types.js";

export interface Viewport {
  start: number; // ms epoch, inclusive
  end: number; // ms epoch, exclusive
}

export interface Mark {
  x: number;
  t: string;
  channel: string | null;
  value: number;
}

export interface LaneModel {
  sensorId: string;
  roles: string[];
  marks: Mark[];
}

export interface CategoryModel {
  kind: string;
  label: string;
  lanes: LaneModel[];
}

export interface CandidateBlock {
  x0: number;
  x1: number;
  candidate: Candidate;
  pending?: "confirm" | "reject" | "add";
}

export interface AdlRowModel {
  adl: AdlKind;
  color: string;
  blocks: CandidateBlock[];
}

export interface Band {
  x0: number;
  x1: number;
}

export interface Tick {
  x: number;
  label: string;
}

export interface TimelineModel {
  empty: boolean;
  viewport: Viewport;
  categories: CategoryModel[];
  adlRows: AdlRowModel[];
  weekends: Band[];
  ticks: Tick[];
}

export const CATEGORY_ORDER: Array<{ kind: string; label: string }> = [
  { kind: "Motion", label: "motion" },
  { kind: "MultiEnvironment", label: "environmental" },
  { kind: "SmartPlug", label: "electrical device use" },
  { kind: "Contact", label: "contact" },
];

export const ADL_COLORS: Record<AdlKind, string> = {
  EatingDrinking: "#e07a2f",
  Dressing: "#7d5bbe",
  Bathing: "#2f8fbf",
  LeavingHouse: "#3fa05a",
};

const DAY_MS = 24 * 60 * 60 * 1000;

export function parseTs(iso: string): number {
  return Date.parse(iso);
}

export function fullRange(doc: TimelineDocument): Viewport {
  return { start: parseTs(doc.from), end: parseTs(doc.to) + 1 };
}

export function toFraction(t: number, viewport: Viewport): number {
  return (t - viewport.start) / (viewport.end - viewport.start);
}

/** Zoom around a focus point given as a fraction of the viewport. */
export function zoomViewport(
  viewport: Viewport,
  factor: number,
  focusFraction: number,
  bounds: Viewport,
): Viewport {
  const width = viewport.end - viewport.start;
  const newWidth = Math.max(5 * 60 * 1000, width / factor);
  const focus = viewport.start + width * focusFraction;
  const start = focus - newWidth * focusFraction;
  return clampViewport({ start, end: start + newWidth }, bounds);
}

export function panViewport(
  viewport: Viewport,
  deltaFraction: number,
  bounds: Viewport,
): Viewport {
  const width = viewport.end - viewport.start;
  const delta = width * deltaFraction;
  return clampViewport(
    { start: viewport.start + delta, end: viewport.end + delta },
    bounds,
  );
}

export function clampViewport(viewport: Viewport, bounds: Viewport): Viewport {
  const width = Math.min(viewport.end - viewport.start, bounds.end - bounds.start);
  let start = viewport.start;
  if (start < bounds.start) start = bounds.start;
  if (start + width > bounds.end) start = bounds.end - width;
  return { start, end: start + width };
}

/** Snap an instant to the stride grid (5-minute ticks by default). */
export function snapToGrid(iso: string, minutes = 5): string {
  const step = minutes * 60 * 1000;
  const snapped = Math.round(Date.parse(iso) / step) * step;
  return new Date(snapped).toISOString().replace(".000Z", "Z");
}

export function weekendBands(viewport: Viewport): Band[] {
  const bands: Band[] = [];
  let day = Math.floor(viewport.start / DAY_MS) * DAY_MS;
  for (; day < viewport.end; day += DAY_MS) {
    const weekday = new Date(day).getUTCDay();
    if (weekday === 0 || weekday === 6) {
      const x0 = Math.max(0, toFraction(day, viewport));
      const x1 = Math.min(1, toFraction(day + DAY_MS, viewport));
      if (x1 > 0 && x0 < 1) bands.push({ x0, x1 });
    }
  }
  return bands;
}

export function dayTicks(viewport: Viewport): Tick[] {
  const ticks: Tick[] = [];
  const width = viewport.end - viewport.start;
  const step = width > 3 * DAY_MS ? DAY_MS : width > DAY_MS / 2 ? 6 * 60 * 60 * 1000 : 60 * 60 * 1000;
  let t = Math.ceil(viewport.start / step) * step;
  for (; t < viewport.end; t += step) {
    const date = new Date(t);
    const label =
      step >= DAY_MS
        ? date.toISOString().slice(5, 10)
        : date.toISOString().slice(11, 16);
    ticks.push({ x: toFraction(t, viewport), label });
  }
  return ticks;
}

export interface PendingMarks {
  rejected: Set<string>;
  confirmed: Set<string>;
  added: Candidate[];
}

/** Candidates as displayed: staged rejections hide, staged adds appear.
 *
 * This is the optimistic-update projection; rolling back is simply
 * re-projecting with an empty tray.
 */
export function projectCandidates(
  candidates: Candidate[],
  pending?: PendingMarks,
): Candidate[] {
  if (!pending) return candidates.slice();
  const kept = candidates.filter((c) => !pending.rejected.has(c.candidate_id));
  return kept.concat(pending.added);
}

export function buildTimelineModel(
  doc: TimelineDocument,
  viewport?: Viewport,
  pending?: PendingMarks,
): TimelineModel {
  const vp = viewport ?? fullRange(doc);
  const lanesWithEvents = doc.lanes.filter((lane) => lane.events.length > 0);
  const candidates = projectCandidates(doc.candidates, pending);
  const empty = lanesWithEvents.length === 0 && candidates.length === 0;

  const rolesBySensor = new Map<string, string[]>();
  for (const entry of doc.roles) {
    const existing = rolesBySensor.get(entry.sensor_id) ?? [];
    existing.push(entry.role);
    rolesBySensor.set(entry.sensor_id, existing.sort());
  }

  const categories: CategoryModel[] = [];
  for (const { kind, label } of CATEGORY_ORDER) {
    const lanes: LaneModel[] = [];
    for (const lane of doc.lanes) {
      if (lane.kind !== kind) continue;
      const marks: Mark[] = [];
      for (const event of lane.events) {
        const t = parseTs(event.t);
        if (t < vp.start || t >= vp.end) continue;
        marks.push({
          x: toFraction(t, vp),
          t: event.t,
          channel: event.channel,
          value: event.value,
        });
      }
      lanes.push({
        sensorId: lane.sensor_id,
        roles: rolesBySensor.get(lane.sensor_id) ?? [],
        marks,
      });
    }
    if (lanes.length > 0) categories.push({ kind, label, lanes });
  }

  const adlRows: AdlRowModel[] = ADL_KINDS.map((adl) => {
    const blocks: CandidateBlock[] = [];
    for (const candidate of candidates) {
      if (candidate.adl !== adl) continue;
      const start = parseTs(candidate.start);
      const end = parseTs(candidate.end);
      if (end < vp.start || start >= vp.end) continue;
      const x0 = Math.max(0, toFraction(start, vp));
      const x1 = Math.min(1, toFraction(end, vp));
      const block: CandidateBlock = {
        x0,
        x1: Math.max(x1, x0 + 0.002), // zero-length events stay clickable
        candidate,
      };
      if (pending?.confirmed.has(candidate.candidate_id)) block.pending = "confirm";
      if (pending?.added.includes(candidate)) block.pending = "add";
      blocks.push(block);
    }
    return { adl, color: ADL_COLORS[adl], blocks };
  });

  return {
    empty,
    viewport: vp,
    categories,
    adlRows,
    weekends: weekendBands(vp),
    ticks: dayTicks(vp),
  };
}
