/** Wire types for the briefing service API. */

export type AdlKind = "EatingDrinking" | "Dressing" | "Bathing" | "LeavingHouse";

export type VerdictKind = "Confirmed" | "Rejected" | "Added";

export interface LaneEvent {
  t: string;
  channel: string | null;
  value: number;
}

export interface Lane {
  sensor_id: string;
  kind: string | null;
  events: LaneEvent[];
}

export interface RoleEntry {
  sensor_id: string;
  channel: string | null;
  role: string;
}

export interface Candidate {
  candidate_id: string;
  participant_id: string;
  adl: AdlKind;
  start: string;
  end: string;
  contributing_items: string[];
  rule_ids: string[];
}

export interface TimelineDocument {
  schema_version: number;
  participant_id: string;
  from: string;
  to: string;
  lanes: Lane[];
  roles: RoleEntry[];
  candidates: Candidate[];
  revision: number;
  active_ruleset: string | null;
}

export interface ParticipantInfo {
  participant_id: string;
  span: { from: string; to: string };
  logging_days: number;
  annotations: number;
}

export interface RuleDoc {
  id: string;
  adl: AdlKind;
  antecedent: string[];
  support: number;
  confidence: number;
  window_minutes: number;
}

export interface RuleSetDoc {
  schema_version: number;
  scope: string;
  content_hash: string;
  provenance: string[];
  rules: Partial<Record<AdlKind, RuleDoc[]>>;
}

export interface VerdictIn {
  verdict: VerdictKind;
  adl?: AdlKind;
  start?: string;
  end?: string;
  candidate_id?: string;
  note?: string;
}

export interface LabelledTransaction {
  window_start: string;
  window_minutes: number;
  items: string[];
  label: AdlKind | null;
}

export interface LabelsDocument {
  participant_id: string;
  adl: AdlKind;
  revision: number;
  transactions: LabelledTransaction[];
}

export const ADL_KINDS: AdlKind[] = [
  "EatingDrinking",
  "Dressing",
  "Bathing",
  "LeavingHouse",
];
