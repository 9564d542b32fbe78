/** Verdict staging tray: validate locally, submit as one atomic batch.
 *
 * Rejections must reference a displayed candidate (the id round-trips
 * unchanged); added occurrences snap to the 5-minute stride grid. The tray
 * is the only client-side state and is discarded once the server accepts
 * the batch, so the server can always reconstruct what the UI shows.
 */

import type { AdlKind, Candidate, VerdictIn } from "./types.js";
import type { PendingMarks } from "./model.js";
import { snapToGrid } from "./model.js";

export interface StagedVerdict {
  kind: "Confirmed" | "Rejected" | "Added";
  adl: AdlKind;
  start: string;
  end: string;
  candidateId?: string;
  note?: string;
  label: string;
}

export class VerdictTray {
  private staged: StagedVerdict[] = [];

  list(): readonly StagedVerdict[] {
    return this.staged;
  }

  size(): number {
    return this.staged.length;
  }

  stageConfirm(candidate: Candidate, note?: string): StagedVerdict {
    const entry: StagedVerdict = {
      kind: "Confirmed",
      adl: candidate.adl,
      start: candidate.start,
      end: candidate.end,
      candidateId: candidate.candidate_id,
      note,
      label: `confirm ${candidate.adl} @ ${candidate.start}`,
    };
    this.staged.push(entry);
    return entry;
  }

  stageReject(candidate: Candidate | undefined, note?: string): StagedVerdict {
    if (!candidate) {
      throw new Error("select a candidate to reject");
    }
    const entry: StagedVerdict = {
      kind: "Rejected",
      adl: candidate.adl,
      start: candidate.start,
      end: candidate.end,
      candidateId: candidate.candidate_id,
      note,
      label: `reject ${candidate.adl} @ ${candidate.start}`,
    };
    this.staged.push(entry);
    return entry;
  }

  stageAdd(adl: AdlKind, startIso: string, endIso?: string, note?: string): StagedVerdict {
    const start = snapToGrid(startIso);
    const end = snapToGrid(endIso ?? startIso);
    if (Date.parse(end) < Date.parse(start)) {
      throw new Error("added occurrence ends before it starts");
    }
    const entry: StagedVerdict = {
      kind: "Added",
      adl,
      start,
      end,
      note,
      label: `add ${adl} @ ${start}`,
    };
    this.staged.push(entry);
    return entry;
  }

  unstage(index: number): void {
    this.staged.splice(index, 1);
  }

  clear(): void {
    this.staged = [];
  }

  /** Wire form of the batch; rejections carry only their candidate id. */
  toBatch(): VerdictIn[] {
    return this.staged.map((entry) => {
      if (entry.kind === "Rejected") {
        return {
          verdict: "Rejected",
          candidate_id: entry.candidateId,
          note: entry.note,
        };
      }
      return {
        verdict: entry.kind,
        adl: entry.adl,
        start: entry.start,
        end: entry.end,
        candidate_id: entry.candidateId,
        note: entry.note,
      };
    });
  }

  /** Projection of the tray for optimistic rendering. */
  pendingMarks(participantId: string): PendingMarks {
    const rejected = new Set<string>();
    const confirmed = new Set<string>();
    const added: Candidate[] = [];
    for (const entry of this.staged) {
      if (entry.kind === "Rejected" && entry.candidateId) {
        rejected.add(entry.candidateId);
      } else if (entry.kind === "Confirmed" && entry.candidateId) {
        confirmed.add(entry.candidateId);
      } else if (entry.kind === "Added") {
        added.push({
          candidate_id: `staged-${added.length}`,
          participant_id: participantId,
          adl: entry.adl,
          start: entry.start,
          end: entry.end,
          contributing_items: [],
          rule_ids: [],
        });
      }
    }
    return { rejected, confirmed, added };
  }
}
