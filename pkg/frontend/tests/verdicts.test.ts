import { describe, expect, it } from "vitest";

import { VerdictTray } from "../src/verdicts.js";
import type { Candidate } from "../src/types.js";

const CAND: Candidate = {
  candidate_id: "abcd1234abcd1234",
  participant_id: "P1",
  adl: "EatingDrinking",
  start: "2024-03-04T08:05:00Z",
  end: "2024-03-04T08:25:00Z",
  contributing_items: ["Kettle", "Fridge"],
  rule_ids: ["r1"],
};

describe("VerdictTray", () => {
  it("builds one atomic batch with confirm, reject and add", () => {
    const tray = new VerdictTray();
    tray.stageConfirm(CAND);
    tray.stageReject({ ...CAND, candidate_id: "feedfeedfeedfeed" });
    tray.stageAdd("Bathing", "2024-03-04T09:31:00Z");
    const batch = tray.toBatch();
    expect(batch).toHaveLength(3);
    expect(batch[0].verdict).toBe("Confirmed");
    expect(batch[1]).toEqual({
      verdict: "Rejected",
      candidate_id: "feedfeedfeedfeed",
      note: undefined,
    });
    expect(batch[2].verdict).toBe("Added");
  });

  it("rejection requires a selected candidate (blocked client-side)", () => {
    const tray = new VerdictTray();
    expect(() => tray.stageReject(undefined)).toThrow(/select a candidate/);
    expect(tray.size()).toBe(0);
  });

  it("candidate ids round-trip unchanged into rejected verdicts", () => {
    const tray = new VerdictTray();
    tray.stageReject(CAND);
    expect(tray.toBatch()[0].candidate_id).toBe(CAND.candidate_id);
  });

  it("added occurrences snap to the 5-minute grid", () => {
    const tray = new VerdictTray();
    tray.stageAdd("Dressing", "2024-03-04T09:42:10Z", "2024-03-04T09:57:40Z");
    const batch = tray.toBatch();
    expect(batch[0].start).toBe("2024-03-04T09:40:00Z");
    expect(batch[0].end).toBe("2024-03-04T10:00:00Z");
  });

  it("rejects inverted added intervals", () => {
    const tray = new VerdictTray();
    expect(() =>
      tray.stageAdd("Dressing", "2024-03-04T10:00:00Z", "2024-03-04T09:00:00Z"),
    ).toThrow(/ends before/);
  });

  it("unstage and clear edit the tray", () => {
    const tray = new VerdictTray();
    tray.stageConfirm(CAND);
    tray.stageAdd("Bathing", "2024-03-04T09:30:00Z");
    tray.unstage(0);
    expect(tray.size()).toBe(1);
    expect(tray.list()[0].kind).toBe("Added");
    tray.clear();
    expect(tray.size()).toBe(0);
  });

  it("projects pending marks for optimistic rendering", () => {
    const tray = new VerdictTray();
    tray.stageConfirm(CAND);
    tray.stageReject({ ...CAND, candidate_id: "feedfeedfeedfeed" });
    tray.stageAdd("Bathing", "2024-03-04T09:30:00Z", "2024-03-04T09:50:00Z");
    const pending = tray.pendingMarks("P1");
    expect(pending.confirmed.has(CAND.candidate_id)).toBe(true);
    expect(pending.rejected.has("feedfeedfeedfeed")).toBe(true);
    expect(pending.added).toHaveLength(1);
    expect(pending.added[0].adl).toBe("Bathing");
  });
});
