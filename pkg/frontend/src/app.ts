/** Briefing app: wires the API client, view models and SVG rendering. */

import { ApiError, BriefingApi } from "./api.js";
import {
  ADL_COLORS,
  buildTimelineModel,
  fullRange,
  panViewport,
  zoomViewport,
  type TimelineModel,
  type Viewport,
} from "./model.js";
import { VerdictTray } from "./verdicts.js";
import type { AdlKind, Candidate, RuleSetDoc, TimelineDocument } from "./types.js";
import { ADL_KINDS } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 1200;
const LANE_H = 18;
const ADL_H = 22;

function svgEl<K extends keyof SVGElementTagNameMap>(
  name: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export class BriefingApp {
  private doc: TimelineDocument | null = null;
  private viewport: Viewport | null = null;
  private tray = new VerdictTray();
  private selected: Candidate | null = null;
  private participantId: string | null = null;
  private submittedSinceRemine = false;
  private status = "";

  constructor(
    private root: HTMLElement,
    private api: BriefingApi,
  ) {}

  async start(): Promise<void> {
    const { participants } = await this.api.participants();
    if (participants.length === 0) {
      this.root.textContent = "no participants loaded";
      return;
    }
    this.renderShell(participants.map((p) => p.participant_id));
    await this.selectParticipant(participants[0].participant_id);
  }

  async selectParticipant(pid: string): Promise<void> {
    this.participantId = pid;
    this.tray.clear();
    this.selected = null;
    this.doc = await this.api.timeline(pid);
    this.viewport = fullRange(this.doc);
    this.render();
  }

  private async refresh(): Promise<void> {
    if (!this.participantId) return;
    this.doc = await this.api.timeline(this.participantId);
    this.render();
  }

  // -- actions ---------------------------------------------------------------

  confirmSelected(): void {
    if (!this.selected) return this.note("select a candidate first");
    this.tray.stageConfirm(this.selected);
    this.render();
  }

  rejectSelected(): void {
    try {
      this.tray.stageReject(this.selected ?? undefined);
    } catch (err) {
      return this.note((err as Error).message);
    }
    this.render();
  }

  addOccurrence(adl: AdlKind, startIso: string, endIso: string): void {
    try {
      this.tray.stageAdd(adl, startIso, endIso || startIso);
    } catch (err) {
      return this.note((err as Error).message);
    }
    this.render();
  }

  async submit(briefingId: string): Promise<void> {
    if (!this.participantId || this.tray.size() === 0) {
      return this.note("nothing staged");
    }
    const batch = this.tray.toBatch();
    try {
      const { revision } = await this.api.postVerdicts(
        this.participantId,
        briefingId,
        batch,
      );
      this.tray.clear();
      this.submittedSinceRemine = true;
      this.note(`accepted ${batch.length} verdicts, revision ${revision}`);
      await this.refresh();
    } catch (err) {
      // roll the optimistic projection back: the tray stays for editing,
      // the display returns to the server state
      const message =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.note(`batch rejected - ${message}`);
      this.render(false);
    }
  }

  async remine(): Promise<void> {
    if (!this.participantId) return;
    try {
      const result = await this.api.remine(this.participantId);
      this.submittedSinceRemine = false;
      this.note(`re-mined: ${result.rules} rules, set ${result.ruleset_id.slice(0, 12)}`);
      await this.refresh();
    } catch (err) {
      const message =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.note(`re-mine failed - ${message}`);
    }
  }

  zoom(factor: number): void {
    if (!this.doc || !this.viewport) return;
    this.viewport = zoomViewport(this.viewport, factor, 0.5, fullRange(this.doc));
    this.render();
  }

  pan(deltaFraction: number): void {
    if (!this.doc || !this.viewport) return;
    this.viewport = panViewport(this.viewport, deltaFraction, fullRange(this.doc));
    this.render();
  }

  private note(message: string): void {
    this.status = message;
    const bar = this.root.querySelector("#status");
    if (bar) bar.textContent = message;
  }

  // -- rendering ---------------------------------------------------------------

  private renderShell(participantIds: string[]): void {
    this.root.replaceChildren();
    const bar = document.createElement("div");
    bar.className = "toolbar";

    const select = document.createElement("select");
    select.id = "participant";
    for (const pid of participantIds) {
      const option = document.createElement("option");
      option.value = pid;
      option.textContent = pid;
      select.appendChild(option);
    }
    select.onchange = () => void this.selectParticipant(select.value);
    bar.appendChild(select);

    const mkButton = (id: string, label: string, onClick: () => void) => {
      const button = document.createElement("button");
      button.id = id;
      button.textContent = label;
      button.onclick = onClick;
      bar.appendChild(button);
      return button;
    };
    mkButton("zoom-in", "zoom +", () => this.zoom(2));
    mkButton("zoom-out", "zoom -", () => this.zoom(0.5));
    mkButton("pan-left", "<", () => this.pan(-0.25));
    mkButton("pan-right", ">", () => this.pan(0.25));
    mkButton("confirm", "confirm", () => this.confirmSelected());
    mkButton("reject", "reject", () => this.rejectSelected());

    const adlSelect = document.createElement("select");
    adlSelect.id = "add-adl";
    for (const adl of ADL_KINDS) {
      const option = document.createElement("option");
      option.value = adl;
      option.textContent = adl;
      adlSelect.appendChild(option);
    }
    bar.appendChild(adlSelect);
    const addTime = document.createElement("input");
    addTime.id = "add-time";
    addTime.placeholder = "2024-03-04T08:10:00Z";
    bar.appendChild(addTime);
    mkButton("add", "add", () =>
      this.addOccurrence(adlSelect.value as AdlKind, addTime.value, addTime.value),
    );
    mkButton("submit", "submit batch", () => void this.submit("ui"));
    mkButton("remine", "re-mine", () => void this.remine());

    this.root.appendChild(bar);
    const status = document.createElement("div");
    status.id = "status";
    status.className = "status";
    this.root.appendChild(status);
    const tray = document.createElement("div");
    tray.id = "tray";
    this.root.appendChild(tray);
    const detail = document.createElement("div");
    detail.id = "detail";
    this.root.appendChild(detail);
    const chart = document.createElement("div");
    chart.id = "chart";
    this.root.appendChild(chart);
  }

  render(optimistic = true): void {
    if (!this.doc || !this.viewport) return;
    const pending = optimistic
      ? this.tray.pendingMarks(this.doc.participant_id)
      : undefined;
    const model = buildTimelineModel(this.doc, this.viewport, pending);
    this.renderTray();
    this.renderChart(model);
    const remineButton = this.root.querySelector<HTMLButtonElement>("#remine");
    if (remineButton) remineButton.disabled = !this.submittedSinceRemine;
  }

  private renderTray(): void {
    const tray = this.root.querySelector("#tray");
    if (!tray) return;
    tray.replaceChildren();
    this.tray.list().forEach((entry, index) => {
      const chip = document.createElement("span");
      chip.className = "chip";
      chip.textContent = entry.label + " ✕";
      chip.onclick = () => {
        this.tray.unstage(index);
        this.render();
      };
      tray.appendChild(chip);
    });
  }

  private async showDetail(candidate: Candidate): Promise<void> {
    this.selected = candidate;
    const panel = this.root.querySelector("#detail");
    if (!panel) return;
    panel.replaceChildren();
    const head = document.createElement("div");
    head.textContent =
      `${candidate.adl}  ${candidate.start} → ${candidate.end}  ` +
      `(items: ${candidate.contributing_items.join(", ")})`;
    panel.appendChild(head);
    if (this.doc?.active_ruleset) {
      try {
        const ruleset: RuleSetDoc = await this.api.ruleset(this.doc.active_ruleset);
        const all = Object.values(ruleset.rules).flat();
        for (const rid of candidate.rule_ids) {
          const rule = all.find((r) => r && r.id === rid);
          if (!rule) continue;
          const line = document.createElement("div");
          line.className = "rule";
          line.textContent =
            `rule ${rid.slice(0, 8)}: ${rule.antecedent.join(" AND ")} ⇒ ${rule.adl} ` +
            `(support ${rule.support.toFixed(3)}, confidence ${rule.confidence.toFixed(2)})`;
          panel.appendChild(line);
        }
      } catch {
        // detail panel is best-effort; the candidate itself is already shown
      }
    }
  }

  private renderChart(model: TimelineModel): void {
    const host = this.root.querySelector("#chart");
    if (!host) return;
    host.replaceChildren();
    if (model.empty) {
      const empty = document.createElement("div");
      empty.className = "empty-state";
      empty.textContent = "no data in this range";
      host.appendChild(empty);
      return;
    }

    const laneCount = model.categories.reduce((n, c) => n + c.lanes.length, 0);
    const height = 30 + laneCount * LANE_H + model.adlRows.length * ADL_H + 20;
    const svg = svgEl("svg", {
      viewBox: `0 0 ${WIDTH} ${height}`,
      width: "100%",
      "data-lanes": laneCount,
    });

    for (const band of model.weekends) {
      svg.appendChild(
        svgEl("rect", {
          x: 180 + band.x0 * (WIDTH - 190),
          y: 0,
          width: Math.max(1, (band.x1 - band.x0) * (WIDTH - 190)),
          height,
          class: "weekend",
        }),
      );
    }
    for (const tick of model.ticks) {
      const x = 180 + tick.x * (WIDTH - 190);
      svg.appendChild(svgEl("line", { x1: x, y1: 16, x2: x, y2: height, class: "tick" }));
      const label = svgEl("text", { x, y: 12, class: "tick-label" });
      label.textContent = tick.label;
      svg.appendChild(label);
    }

    let y = 30;
    for (const category of model.categories) {
      const caption = svgEl("text", { x: 4, y: y + 12, class: "category" });
      caption.textContent = category.label;
      svg.appendChild(caption);
      for (const lane of category.lanes) {
        const name = svgEl("text", { x: 64, y: y + 12, class: "lane-name" });
        name.textContent = lane.sensorId;
        svg.appendChild(name);
        for (const mark of lane.marks) {
          svg.appendChild(
            svgEl("circle", {
              cx: 180 + mark.x * (WIDTH - 190),
              cy: y + LANE_H / 2,
              r: 2,
              class: "mark",
            }),
          );
        }
        y += LANE_H;
      }
    }

    for (const row of model.adlRows) {
      const name = svgEl("text", { x: 4, y: y + 14, class: "adl-name" });
      name.textContent = row.adl;
      name.setAttribute("fill", row.color);
      svg.appendChild(name);
      for (const block of row.blocks) {
        const rect = svgEl("rect", {
          x: 180 + block.x0 * (WIDTH - 190),
          y: y + 3,
          width: Math.max(2, (block.x1 - block.x0) * (WIDTH - 190)),
          height: ADL_H - 6,
          rx: 2,
          fill: row.color,
          class: "candidate" + (block.pending ? ` pending-${block.pending}` : ""),
          "data-candidate": block.candidate.candidate_id,
        });
        rect.addEventListener("click", () => void this.showDetail(block.candidate));
        svg.appendChild(rect);
      }
      y += ADL_H;
    }

    host.appendChild(svg);
  }
}
