/** Thin typed client for the briefing service; the UI holds no other state. */

import type {
  AdlKind,
  LabelsDocument,
  ParticipantInfo,
  RuleSetDoc,
  TimelineDocument,
  VerdictIn,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class BriefingApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        (body as { code?: string }).code ?? "http_error",
        (body as { message?: string }).message ?? response.statusText,
      );
    }
    return body as T;
  }

  async participants(): Promise<{ participants: ParticipantInfo[]; revision: number }> {
    return this.request("/participants");
  }

  async timeline(
    participantId: string,
    range?: { from?: string; to?: string },
  ): Promise<TimelineDocument> {
    const params = new URLSearchParams();
    if (range?.from) params.set("from", range.from);
    if (range?.to) params.set("to", range.to);
    const query = params.toString();
    return this.request(
      `/participants/${encodeURIComponent(participantId)}/timeline` +
        (query ? `?${query}` : ""),
    );
  }

  async labels(participantId: string, adl: AdlKind): Promise<LabelsDocument> {
    return this.request(
      `/participants/${encodeURIComponent(participantId)}/labels?adl=${adl}`,
    );
  }

  async postVerdicts(
    participantId: string,
    briefingId: string,
    verdicts: VerdictIn[],
  ): Promise<{ revision: number; accepted: number }> {
    return this.request(
      `/participants/${encodeURIComponent(participantId)}/annotations`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ briefing_id: briefingId, verdicts }),
      },
    );
  }

  async remine(
    scope: string,
  ): Promise<{ ruleset_id: string; scope: string; rules: number }> {
    return this.request(`/remine?scope=${encodeURIComponent(scope)}`, {
      method: "POST",
    });
  }

  async ruleset(rulesetId: string): Promise<RuleSetDoc> {
    return this.request(`/rulesets/${encodeURIComponent(rulesetId)}`);
  }
}
