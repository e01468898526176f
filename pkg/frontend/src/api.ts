/** Typed client for the capaplan HTTP API. */

export interface TranscriptTurn {
  role: "user" | "system";
  text: string;
}

export interface TripleLiteral {
  lit: string | number | boolean;
  datatype: string;
}

export interface TripleJson {
  s: string;
  p: string;
  o: { iri: string } | TripleLiteral;
}

export interface ConflictView {
  description: string;
  origins: string[];
  capabilities: string[];
}

export interface ProposalPayload {
  conflicts: ConflictView[];
  mutations: string[];
  diff: { inserted: TripleJson[]; deleted: TripleJson[] };
  rationale: string;
  targets_provided: boolean;
}

export interface PendingHitl {
  request_id: string;
  checkpoint: "confirm_goal" | "approve_adaptation" | "confirm_failure_update";
  payload: Record<string, unknown>;
}

export interface PlanStepView {
  index: number;
  capability: string;
  assignments: Record<string, string | number | boolean>;
}

export interface PlanResultView {
  verdict: "sat" | "unsat";
  plan?: {
    steps: PlanStepView[];
    initial_state: Record<string, string | number | boolean>;
  };
  diagnosis?: { core: string[]; origins: unknown[]; horizon_tried: number };
  conflict_pairs?: {
    goal_ordinal: number;
    capability: string;
    shared_properties: string[];
  }[];
}

export interface SessionView {
  session_id: string;
  status: string;
  intent: string | null;
  transcript: TranscriptTurn[];
  candidates: string[];
  confirmed_goal: string | null;
  last_result: PlanResultView | null;
  pending_hitl: PendingHitl | null;
  iteration: number;
  visited_nodes: string[];
}

export type Verdict = "approve" | "deny" | "modify";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parseResponse<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  async createSession(): Promise<SessionView> {
    const response = await fetch(`${this.baseUrl}/sessions`, { method: "POST" });
    return parseResponse<SessionView>(response);
  }

  async getSession(sessionId: string): Promise<SessionView> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}`);
    return parseResponse<SessionView>(response);
  }

  async sendMessage(sessionId: string, text: string): Promise<SessionView> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    return parseResponse<SessionView>(response);
  }

  async postDecision(
    sessionId: string,
    requestId: string,
    verdict: Verdict,
    payload?: Record<string, unknown>,
  ): Promise<SessionView> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/decisions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ request_id: requestId, verdict, payload: payload ?? null }),
    });
    return parseResponse<SessionView>(response);
  }

  async getPending(sessionId: string): Promise<PendingHitl | null> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/pending`);
    const body = await parseResponse<{ pending: PendingHitl | null }>(response);
    return body.pending;
  }

  async getEvents(sessionId: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/events`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }

  async getChangelog(): Promise<unknown[]> {
    const response = await fetch(`${this.baseUrl}/changelog`);
    return parseResponse<unknown[]>(response);
  }
}
