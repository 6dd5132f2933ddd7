// Typed client for the session service.  The shapes below mirror the
// service's JSON payloads field for field; nothing is renamed or
// post-processed, so whatever the console displays is exactly what the
// service said.

export interface MenuEntry {
  state: string;
  remaining: number | null;
}

export interface RoundView {
  round: number;
  officer: { id: string; type: string };
  menu: MenuEntry[];
  binding: string[];
  remaining: Record<string, number> | null;
}

export interface CommittedStep {
  officer: string;
  state: string;
}

export type SessionStatus = "awaiting-input" | "complete";

export interface SessionState {
  session_id: string;
  status: SessionStatus;
  round: number;
  committed: CommittedStep[];
  view: RoundView | null;
  allocation: Record<string, string> | null;
}

export interface SubmitResult {
  session_id: string;
  committed: CommittedStep;
  round: number;
  status: SessionStatus;
  view: RoundView | null;
  allocation: Record<string, string> | null;
}

export interface AuditVerdict {
  audit: string;
  status: "pass" | "fail" | "skipped";
  witness: unknown;
  detail: string;
}

export interface SessionReport {
  instance: string;
  mechanism: string;
  allocation: Record<string, string>;
  messages: unknown[] | null;
  verdicts: AuditVerdict[];
  steps: unknown[];
}

export interface CreateSessionBody {
  fixture?: string;
  instance?: Record<string, unknown>;
  disclosure?: "full" | "menu-only";
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    /** the menu the service expected, on invalid_ranking */
    public readonly menu?: string[],
    /** whose turn it actually is, on stale_round */
    public readonly expected?: string | null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type Fetcher = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let body: any = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON error body; keep the status line
  }
  const code = body && typeof body.code === "string" ? body.code : "error";
  const message =
    body && typeof body.message === "string"
      ? body.message
      : `request failed with status ${response.status}`;
  return new ApiError(response.status, code, message, body?.menu, body?.expected);
}

export class SessionApi {
  private readonly fetcher: Fetcher;

  constructor(
    public readonly base: string,
    fetcher?: Fetcher,
  ) {
    // fetch loses its window binding when stored, so wrap it
    this.fetcher = fetcher ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetcher(`${this.base}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(body: CreateSessionBody): Promise<SessionState> {
    return this.post<SessionState>("/sessions", body);
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${sessionId}`);
  }

  submitRanking(
    sessionId: string,
    officerId: string,
    ranking: string[],
  ): Promise<SubmitResult> {
    return this.post<SubmitResult>(`/sessions/${sessionId}/rankings`, {
      officer_id: officerId,
      ranking,
    });
  }

  getReport(sessionId: string): Promise<SessionReport> {
    return this.request<SessionReport>(`/sessions/${sessionId}/report`);
  }

  async listFixtures(): Promise<string[]> {
    const body = await this.request<{ fixtures: string[] }>("/fixtures");
    return body.fixtures;
  }
}
