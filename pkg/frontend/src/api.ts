/** Typed client for the puzzle HTTP API. */

export interface LevelListEntry {
  index: number;
  challenges: number;
}

export interface LevelsIndex {
  seed: number;
  generatorVersion: string;
  levels: LevelListEntry[];
}

export interface ChallengeView {
  challengeIndex: number;
  challengeWord: string;
  bonusPosition: number | null;
  timeBudgetSeconds: number;
}

export interface LevelDetail {
  index: number;
  challenges: ChallengeView[];
}

export interface CheckResult {
  isWord: boolean;
  wouldScore: number;
}

export type EventKind = "start" | "eliminate" | "solve" | "timeout";

export interface TraceEvent {
  sessionId: string;
  playerId: string;
  levelIndex: number;
  challengeIndex: number;
  kind: EventKind;
  timestampMs: number;
  originalIndex?: number;
  word?: string;
  score?: number;
}

export interface SessionSummary {
  sessionId: string;
  totalScore: number;
  endReason: string;
  challengesSolved: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The slice of the API the game screens need; lets tests stub the wire. */
export interface GameApi {
  levels(): Promise<LevelsIndex>;
  level(index: number): Promise<LevelDetail>;
  check(
    levelIndex: number,
    challengeIndex: number,
    remaining: string,
    eliminatedPositions: number[],
  ): Promise<CheckResult>;
  uploadTrace(events: TraceEvent[]): Promise<{ sessions: SessionSummary[] }>;
}

export class ApiClient implements GameApi {
  // the wrapper keeps `fetch` bound to the global scope; passing the bare
  // function loses the binding browsers require
  constructor(
    private readonly baseUrl = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async health(): Promise<string> {
    const res = await this.fetchFn(this.baseUrl + "/api/health");
    if (!res.ok) throw new ApiError(res.status, res.statusText);
    return res.text();
  }

  levels(): Promise<LevelsIndex> {
    return this.getJson("/api/levels");
  }

  level(index: number): Promise<LevelDetail> {
    return this.getJson(`/api/levels/${index}`);
  }

  check(
    levelIndex: number,
    challengeIndex: number,
    remaining: string,
    eliminatedPositions: number[],
  ): Promise<CheckResult> {
    return this.postJson("/api/check", {
      levelIndex,
      challengeIndex,
      remaining,
      eliminatedPositions,
    });
  }

  uploadTrace(events: TraceEvent[]): Promise<{ sessions: SessionSummary[] }> {
    return this.postJson("/api/traces", { events });
  }

  report(): Promise<Record<string, unknown>> {
    return this.getJson("/api/report");
  }

  private getJson<T>(path: string): Promise<T> {
    return this.request(path);
  }

  private postJson<T>(path: string, body: unknown): Promise<T> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await detailOf(res));
    }
    return (await res.json()) as T;
  }
}

async function detailOf(res: Response): Promise<string> {
  try {
    const body: unknown = await res.json();
    if (
      typeof body === "object" &&
      body !== null &&
      typeof (body as { detail?: unknown }).detail === "string"
    ) {
      return (body as { detail: string }).detail;
    }
  } catch {
    // not JSON; fall through to the status line
  }
  return res.statusText || `HTTP ${res.status}`;
}
