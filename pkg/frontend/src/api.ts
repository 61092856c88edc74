import type {
  FieldError,
  FollowupResponse,
  RunRecord,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public fieldErrors: FieldError[] = [],
    message?: string,
  ) {
    super(message ?? `request failed with HTTP ${status}`);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let fieldErrors: FieldError[] = [];
  let message: string | undefined;
  try {
    const body = await resp.json();
    if (Array.isArray(body?.errors)) fieldErrors = body.errors;
    if (typeof body?.error === "string") message = body.error;
  } catch {
    // non-JSON error bodies fall back to the status line
  }
  return new ApiError(resp.status, fieldErrors, message);
}

export class ApiClient {
  constructor(
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private base = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  listRuns(): Promise<{ runs: RunRecord[] }> {
    return this.request("/api/runs");
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.request(`/api/runs/${runId}`);
  }

  createRun(body: Record<string, unknown>): Promise<RunRecord> {
    return this.request("/api/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  selectIdeas(runId: string, ideaIds: string[]): Promise<RunRecord> {
    return this.request(`/api/runs/${runId}/select`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ idea_ids: ideaIds }),
    });
  }

  followup(runId: string, question: string): Promise<FollowupResponse> {
    return this.request(`/api/runs/${runId}/followup`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question }),
    });
  }

  artifact<T>(runId: string, path: string): Promise<T> {
    return this.request(`/api/runs/${runId}/artifacts/${path}`);
  }

  async artifactOrNull<T>(runId: string, path: string): Promise<T | null> {
    try {
      return await this.artifact<T>(runId, path);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    }
  }
}
