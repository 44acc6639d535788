// Thin typed client over the backend JSON API. The dashboard does no
// prediction or state math of its own; everything displayed comes back
// through these calls.

export interface ModelInfo {
  model_id: string;
  order: number;
  vocab_size: number;
  event_count: number;
}

export interface SessionInfo {
  session_id: string;
  remaining: number;
}

export interface NextEvent {
  event: string;
  logprob: number;
  remaining: number;
}

export interface PredictResult {
  events: string[];
  logprobs: number[];
}

export interface BusEvent {
  seq_no: number;
  entity_id: string;
  old_state: string;
  new_state: string;
  cause: string;
}

export interface Violation {
  seq_no: number;
  rule_id: string;
  severity: string;
  description: string;
}

export interface ExecuteReport {
  applied: BusEvent[];
  automation_firings: BusEvent[];
  chain_limit_hits: number;
  violations: Violation[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorCode: string,
    message: string,
  ) {
    super(message);
  }
}

export interface Backend {
  listModels(): Promise<ModelInfo[]>;
  predict(modelId: string, history: string[], k: number, flavor: string): Promise<PredictResult>;
  createSession(modelId: string, history: string[], flavor: string, limit: number): Promise<SessionInfo>;
  nextEvent(sessionId: string): Promise<NextEvent>;
  deleteSession(sessionId: string): Promise<void>;
  execute(events: string[]): Promise<ExecuteReport>;
  state(): Promise<Record<string, string>>;
  events(since: number): Promise<BusEvent[]>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient implements Backend {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status} ${response.statusText}`;
      try {
        const payload = await response.json();
        code = payload.error_code ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request("GET", "/api/models");
  }

  predict(modelId: string, history: string[], k: number, flavor: string): Promise<PredictResult> {
    return this.request("POST", "/api/predict", {
      model_id: modelId,
      history,
      k,
      flavor,
    });
  }

  createSession(modelId: string, history: string[], flavor: string, limit: number): Promise<SessionInfo> {
    return this.request("POST", "/api/session", {
      model_id: modelId,
      history,
      flavor,
      limit,
    });
  }

  nextEvent(sessionId: string): Promise<NextEvent> {
    return this.request("POST", `/api/session/${sessionId}/next`);
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.request("DELETE", `/api/session/${sessionId}`);
  }

  execute(events: string[]): Promise<ExecuteReport> {
    return this.request("POST", "/api/execute", { scenario: events });
  }

  state(): Promise<Record<string, string>> {
    return this.request("GET", "/api/state");
  }

  events(since: number): Promise<BusEvent[]> {
    return this.request("GET", `/api/events?since=${since}`);
  }
}
