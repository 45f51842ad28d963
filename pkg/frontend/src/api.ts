import type {
  AdvanceResponse,
  Diagnostic,
  InstanceRequest,
  InstanceResponse,
  SessionInfo,
  TemplateEntry,
  TemplateSchema,
  WorkflowInfo,
} from "./types";

export class ApiError extends Error {
  status: number;
  diagnostics: Diagnostic[];

  constructor(status: number, message: string, diagnostics: Diagnostic[] = []) {
    super(message);
    this.status = status;
    this.diagnostics = diagnostics;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let diagnostics: Diagnostic[] = [];
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (typeof detail === "string") {
      message = detail;
    } else if (detail?.message) {
      message = detail.message;
    }
    if (Array.isArray(detail?.diagnostics)) {
      diagnostics = detail.diagnostics;
      message = diagnostics.map((d) => d.message).join("; ") || message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, message, diagnostics);
}

/** Thin typed client over the service endpoints. */
export class ApiClient {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.text();
  }

  listTemplates(): Promise<TemplateEntry[]> {
    return this.request("/api/templates");
  }

  getSchema(iri: string): Promise<TemplateSchema> {
    return this.request(`/api/templates/${encodeURIComponent(iri)}/schema`);
  }

  createSession(): Promise<{ sessionId: string }> {
    return this.request("/api/sessions", { method: "POST" });
  }

  sessionInfo(sessionId: string): Promise<SessionInfo> {
    return this.request(`/api/sessions/${sessionId}`);
  }

  postInstance(sessionId: string, body: InstanceRequest): Promise<InstanceResponse> {
    return this.request(`/api/sessions/${sessionId}/instances`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getGraph(sessionId: string): Promise<string> {
    return this.requestText(`/api/sessions/${sessionId}/graph?format=ntriples`);
  }

  lintSession(sessionId: string): Promise<{ findings: Record<string, unknown[]> }> {
    return this.request(`/api/sessions/${sessionId}/lint`, { method: "POST" });
  }

  listWorkflows(): Promise<WorkflowInfo[]> {
    return this.request("/api/workflows");
  }

  advanceWorkflow(sessionId: string, name: string): Promise<AdvanceResponse> {
    return this.request(
      `/api/sessions/${sessionId}/workflow/${encodeURIComponent(name)}/advance`,
      { method: "POST" },
    );
  }
}
