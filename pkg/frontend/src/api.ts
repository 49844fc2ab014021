import type {
  ChatResponse,
  DeviceSnapshot,
  EventsPayload,
  ServiceInfo,
  SessionCreated,
  SessionRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorClass: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let errorClass = "HttpError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: { class?: string; message?: string } };
    if (body.error) {
      errorClass = body.error.class ?? errorClass;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, errorClass, message);
}

export class AssistantClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ApiError(0, "BackendUnavailable", String(cause));
    }
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  serviceInfo(): Promise<ServiceInfo> {
    return this.request("GET", "/config");
  }

  createSession(config?: SessionRequest): Promise<SessionCreated> {
    return this.request("POST", "/sessions", config);
  }

  devices(sessionId: string): Promise<{ devices: DeviceSnapshot[] }> {
    return this.request("GET", `/sessions/${sessionId}/devices`);
  }

  events(sessionId: string, cursor: number): Promise<EventsPayload> {
    return this.request("GET", `/sessions/${sessionId}/events?cursor=${cursor}`);
  }

  chat(sessionId: string, text: string): Promise<ChatResponse> {
    return this.request("POST", `/sessions/${sessionId}/chat`, { text });
  }
}
