// Payload shapes of the assistant service HTTP API. The server is the only
// source of truth; nothing here re-parses model output.

export type AttributeValue = number | string;

export interface DeviceSnapshot {
  entity_id: string;
  name: string;
  state: string;
  attributes: Record<string, AttributeValue>;
}

export interface SessionCreated {
  session_id: string;
  devices: DeviceSnapshot[];
}

export interface ModelDescriptor {
  name: string;
  parameter_scale: string | null;
  quantization: string | null;
}

export interface ActionCall {
  service: string;
  target_device: string;
  params: Record<string, string>;
}

export interface NewState {
  state: string;
  attributes: Record<string, AttributeValue>;
}

export interface ChatResponse {
  outcome: "Ok" | "Fallback";
  response_text: string;
  latency_seconds: number;
  model: ModelDescriptor;
  events_cursor: number;
  action?: ActionCall;
  new_state?: NewState;
  reason?: string;
}

export interface DeviceEvent {
  service: string;
  target_device: string;
  params: Record<string, string>;
  prior_state: string;
  new_state: string;
  attributes: Record<string, AttributeValue>;
  timestamp: number;
}

export interface EventsPayload {
  events: DeviceEvent[];
  cursor: number;
}

export interface ServiceInfo {
  model: ModelDescriptor;
  backend_kind: string;
  backend_id: string;
  worker_threads: number;
  max_sequence_length: number;
  load_time_seconds: number;
}

export interface ApiErrorBody {
  error: { class: string; message: string };
}

// body of POST /sessions: omitted for the default home, pasted system-prompt
// text, or an explicit device/service listing
export type SessionRequest =
  | { system_prompt: string }
  | {
      devices: Array<{
        entity_id: string;
        name: string;
        state: string;
        attributes?: Record<string, AttributeValue>;
      }>;
      services: string[];
      preamble?: string;
    };
