import type { ChatResponse, DeviceSnapshot, ModelDescriptor, SessionCreated } from "./types.js";

export type Badge = "ok" | "fallback";

export interface Bubble {
  role: "user" | "assistant";
  text: string;
  badge?: Badge;
  reason?: string;
  latencySeconds?: number;
}

export interface Telemetry {
  model: ModelDescriptor | null;
  lastLatencySeconds: number | null;
  okCount: number;
  fallbackCount: number;
}

export interface ConsoleState {
  sessionId: string | null;
  devices: DeviceSnapshot[];
  transcript: Bubble[];
  telemetry: Telemetry;
  eventsCursor: number;
  banner: string | null;
  configError: string | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    devices: [],
    transcript: [],
    telemetry: { model: null, lastLatencySeconds: null, okCount: 0, fallbackCount: 0 },
    eventsCursor: 0,
    banner: null,
    configError: null,
  };
}

export function sessionStarted(state: ConsoleState, created: SessionCreated): ConsoleState {
  return {
    ...initialState(),
    telemetry: state.telemetry,
    sessionId: created.session_id,
    devices: created.devices,
  };
}

export function userSent(state: ConsoleState, text: string): ConsoleState {
  return { ...state, transcript: [...state.transcript, { role: "user", text }] };
}

function patchDevice(devices: DeviceSnapshot[], response: ChatResponse): DeviceSnapshot[] {
  const action = response.action;
  const newState = response.new_state;
  if (!action || !newState) {
    return devices;
  }
  return devices.map((device) =>
    device.entity_id === action.target_device
      ? { ...device, state: newState.state, attributes: newState.attributes }
      : device,
  );
}

// optimistic panel update for Ok; the next events poll reconciles against
// the server snapshot
export function chatArrived(state: ConsoleState, response: ChatResponse): ConsoleState {
  const ok = response.outcome === "Ok";
  const bubble: Bubble = {
    role: "assistant",
    text: response.response_text,
    badge: ok ? "ok" : "fallback",
    reason: response.reason,
    latencySeconds: response.latency_seconds,
  };
  return {
    ...state,
    devices: ok ? patchDevice(state.devices, response) : state.devices,
    transcript: [...state.transcript, bubble],
    telemetry: {
      model: response.model,
      lastLatencySeconds: response.latency_seconds,
      okCount: state.telemetry.okCount + (ok ? 1 : 0),
      fallbackCount: state.telemetry.fallbackCount + (ok ? 0 : 1),
    },
    banner: null,
  };
}

export function devicesReconciled(state: ConsoleState, devices: DeviceSnapshot[]): ConsoleState {
  return { ...state, devices };
}

export function eventsApplied(state: ConsoleState, cursor: number): ConsoleState {
  return cursor > state.eventsCursor ? { ...state, eventsCursor: cursor } : state;
}

export function bannerRaised(state: ConsoleState, banner: string): ConsoleState {
  return { ...state, banner };
}

export function sessionLost(state: ConsoleState, banner: string): ConsoleState {
  return { ...state, sessionId: null, banner };
}

export function configErrorSet(state: ConsoleState, message: string | null): ConsoleState {
  return { ...state, configError: message };
}
