// In-process imitation of the assistant service: same routes, same payload
// shapes, scripted behavior for two commands. Tests own the instance and can
// poke sessions or fault injection directly.

import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import type { AddressInfo } from "node:net";

import type { ChatResponse, DeviceEvent, DeviceSnapshot } from "../src/types.js";

export const BLINDS_COMMAND = "reverse the master bedroom blinds";
export const SPEAKER_COMMAND = "speaker up";
export const FALLBACK_TEXT =
  "Sorry, I could not turn that into a device action. Nothing was changed.";

export const DEMO_PROMPT = `You are a home assistant. Answer briefly and emit one fenced action block.
Services: cover.close_cover(), cover.open_cover(), cover.toggle(), lock.lock(), lock.unlock(), media_player.volume_up(), switch.turn_off(), switch.turn_on(), timer.cancel(), vacuum.start()
Devices: media_player.harman_kardon_aura 'Harman Kardon Glass Speaker' = standby; vol=0.88
timer.kitchen_oven 'Kitchen oven timer' = active
lock.office_cabinet 'Office cabinet lock' = unlocked
cover.master_bedroom 'Master Bedroom' = closed
vacuum.hallway_neato 'Hallway path cleaner' = docked
switch.basement_lights 'Basement Lights Switch' = off`;

export const DUPLICATE_PROMPT = `${DEMO_PROMPT}
switch.basement_lights 'Basement Lights Again' = on`;

function defaultDevices(): DeviceSnapshot[] {
  return [
    { entity_id: "media_player.harman_kardon_aura", name: "Harman Kardon Glass Speaker", state: "standby", attributes: { vol: 0.88 } },
    { entity_id: "timer.kitchen_oven", name: "Kitchen oven timer", state: "active", attributes: {} },
    { entity_id: "lock.office_cabinet", name: "Office cabinet lock", state: "unlocked", attributes: {} },
    { entity_id: "cover.master_bedroom", name: "Master Bedroom", state: "closed", attributes: {} },
    { entity_id: "vacuum.hallway_neato", name: "Hallway path cleaner", state: "docked", attributes: {} },
    { entity_id: "switch.basement_lights", name: "Basement Lights Switch", state: "off", attributes: {} },
  ];
}

interface MockSession {
  devices: DeviceSnapshot[];
  events: DeviceEvent[];
}

interface ParsedDevices {
  devices?: DeviceSnapshot[];
  error?: string;
}

function parsePromptDevices(prompt: string): ParsedDevices {
  const lines = prompt.split("\n");
  const marker = lines.findIndex((line) => line.startsWith("Devices: "));
  if (marker < 0) {
    return { error: "missing Devices section" };
  }
  const rows = [lines[marker]!.slice("Devices: ".length), ...lines.slice(marker + 1)];
  const devices: DeviceSnapshot[] = [];
  const seen = new Set<string>();
  for (const [index, row] of rows.entries()) {
    const entity = row.split(" ", 1)[0] ?? "";
    const name = /'([^']*)'/.exec(row)?.[1] ?? entity;
    const statePart = row.split("= ")[1] ?? "";
    const [state, attrPart] = statePart.split("; ");
    if (seen.has(entity)) {
      return { error: `line ${marker + index + 1}: duplicate device ${entity}` };
    }
    seen.add(entity);
    const attributes: Record<string, number | string> = {};
    for (const pair of (attrPart ?? "").split(" ").filter(Boolean)) {
      const [key, raw] = pair.split("=");
      if (key && raw !== undefined) {
        attributes[key] = Number.isNaN(Number(raw)) ? raw : Number(raw);
      }
    }
    devices.push({ entity_id: entity, name, state: state ?? "", attributes });
  }
  return { devices };
}

const MODEL = { name: "mock-home", parameter_scale: "0.5B", quantization: "16-bit" };
const LATENCY = 0.42;

export class MockAssistant {
  private readonly server: Server;
  private readonly sessions = new Map<string, MockSession>();
  private nextId = 1;
  requestCount = 0;
  failNextChat = false;

  constructor() {
    this.server = createServer((request, response) => {
      void this.route(request, response);
    });
  }

  start(): Promise<string> {
    return new Promise((resolve) => {
      this.server.listen(0, "127.0.0.1", () => {
        const address = this.server.address() as AddressInfo;
        resolve(`http://127.0.0.1:${address.port}`);
      });
    });
  }

  close(): Promise<void> {
    return new Promise((resolve) => this.server.close(() => resolve()));
  }

  dropSession(sessionId: string): void {
    this.sessions.delete(sessionId);
  }

  snapshot(sessionId: string): DeviceSnapshot[] {
    return structuredClone(this.sessions.get(sessionId)!.devices);
  }

  private async route(request: IncomingMessage, response: ServerResponse): Promise<void> {
    this.requestCount += 1;
    const url = new URL(request.url ?? "/", "http://localhost");
    const chunks: Buffer[] = [];
    for await (const chunk of request) {
      chunks.push(chunk as Buffer);
    }
    const raw = Buffer.concat(chunks).toString("utf-8");

    const send = (status: number, body: unknown) => {
      response.writeHead(status, { "content-type": "application/json" });
      response.end(JSON.stringify(body));
    };
    const fail = (status: number, errorClass: string, message: string) =>
      send(status, { error: { class: errorClass, message } });

    if (request.method === "GET" && url.pathname === "/healthz") {
      return send(200, { status: "ok", model: MODEL });
    }
    if (request.method === "POST" && url.pathname === "/sessions") {
      return this.createSession(raw, send, fail);
    }

    const match = /^\/sessions\/([^/]+)\/(devices|events|chat)$/.exec(url.pathname);
    if (!match) {
      return fail(404, "NotFound", url.pathname);
    }
    const session = this.sessions.get(match[1]!);
    if (!session) {
      return fail(404, "UnknownSession", match[1]!);
    }
    if (match[2] === "devices") {
      return send(200, { devices: session.devices });
    }
    if (match[2] === "events") {
      const cursor = Math.max(0, Number(url.searchParams.get("cursor") ?? 0));
      return send(200, { events: session.events.slice(cursor), cursor: session.events.length });
    }
    if (this.failNextChat) {
      this.failNextChat = false;
      return fail(503, "BackendUnavailable", "backend went away");
    }
    const text = (JSON.parse(raw) as { text: string }).text;
    return send(200, this.chat(session, text));
  }

  private createSession(
    raw: string,
    send: (status: number, body: unknown) => void,
    fail: (status: number, errorClass: string, message: string) => void,
  ): void {
    let devices = defaultDevices();
    if (raw.trim()) {
      const body = JSON.parse(raw) as { system_prompt?: string; devices?: DeviceSnapshot[] };
      if (typeof body.system_prompt === "string") {
        const parsed = parsePromptDevices(body.system_prompt);
        if (parsed.error) {
          return fail(400, "InvalidHomeConfig", parsed.error);
        }
        devices = parsed.devices!;
      } else if (Array.isArray(body.devices)) {
        const seen = new Set<string>();
        for (const device of body.devices) {
          if (seen.has(device.entity_id)) {
            return fail(400, "InvalidHomeConfig", `duplicate device ${device.entity_id}`);
          }
          seen.add(device.entity_id);
        }
        devices = body.devices.map((d) => ({ attributes: {}, ...d }));
      }
    }
    const sessionId = `mock-${this.nextId++}`;
    this.sessions.set(sessionId, { devices, events: [] });
    send(201, { session_id: sessionId, devices });
  }

  private chat(session: MockSession, text: string): ChatResponse {
    const base = { latency_seconds: LATENCY, model: MODEL };
    let service: string | null = null;
    let target: string | null = null;
    if (text === BLINDS_COMMAND) {
      service = "cover.toggle";
      target = "cover.master_bedroom";
    } else if (text === SPEAKER_COMMAND) {
      service = "media_player.volume_up";
      target = "media_player.harman_kardon_aura";
    }
    const device = target ? session.devices.find((d) => d.entity_id === target) : undefined;
    if (!service || !target || !device) {
      return {
        ...base,
        outcome: "Fallback",
        response_text: FALLBACK_TEXT,
        reason: "NoActionBlock",
        events_cursor: session.events.length,
      };
    }
    const prior = device.state;
    if (service === "cover.toggle") {
      device.state = device.state === "closed" ? "open" : "closed";
    } else {
      const vol = Number(device.attributes["vol"] ?? 0);
      device.attributes["vol"] = Math.min(1, Math.round((vol + 0.1) * 100) / 100);
    }
    session.events.push({
      service,
      target_device: target,
      params: {},
      prior_state: prior,
      new_state: device.state,
      attributes: { ...device.attributes },
      timestamp: session.events.length + 1,
    });
    return {
      ...base,
      outcome: "Ok",
      response_text: `switching ${device.name} state as requested`,
      action: { service, target_device: target, params: {} },
      new_state: { state: device.state, attributes: { ...device.attributes } },
      events_cursor: session.events.length,
    };
  }
}
