import { afterAll, beforeAll, beforeEach, describe, expect, it } from "vitest";

import { AssistantClient } from "../src/api.js";
import { Console } from "../src/console.js";
import {
  BLINDS_COMMAND,
  DEMO_PROMPT,
  DUPLICATE_PROMPT,
  FALLBACK_TEXT,
  MockAssistant,
  SPEAKER_COMMAND,
} from "./mockAssistant.js";

let mock: MockAssistant;
let baseUrl: string;

beforeAll(async () => {
  mock = new MockAssistant();
  baseUrl = await mock.start();
});

afterAll(async () => {
  await mock.close();
});

function card(console_: Console, entityId: string) {
  return console_.state.devices.find((d) => d.entity_id === entityId);
}

describe("console", () => {
  let console_: Console;

  beforeEach(async () => {
    console_ = new Console(new AssistantClient(baseUrl));
    await console_.configureHome("");
  });

  it("starts the default home with six cards", () => {
    expect(console_.state.sessionId).not.toBeNull();
    expect(console_.state.devices).toHaveLength(6);
    expect(card(console_, "cover.master_bedroom")?.state).toBe("closed");
  });

  it("flips the cover card after the blinds command, within one poll", async () => {
    await console_.send(BLINDS_COMMAND);

    // optimistic update straight from the chat response
    expect(card(console_, "cover.master_bedroom")?.state).toBe("open");
    const bubbles = console_.state.transcript;
    expect(bubbles.map((b) => b.role)).toEqual(["user", "assistant"]);
    expect(bubbles[1]?.badge).toBe("ok");
    expect(console_.state.telemetry.lastLatencySeconds).toBeCloseTo(0.42);
    expect(console_.state.telemetry.model?.name).toBe("mock-home");

    // one poll reconciles the panel with the server snapshot
    await console_.poll();
    expect(console_.state.eventsCursor).toBe(1);
    expect(console_.state.devices).toEqual(mock.snapshot(console_.state.sessionId!));
  });

  it("increments the event count by exactly one per Ok response", async () => {
    await console_.send(BLINDS_COMMAND);
    await console_.poll();
    expect(console_.state.eventsCursor).toBe(1);
    await console_.send(SPEAKER_COMMAND);
    await console_.poll();
    expect(console_.state.eventsCursor).toBe(2);
  });

  it("renders fallback with a badge and no state delta", async () => {
    const before = structuredClone(console_.state.devices);
    await console_.send("please do the macarena");

    const bubble = console_.state.transcript.at(-1);
    expect(bubble?.badge).toBe("fallback");
    expect(bubble?.reason).toBe("NoActionBlock");
    expect(bubble?.text).toBe(FALLBACK_TEXT);
    expect(console_.state.devices).toEqual(before);
    expect(console_.state.telemetry.fallbackCount).toBe(1);

    await console_.poll();
    expect(console_.state.eventsCursor).toBe(0);
    expect(console_.state.devices).toEqual(before);
  });

  it("creates six cards from pasted system-prompt text", async () => {
    const previous = console_.state.sessionId;
    await console_.configureHome(DEMO_PROMPT);
    expect(console_.state.sessionId).not.toBe(previous);
    expect(console_.state.devices).toHaveLength(6);
    expect(console_.state.devices.map((d) => d.entity_id)).toEqual([
      "media_player.harman_kardon_aura",
      "timer.kitchen_oven",
      "lock.office_cabinet",
      "cover.master_bedroom",
      "vacuum.hallway_neato",
      "switch.basement_lights",
    ]);
    expect(card(console_, "media_player.harman_kardon_aura")?.attributes["vol"]).toBe(0.88);
  });

  it("shows duplicate-device paste as an inline error and keeps the session", async () => {
    const previous = console_.state.sessionId;
    const panel = structuredClone(console_.state.devices);
    await console_.configureHome(DUPLICATE_PROMPT);
    expect(console_.state.configError).toMatch(/line \d+/);
    expect(console_.state.configError).toContain("switch.basement_lights");
    expect(console_.state.sessionId).toBe(previous);
    expect(console_.state.devices).toEqual(panel);
  });

  it("rejects malformed JSON configs locally", async () => {
    const requestsBefore = mock.requestCount;
    await console_.configureHome("{ this is not json");
    expect(console_.state.configError).toContain("not valid JSON");
    expect(mock.requestCount).toBe(requestsBefore);
  });

  it("accepts an explicit JSON home config", async () => {
    await console_.configureHome(
      JSON.stringify({
        devices: [
          { entity_id: "light.desk", name: "Desk Lamp", state: "off" },
          { entity_id: "lock.door", name: "Front Door", state: "locked" },
        ],
        services: ["light.toggle", "lock.unlock"],
      }),
    );
    expect(console_.state.configError).toBeNull();
    expect(console_.state.devices.map((d) => d.entity_id)).toEqual([
      "light.desk",
      "lock.door",
    ]);
  });

  it("keeps rapid double-sends ordered with a consistent panel", async () => {
    const first = console_.send(BLINDS_COMMAND);
    const second = console_.send(SPEAKER_COMMAND);
    await Promise.all([first, second]);

    const transcript = console_.state.transcript;
    expect(transcript.map((b) => b.role)).toEqual(["user", "assistant", "user", "assistant"]);
    expect(transcript[0]?.text).toBe(BLINDS_COMMAND);
    expect(transcript[2]?.text).toBe(SPEAKER_COMMAND);
    expect(transcript[1]?.badge).toBe("ok");
    expect(transcript[3]?.badge).toBe("ok");

    await console_.poll();
    expect(console_.state.eventsCursor).toBe(2);
    expect(console_.state.devices).toEqual(mock.snapshot(console_.state.sessionId!));
  });

  it("reports an expired session and clears it for re-creation", async () => {
    mock.dropSession(console_.state.sessionId!);
    await console_.send(BLINDS_COMMAND);
    expect(console_.state.sessionId).toBeNull();
    expect(console_.state.banner).toContain("session expired");

    await console_.configureHome("");
    expect(console_.state.sessionId).not.toBeNull();
    expect(console_.state.devices).toHaveLength(6);
  });

  it("raises a banner when the backend is unavailable", async () => {
    mock.failNextChat = true;
    await console_.send(BLINDS_COMMAND);
    expect(console_.state.banner).toContain("unavailable");
    expect(console_.state.transcript.map((b) => b.role)).toEqual(["user"]);
    expect(console_.state.devices).toHaveLength(6);
  });

  it("rebuilds the panel from the server after a reload", async () => {
    await console_.send(BLINDS_COMMAND);
    const sessionId = console_.state.sessionId!;

    // a fresh console for the same session has no client-only truth
    const reloaded = new Console(new AssistantClient(baseUrl));
    reloaded.state = { ...reloaded.state, sessionId };
    await reloaded.poll();
    expect(reloaded.state.devices).toEqual(mock.snapshot(sessionId));
    expect(reloaded.state.devices.find((d) => d.entity_id === "cover.master_bedroom")?.state).toBe(
      "open",
    );
  });
});
