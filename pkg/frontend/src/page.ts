import type { ConsoleState, Bubble, Telemetry } from "./state.js";
import type { DeviceSnapshot } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function attributesLine(device: DeviceSnapshot): string {
  const parts = Object.entries(device.attributes).map(
    ([key, value]) => `${escapeHtml(key)}=${escapeHtml(String(value))}`,
  );
  return parts.join(" ");
}

export function deviceCard(device: DeviceSnapshot): string {
  return [
    `<div class="card" data-entity="${escapeHtml(device.entity_id)}">`,
    `<div class="card-name">${escapeHtml(device.name)}</div>`,
    `<div class="card-id">${escapeHtml(device.entity_id)}</div>`,
    `<div class="card-state">${escapeHtml(device.state)}</div>`,
    `<div class="card-attrs">${attributesLine(device)}</div>`,
    `</div>`,
  ].join("");
}

export function bubbleHtml(bubble: Bubble): string {
  if (bubble.role === "user") {
    return `<div class="bubble user">${escapeHtml(bubble.text)}</div>`;
  }
  const badge =
    bubble.badge === "fallback"
      ? `<span class="badge fallback">${escapeHtml(bubble.reason ?? "Fallback")}</span>`
      : `<span class="badge ok">Ok</span>`;
  const latency =
    bubble.latencySeconds === undefined
      ? ""
      : `<span class="latency">${bubble.latencySeconds.toFixed(2)}s</span>`;
  return `<div class="bubble assistant">${badge}${escapeHtml(bubble.text)}${latency}</div>`;
}

export function telemetryHtml(telemetry: Telemetry): string {
  const model = telemetry.model
    ? `${telemetry.model.name}${telemetry.model.quantization ? ` (${telemetry.model.quantization})` : ""}`
    : "no model yet";
  const latency =
    telemetry.lastLatencySeconds === null
      ? "-"
      : `${telemetry.lastLatencySeconds.toFixed(2)}s`;
  return [
    `<span class="model">${escapeHtml(model)}</span>`,
    `<span class="last-latency">latency ${latency}</span>`,
    `<span class="ok-count">ok ${telemetry.okCount}</span>`,
    `<span class="fallback-count">fallbacks ${telemetry.fallbackCount}</span>`,
  ].join(" ");
}

export function renderApp(state: ConsoleState): string {
  const banner = state.banner
    ? `<div class="banner">${escapeHtml(state.banner)}</div>`
    : "";
  const configError = state.configError
    ? `<div class="config-error">${escapeHtml(state.configError)}</div>`
    : "";
  return `
${banner}
<section class="telemetry">${telemetryHtml(state.telemetry)}</section>
<main class="columns">
  <section class="chat">
    <div class="transcript">${state.transcript.map(bubbleHtml).join("")}</div>
    <form id="chat-form">
      <input id="chat-input" type="text" placeholder="tell the home what to do" autocomplete="off">
      <button type="submit">Send</button>
    </form>
  </section>
  <section class="dashboard">
    <div class="cards">${state.devices.map(deviceCard).join("")}</div>
  </section>
</main>
<section class="configure">
  <details>
    <summary>Home configuration</summary>
    ${configError}
    <textarea id="config-editor" rows="8"
      placeholder="Empty for the default home. Paste a system prompt or a JSON config."></textarea>
    <button id="config-apply" type="button">Start session</button>
  </details>
</section>`;
}

const STYLE = `
body { font-family: system-ui, sans-serif; margin: 0; background: #f5f5f2; color: #222; }
.banner { background: #b3261e; color: #fff; padding: 8px 16px; }
.config-error { background: #fde7e9; color: #8c1d18; padding: 6px 10px; white-space: pre-wrap; }
.telemetry { padding: 8px 16px; background: #1d2733; color: #d7e3f4; display: flex; gap: 18px; font-size: 14px; }
.columns { display: flex; gap: 16px; padding: 16px; align-items: flex-start; }
.chat { flex: 1; min-width: 320px; }
.transcript { display: flex; flex-direction: column; gap: 8px; min-height: 200px; }
.bubble { padding: 8px 12px; border-radius: 10px; max-width: 85%; }
.bubble.user { background: #d5e5ff; align-self: flex-end; }
.bubble.assistant { background: #fff; border: 1px solid #ddd; align-self: flex-start; }
.badge { font-size: 11px; border-radius: 8px; padding: 1px 8px; margin-right: 8px; }
.badge.ok { background: #d6f2dd; color: #14532d; }
.badge.fallback { background: #fbe3c7; color: #7c2d12; }
.latency { font-size: 11px; color: #888; margin-left: 8px; }
#chat-form { display: flex; gap: 8px; margin-top: 12px; }
#chat-input { flex: 1; padding: 8px; }
.dashboard { flex: 1; }
.cards { display: grid; grid-template-columns: repeat(auto-fill, minmax(190px, 1fr)); gap: 10px; }
.card { background: #fff; border: 1px solid #ddd; border-radius: 10px; padding: 10px; transition: background 0.4s; }
.card-name { font-weight: 600; }
.card-id { font-size: 11px; color: #777; }
.card-state { margin-top: 6px; font-size: 15px; }
.card-attrs { font-size: 12px; color: #555; }
.configure { padding: 0 16px 24px; }
#config-editor { width: 100%; font-family: monospace; margin: 8px 0; }
`;

export function pageShell(): string {
  return `<!doctype html>
<html>
<head>
<meta charset="utf-8">
<title>edgehome console</title>
<style>${STYLE}</style>
</head>
<body>
<div id="app"></div>
<script type="module" src="/main.js"></script>
</body>
</html>`;
}
