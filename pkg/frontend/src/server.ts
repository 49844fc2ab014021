// Static page + API proxy. Serves the built console and forwards /api/* to
// the assistant service so the browser needs a single origin.

import { createServer, type IncomingMessage, type ServerResponse } from "node:http";
import { readFile } from "node:fs/promises";
import { dirname, join, normalize } from "node:path";
import { fileURLToPath } from "node:url";

import { pageShell } from "./page.js";

const ASSISTANT_URL = process.env.ASSISTANT_URL ?? "http://127.0.0.1:8080";
const PORT = Number(process.env.PORT ?? 3000);
const DIST_DIR = dirname(fileURLToPath(import.meta.url));

async function readBody(request: IncomingMessage): Promise<Buffer> {
  const chunks: Buffer[] = [];
  for await (const chunk of request) {
    chunks.push(chunk as Buffer);
  }
  return Buffer.concat(chunks);
}

async function proxy(request: IncomingMessage, response: ServerResponse, path: string): Promise<void> {
  const body = await readBody(request);
  let upstream: Response;
  try {
    upstream = await fetch(ASSISTANT_URL + path, {
      method: request.method,
      headers: { "content-type": request.headers["content-type"] ?? "application/json" },
      body: body.length && request.method !== "GET" ? new Uint8Array(body) : undefined,
    });
  } catch (error) {
    response.writeHead(502, { "content-type": "application/json" });
    response.end(JSON.stringify({ error: { class: "BackendUnavailable", message: String(error) } }));
    return;
  }
  const payload = Buffer.from(await upstream.arrayBuffer());
  response.writeHead(upstream.status, {
    "content-type": upstream.headers.get("content-type") ?? "application/json",
  });
  response.end(payload);
}

async function serveModule(response: ServerResponse, path: string): Promise<void> {
  // only .js files that actually live in dist; no traversal
  const safe = normalize(path).replace(/^([/.])+/, "");
  try {
    const content = await readFile(join(DIST_DIR, safe));
    response.writeHead(200, { "content-type": "text/javascript" });
    response.end(content);
  } catch {
    response.writeHead(404, { "content-type": "text/plain" });
    response.end("not found");
  }
}

export function createConsoleServer() {
  return createServer((request, response) => {
    const url = new URL(request.url ?? "/", "http://localhost");
    const path = url.pathname;
    if (path.startsWith("/api/")) {
      void proxy(request, response, path.slice("/api".length) + url.search);
      return;
    }
    if (path.endsWith(".js")) {
      void serveModule(response, path);
      return;
    }
    response.writeHead(200, { "content-type": "text/html" });
    response.end(pageShell());
  });
}

const entry = process.argv[1] ?? "";
if (entry && import.meta.url === new URL(`file://${entry}`).href) {
  createConsoleServer().listen(PORT, () => {
    console.log(`console on http://127.0.0.1:${PORT} -> ${ASSISTANT_URL}`);
  });
}
