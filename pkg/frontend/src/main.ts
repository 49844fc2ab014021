import { AssistantClient } from "./api.js";
import { Console } from "./console.js";
import { renderApp } from "./page.js";

const POLL_INTERVAL_MS = 1000;

function bootstrap(): void {
  const app = document.getElementById("app");
  if (!app) {
    return;
  }
  const client = new AssistantClient("/api");
  const console_ = new Console(client, (state) => {
    app.innerHTML = renderApp(state);
    wire();
  });

  function wire(): void {
    const form = document.getElementById("chat-form") as HTMLFormElement | null;
    const input = document.getElementById("chat-input") as HTMLInputElement | null;
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = input?.value ?? "";
      if (text.trim()) {
        void console_.send(text);
        if (input) {
          input.value = "";
        }
      }
    });
    const apply = document.getElementById("config-apply");
    const editor = document.getElementById("config-editor") as HTMLTextAreaElement | null;
    apply?.addEventListener("click", () => {
      void console_.configureHome(editor?.value ?? "");
    });
  }

  void console_.configureHome("");
  setInterval(() => void console_.poll(), POLL_INTERVAL_MS);
}

bootstrap();
