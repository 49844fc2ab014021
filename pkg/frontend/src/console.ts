import { ApiError, AssistantClient } from "./api.js";
import {
  bannerRaised,
  chatArrived,
  configErrorSet,
  devicesReconciled,
  eventsApplied,
  initialState,
  sessionLost,
  sessionStarted,
  userSent,
  type ConsoleState,
} from "./state.js";
import type { SessionRequest } from "./types.js";

export type StateListener = (state: ConsoleState) => void;

// Editor content -> session request. Empty means the default home; a leading
// brace means an explicit JSON config; anything else is pasted prompt text.
export function parseEditor(text: string): SessionRequest | undefined {
  const trimmed = text.trim();
  if (!trimmed) {
    return undefined;
  }
  if (trimmed.startsWith("{")) {
    return JSON.parse(trimmed) as SessionRequest;
  }
  return { system_prompt: text };
}

export class Console {
  state: ConsoleState = initialState();
  private chain: Promise<void> = Promise.resolve();

  constructor(
    private readonly client: AssistantClient,
    private readonly onChange: StateListener = () => {},
  ) {}

  private setState(state: ConsoleState): void {
    this.state = state;
    this.onChange(state);
  }

  // single-user client: every server call runs strictly after the previous one
  private enqueue(task: () => Promise<void>): Promise<void> {
    const next = this.chain.then(task);
    this.chain = next.catch(() => {});
    return next;
  }

  configureHome(editorText: string): Promise<void> {
    return this.enqueue(async () => {
      let config: SessionRequest | undefined;
      try {
        config = parseEditor(editorText);
      } catch (error) {
        this.setState(configErrorSet(this.state, `config is not valid JSON: ${error}`));
        return;
      }
      try {
        const created = await this.client.createSession(config);
        this.setState(sessionStarted(this.state, created));
      } catch (error) {
        if (error instanceof ApiError && error.status === 400) {
          this.setState(configErrorSet(this.state, error.message));
          return;
        }
        this.setState(bannerRaised(this.state, describe(error)));
      }
    });
  }

  send(text: string): Promise<void> {
    return this.enqueue(async () => {
      const sessionId = this.state.sessionId;
      if (!sessionId) {
        this.setState(bannerRaised(this.state, "no active session"));
        return;
      }
      this.setState(userSent(this.state, text));
      try {
        const response = await this.client.chat(sessionId, text);
        this.setState(chatArrived(this.state, response));
      } catch (error) {
        this.handleSessionError(error);
      }
    });
  }

  // one poll step; the caller owns the interval
  poll(): Promise<void> {
    return this.enqueue(async () => {
      const sessionId = this.state.sessionId;
      if (!sessionId) {
        return;
      }
      try {
        const payload = await this.client.events(sessionId, this.state.eventsCursor);
        if (payload.cursor > this.state.eventsCursor) {
          const snapshot = await this.client.devices(sessionId);
          this.setState(
            eventsApplied(devicesReconciled(this.state, snapshot.devices), payload.cursor),
          );
        }
      } catch (error) {
        this.handleSessionError(error);
      }
    });
  }

  private handleSessionError(error: unknown): void {
    if (error instanceof ApiError && error.errorClass === "UnknownSession") {
      this.setState(sessionLost(this.state, "session expired; start a new one"));
      return;
    }
    this.setState(bannerRaised(this.state, describe(error)));
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.status >= 500 || error.status === 0
      ? `assistant backend unavailable: ${error.message}`
      : `${error.errorClass}: ${error.message}`;
  }
  return String(error);
}
