/** Browser bootstrap: wires the API client to the view functions. */

import { ApiClient, ApiError, type SessionView } from "./api.js";
import { renderError, renderHitl, renderPlanView, renderTranscript } from "./views.js";

export class App {
  private session: SessionView | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.session = await this.client.createSession();
    this.render();
  }

  async send(text: string): Promise<void> {
    if (!this.session) return;
    await this.guard(async () => {
      this.session = await this.client.sendMessage(this.session!.session_id, text);
    });
  }

  async decide(verdict: "approve" | "deny"): Promise<void> {
    if (!this.session?.pending_hitl) return;
    await this.guard(async () => {
      this.session = await this.client.postDecision(
        this.session!.session_id,
        this.session!.pending_hitl!.request_id,
        verdict,
      );
    });
  }

  private async guard(action: () => Promise<void>): Promise<void> {
    try {
      await action();
      this.render();
    } catch (error) {
      if (error instanceof ApiError) {
        this.root.insertAdjacentHTML("beforeend", renderError(error.status, error.detail));
        if (error.status === 409) {
          // stale decision: refresh so the current checkpoint is shown
          this.session = await this.client.getSession(this.session!.session_id);
          this.render();
        }
        return;
      }
      throw error;
    }
  }

  private render(): void {
    if (!this.session) return;
    const parts = [renderTranscript(this.session.transcript)];
    if (this.session.pending_hitl) parts.push(renderHitl(this.session.pending_hitl));
    if (this.session.last_result) parts.push(renderPlanView(this.session.last_result));
    this.root.innerHTML = parts.join("");
    for (const button of this.root.querySelectorAll<HTMLButtonElement>("button[data-verdict]")) {
      button.addEventListener("click", () => {
        void this.decide(button.dataset.verdict as "approve" | "deny");
      });
    }
  }
}

export function mount(baseUrl: string, root: HTMLElement): App {
  const app = new App(new ApiClient(baseUrl), root);
  const form = document.createElement("form");
  form.innerHTML =
    '<input name="message" placeholder="Describe a goal or report a failure" />' +
    "<button type=\"submit\">Send</button>";
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const input = form.elements.namedItem("message") as HTMLInputElement;
    if (input.value.trim()) void app.send(input.value.trim());
    input.value = "";
  });
  root.before(form);
  void app.start();
  return app;
}
