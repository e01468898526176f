/** Human-in-the-loop round trip against the real API with scripted fixtures. */

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError, type SessionView } from "../src/api.js";
import { renderApprovalCard, renderError, renderPlanView } from "../src/views.js";
import { startFixtureServer, type FixtureServer } from "./server.js";

// the scripted provider is stateful, so every test gets a fresh server
let server: FixtureServer;
let client: ApiClient;
let nextPort = 8451;

beforeEach(async () => {
  server = await startFixtureServer(nextPort);
  nextPort += 1;
  client = new ApiClient(server.baseUrl);
}, 30_000);

afterEach(() => {
  server?.stop();
});

describe("HitL approval round trip", () => {
  it("renders the depth diff, approves it, and shows the sat plan", async () => {
    let session: SessionView = await client.createSession();
    session = await client.sendMessage(
      session.session_id,
      "Drill a 2 mm hole in the workpiece at station 15.",
    );
    expect(session.pending_hitl?.checkpoint).toBe("confirm_goal");
    session = await client.postDecision(
      session.session_id,
      session.pending_hitl!.request_id,
      "approve",
    );

    // first adaptation proposal: the approval card shows the 2 → 5 diff
    expect(session.pending_hitl?.checkpoint).toBe("approve_adaptation");
    const card = renderApprovalCard(session.pending_hitl!);
    expect(card).toMatch(/diff-deleted.*urn:fix:req:hole:out:depth.*>2</);
    expect(card).toMatch(/diff-inserted.*urn:fix:req:hole:out:depth.*>5</);

    session = await client.postDecision(
      session.session_id,
      session.pending_hitl!.request_id,
      "approve",
    );
    // second iteration repairs the station and ends satisfiable
    expect(session.pending_hitl?.checkpoint).toBe("approve_adaptation");
    session = await client.postDecision(
      session.session_id,
      session.pending_hitl!.request_id,
      "approve",
    );
    expect(session.status).toBe("done");
    expect(session.last_result?.verdict).toBe("sat");

    const planView = renderPlanView(session.last_result!);
    expect(planView).toContain('data-verdict="sat"');
    expect(planView).toContain("urn:fix:cap:drill");

    const changelog = await client.getChangelog();
    expect(changelog.length).toBe(2);
  }, 30_000);

  it("surfaces 409 for a stale decision and keeps the checkpoint usable", async () => {
    let session: SessionView = await client.createSession();
    session = await client.sendMessage(
      session.session_id,
      "Drill a 2 mm hole in the workpiece at station 15.",
    );
    const pending = session.pending_hitl!;
    let caught: ApiError | null = null;
    try {
      await client.postDecision(session.session_id, `${session.session_id}-h999`, "approve");
    } catch (error) {
      caught = error as ApiError;
    }
    expect(caught).toBeInstanceOf(ApiError);
    expect(caught!.status).toBe(409);
    expect(renderError(caught!.status, caught!.detail)).toContain("stale");

    // the original request is still decidable after the stale attempt
    const refreshed = await client.getPending(session.session_id);
    expect(refreshed?.request_id).toBe(pending.request_id);
    const resolved = await client.postDecision(
      session.session_id,
      pending.request_id,
      "deny",
    );
    expect(resolved.status).toBe("awaiting_user");
  }, 30_000);
});
