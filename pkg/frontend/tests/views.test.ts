import { describe, expect, it } from "vitest";

import type { PendingHitl, PlanResultView } from "../src/api.js";
import {
  escapeHtml,
  renderApprovalCard,
  renderError,
  renderGoalCard,
  renderPlanView,
  renderTranscript,
} from "../src/views.js";

const pending: PendingHitl = {
  request_id: "s-1-h2",
  checkpoint: "approve_adaptation",
  payload: {
    conflicts: [
      { description: "depth 2 mm below range", origins: [], capabilities: ["urn:fix:cap:drill"] },
    ],
    mutations: [],
    diff: {
      deleted: [
        { s: "urn:fix:req:hole:out:depth", p: "urn:cap:v1#value", o: { lit: 2, datatype: "integer" } },
      ],
      inserted: [
        { s: "urn:fix:req:hole:out:depth", p: "urn:cap:v1#value", o: { lit: 5, datatype: "integer" } },
      ],
    },
    rationale: "raise to the admissible minimum",
    targets_provided: false,
  },
};

describe("approval card", () => {
  it("renders both sides of the diff with the request id", () => {
    const html = renderApprovalCard(pending);
    expect(html).toContain('data-request-id="s-1-h2"');
    expect(html).toContain("diff-deleted");
    expect(html).toContain("diff-inserted");
    expect(html).toMatch(/diff-deleted.*>2</);
    expect(html).toMatch(/diff-inserted.*>5</);
    expect(html).toContain("raise to the admissible minimum");
  });

  it("flags proposals that touch provided capabilities", () => {
    const flagged = {
      ...pending,
      payload: { ...pending.payload, targets_provided: true },
    } as PendingHitl;
    expect(renderApprovalCard(flagged)).toContain("consent-note");
    expect(renderApprovalCard(pending)).not.toContain("consent-note");
  });
});

describe("goal card", () => {
  it("lists the candidate goals", () => {
    const goal: PendingHitl = {
      request_id: "s-1-h1",
      checkpoint: "confirm_goal",
      payload: { candidates: ["urn:fix:req:hole"] },
    };
    const html = renderGoalCard(goal);
    expect(html).toContain("urn:fix:req:hole");
    expect(html).toContain('data-verdict="approve"');
  });
});

describe("plan view", () => {
  it("renders sat plans as ordered steps", () => {
    const result: PlanResultView = {
      verdict: "sat",
      plan: {
        steps: [
          {
            index: 0,
            capability: "urn:fix:cap:drill",
            assignments: { "urn:fix:cap:drill:out:depth": "5" },
          },
        ],
        initial_state: {},
      },
    };
    const html = renderPlanView(result);
    expect(html).toContain('data-verdict="sat"');
    expect(html).toContain("urn:fix:cap:drill");
    expect(html).toContain("= 5");
  });

  it("renders unsat results as conflict pairs", () => {
    const result: PlanResultView = {
      verdict: "unsat",
      conflict_pairs: [
        { goal_ordinal: 2, capability: "urn:fix:cap:drill", shared_properties: ["depth"] },
      ],
    };
    const html = renderPlanView(result);
    expect(html).toContain('data-verdict="unsat"');
    expect(html).toContain("depth");
  });
});

describe("hygiene", () => {
  it("escapes markup in transcripts", () => {
    const html = renderTranscript([{ role: "system", text: "<script>alert(1)</script>" }]);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("explains stale-decision errors", () => {
    const html = renderError(409, "no pending request 's-1-h9'");
    expect(html).toContain('data-status="409"');
    expect(html).toContain("stale");
  });

  it("escapes quotes", () => {
    expect(escapeHtml('a"b')).toBe("a&quot;b");
  });
});
