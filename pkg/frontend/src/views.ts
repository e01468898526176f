/** Pure view functions: session state in, HTML strings out. */

import type {
  PendingHitl,
  PlanResultView,
  ProposalPayload,
  TranscriptTurn,
  TripleJson,
} from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function literalText(triple: TripleJson): string {
  return "iri" in triple.o ? triple.o.iri : String(triple.o.lit);
}

function diffRows(triples: TripleJson[], kind: "inserted" | "deleted"): string {
  const sign = kind === "inserted" ? "+" : "−";
  return triples
    .map(
      (t) =>
        `<tr class="diff-${kind}"><td>${sign}</td>` +
        `<td>${escapeHtml(t.s)}</td><td>${escapeHtml(t.p)}</td>` +
        `<td>${escapeHtml(literalText(t))}</td></tr>`,
    )
    .join("");
}

/** The approval card shown at adaptation and failure-update checkpoints. */
export function renderApprovalCard(pending: PendingHitl): string {
  const payload = pending.payload as unknown as ProposalPayload;
  const conflicts = (payload.conflicts ?? [])
    .map((c) => `<li>${escapeHtml(c.description)}</li>`)
    .join("");
  const diff = payload.diff ?? { inserted: [], deleted: [] };
  const consent = payload.targets_provided
    ? '<p class="consent-note">This change removes or alters a provided capability.</p>'
    : "";
  return (
    `<section class="approval-card" data-request-id="${escapeHtml(pending.request_id)}">` +
    `<h2>Proposed model update</h2>` +
    `<ul class="conflicts">${conflicts}</ul>` +
    `<table class="diff">` +
    diffRows(diff.deleted, "deleted") +
    diffRows(diff.inserted, "inserted") +
    `</table>` +
    `<p class="rationale">${escapeHtml(payload.rationale ?? "")}</p>` +
    consent +
    `<button class="approve" data-verdict="approve">Approve</button>` +
    `<button class="deny" data-verdict="deny">Deny</button>` +
    `</section>`
  );
}

/** The goal-confirmation card listing candidate goals. */
export function renderGoalCard(pending: PendingHitl): string {
  const candidates = (pending.payload.candidates as string[] | undefined) ?? [];
  const items = candidates
    .map((iri) => `<li><code>${escapeHtml(iri)}</code></li>`)
    .join("");
  return (
    `<section class="goal-card" data-request-id="${escapeHtml(pending.request_id)}">` +
    `<h2>Confirm the goal</h2><ol>${items}</ol>` +
    `<button class="approve" data-verdict="approve">Confirm</button>` +
    `<button class="deny" data-verdict="deny">Cancel</button>` +
    `</section>`
  );
}

export function renderHitl(pending: PendingHitl): string {
  return pending.checkpoint === "confirm_goal"
    ? renderGoalCard(pending)
    : renderApprovalCard(pending);
}

/** The plan view for a solved (or diagnosed) planning result. */
export function renderPlanView(result: PlanResultView): string {
  if (result.verdict === "sat") {
    const steps = (result.plan?.steps ?? [])
      .map((s) => {
        const assignments = Object.entries(s.assignments)
          .map(([iri, value]) => `${escapeHtml(iri)} = ${escapeHtml(String(value))}`)
          .join(", ");
        return `<li><code>${escapeHtml(s.capability)}</code>` +
          (assignments ? ` <span class="assignments">${assignments}</span>` : "") +
          `</li>`;
      })
      .join("");
    return (
      `<section class="plan-view" data-verdict="sat"><h2>Plan found</h2>` +
      `<ol class="steps">${steps}</ol></section>`
    );
  }
  const pairs = (result.conflict_pairs ?? [])
    .map(
      (p) =>
        `<li><code>${escapeHtml(p.capability)}</code> — ` +
        `${escapeHtml(p.shared_properties.join(", "))}</li>`,
    )
    .join("");
  return (
    `<section class="plan-view" data-verdict="unsat"><h2>No feasible plan</h2>` +
    `<ul class="conflict-pairs">${pairs}</ul></section>`
  );
}

export function renderTranscript(turns: TranscriptTurn[]): string {
  const items = turns
    .map((t) => `<li class="turn-${t.role}">${escapeHtml(t.text)}</li>`)
    .join("");
  return `<ul class="transcript">${items}</ul>`;
}

export function renderError(status: number, detail: string): string {
  const hint =
    status === 409
      ? " The request is stale — reload the session and decide again."
      : "";
  return (
    `<div class="error" data-status="${status}">` +
    `${escapeHtml(detail)}${hint}</div>`
  );
}
