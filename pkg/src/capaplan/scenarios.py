"""Scenario harness: scripted end-to-end cases in four categories.

A scenario replays a fixed user transcript (messages and HitL decisions)
against a fresh store and scripted provider, then grades the outcome:
knowledge (KQ), satisfiable planning (SAT), and infeasibility diagnosis
(UNSAT) cases on a three-level scale, adaptation (AP) cases on a binary
scale. Repetitions must agree and produce byte-identical event logs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .llm import ScriptedProvider, load_script
from .model import parse_model
from .store import GraphStore
from .workflow import HitlDecision, SessionState, Workflow, WorkflowConfig

DEFAULT_REPETITIONS = {"KQ": 1, "SAT": 5, "UNSAT": 5, "AP": 5}

CATEGORIES = ("KQ", "SAT", "UNSAT", "AP")


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    category: str
    fixture: str
    script: str
    turns: tuple[dict, ...]
    expectations: dict
    max_horizon: int = 5
    max_iterations: int = 5

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ScenarioError(f"unknown category: {self.category}")
        if not self.expectations:
            raise ScenarioError(f"{self.id}: expectations must be non-empty")


@dataclass(frozen=True)
class RepetitionResult:
    verdict: str  # fully | partially | not (KQ/SAT/UNSAT); pass | fail (AP)
    details: str
    event_log: str


@dataclass(frozen=True)
class CaseReport:
    scenario_id: str
    category: str
    repetitions: tuple[RepetitionResult, ...]

    @property
    def agree(self) -> bool:
        logs = {r.event_log for r in self.repetitions}
        verdicts = {r.verdict for r in self.repetitions}
        return len(logs) == 1 and len(verdicts) == 1

    @property
    def verdict(self) -> str:
        if not self.agree:
            return "not" if self.category != "AP" else "fail"
        return self.repetitions[0].verdict

    @property
    def passed(self) -> bool:
        return self.verdict in ("fully", "pass")


@dataclass
class ScenarioReport:
    cases: list[CaseReport] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.cases)

    def aggregate(self) -> list[dict]:
        rows = []
        for category in CATEGORIES:
            members = [c for c in self.cases if c.category == category]
            if not members:
                continue
            rows.append(
                {
                    "category": category,
                    "cases": len(members),
                    "fully": sum(1 for c in members if c.passed),
                    "partially": sum(1 for c in members if c.verdict == "partially"),
                    "not": sum(
                        1 for c in members if c.verdict in ("not", "fail")
                    ),
                }
            )
        return rows

    def table(self) -> str:
        lines = [f"{'category':<10}{'cases':>6}{'fully':>7}{'partial':>9}{'not':>6}"]
        for row in self.aggregate():
            lines.append(
                f"{row['category']:<10}{row['cases']:>6}{row['fully']:>7}"
                f"{row['partially']:>9}{row['not']:>6}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["scenario", "category", "verdict", "repetitions", "agree"])
        for case in self.cases:
            writer.writerow(
                [case.scenario_id, case.category, case.verdict,
                 len(case.repetitions), case.agree]
            )
        return out.getvalue()


def load_scenario(path: str | Path) -> ScenarioSpec:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    return ScenarioSpec(
        id=doc["id"],
        category=doc["category"],
        fixture=str((path.parent / doc["fixture"]).resolve()),
        script=str((path.parent / doc["script"]).resolve()),
        turns=tuple(doc["turns"]),
        expectations=doc["expectations"],
        max_horizon=doc.get("max_horizon", 5),
        max_iterations=doc.get("max_iterations", 5),
    )


def _replay(spec: ScenarioSpec) -> tuple[SessionState, GraphStore]:
    store = GraphStore.load(parse_model(Path(spec.fixture).read_text(encoding="utf-8")))
    provider = ScriptedProvider(load_script(Path(spec.script).read_text(encoding="utf-8")))
    workflow = Workflow(
        store,
        provider,
        WorkflowConfig(max_iterations=spec.max_iterations, max_horizon=spec.max_horizon),
    )
    state = workflow.start_session()
    for turn in spec.turns:
        if "user" in turn:
            workflow.step(state, turn["user"])
        elif "hitl" in turn:
            if state.pending_hitl is None:
                raise ScenarioError(
                    f"{spec.id}: transcript expects a pending HitL request"
                )
            decision = HitlDecision(
                state.pending_hitl.request_id,
                turn["hitl"]["verdict"],
                payload=turn["hitl"].get("payload"),
            )
            workflow.step(state, decision)
        else:
            raise ScenarioError(f"{spec.id}: unknown turn {turn!r}")
    return state, store


def _grade_kq(state: SessionState, expect: dict) -> tuple[str, str]:
    answers = " ".join(t["text"] for t in state.transcript if t["role"] == "system")
    facts = expect["facts"]
    present = [f for f in facts if f in answers]
    if len(present) == len(facts):
        return "fully", "all facts present"
    if present:
        missing = sorted(set(facts) - set(present))
        return "partially", f"missing facts: {missing}"
    return "not", "no expected fact present"


def _grade_sat(state: SessionState, expect: dict) -> tuple[str, str]:
    result = state.last_result
    if result is None or result["verdict"] != "sat":
        return "not", f"no satisfiable result (got {result and result['verdict']})"
    steps = [s["capability"] for s in result["plan"]["steps"]]
    if steps != expect["steps"]:
        return "partially", f"unexpected step sequence: {steps}"
    seen: dict[str, object] = {}
    for step in result["plan"]["steps"]:
        seen.update(step["assignments"])
    for iri, value in expect.get("assignments", {}).items():
        if seen.get(iri) != value:
            return "partially", f"assignment {iri} is {seen.get(iri)!r}, expected {value!r}"
    return "fully", "plan matches"


def _grade_unsat(state: SessionState, expect: dict) -> tuple[str, str]:
    result = state.last_result
    if result is None or result["verdict"] != "unsat":
        return "not", f"no infeasibility result (got {result and result['verdict']})"
    pairs = {
        (p["goal_ordinal"], p["capability"]) for p in result["conflict_pairs"]
    }
    wanted = {(int(a), b) for a, b in expect["pairs"]}
    if pairs == wanted:
        return "fully", "origin pairs match"
    if pairs & wanted:
        return "partially", f"origin pairs differ: {sorted(pairs)}"
    return "not", f"origin pairs disjoint from expectation: {sorted(pairs)}"


def _grade_ap(state: SessionState, store: GraphStore, expect: dict) -> tuple[str, str]:
    problems = []
    if "final_status" in expect and state.status != expect["final_status"]:
        problems.append(f"status {state.status}, expected {expect['final_status']}")
    if "iterations" in expect and state.iteration != expect["iterations"]:
        problems.append(f"iterations {state.iteration}, expected {expect['iterations']}")
    if "final_verdict" in expect:
        verdict = state.last_result and state.last_result["verdict"]
        if verdict != expect["final_verdict"]:
            problems.append(f"verdict {verdict}, expected {expect['final_verdict']}")
    if "change_records" in expect:
        count = sum(1 for e in state.events if e["type"] == "change_record")
        if count != expect["change_records"]:
            problems.append(f"{count} change records, expected {expect['change_records']}")
    if expect.get("distinct_cores"):
        cores = [
            tuple(e["payload"]["result"]["diagnosis"]["core"])
            for e in state.events
            if e["type"] == "agent_result"
            and e["agent"] == "planner"
            and e["payload"]["result"]["verdict"] == "unsat"
        ]
        if len(cores) < 2 or len(set(cores)) < 2:
            problems.append("expected two distinct infeasibility cores")
    if "store_lacks" in expect:
        subjects = {t.subject for t in store.triples}
        for iri in expect["store_lacks"]:
            if iri in subjects:
                problems.append(f"store still contains {iri}")
    if "final_property_values" in expect:
        final = store.materialize()
        values: dict[str, object] = {}
        for cap in final.capabilities:
            for p in cap.properties:
                if p.value is not None:
                    from .model import format_literal

                    values[p.iri.value] = (
                        p.value if isinstance(p.value, (bool, int, str))
                        else format_literal(p.value)
                    )
        for iri, value in expect["final_property_values"].items():
            if values.get(iri) != value:
                problems.append(f"{iri} is {values.get(iri)!r}, expected {value!r}")
    if "visited_suffix" in expect:
        suffix = expect["visited_suffix"]
        if state.visited_nodes[-len(suffix):] != suffix:
            problems.append(f"node path ends {state.visited_nodes[-len(suffix):]}")
    if problems:
        return "fail", "; ".join(problems)
    return "pass", "all checks hold"


def run_scenario(spec: ScenarioSpec, repetitions: int | None = None) -> CaseReport:
    reps = repetitions or DEFAULT_REPETITIONS[spec.category]
    if reps < 1:
        raise ScenarioError("repetitions must be positive")
    results = []
    for _ in range(reps):
        state, store = _replay(spec)
        if spec.category == "KQ":
            verdict, details = _grade_kq(state, spec.expectations)
        elif spec.category == "SAT":
            verdict, details = _grade_sat(state, spec.expectations)
        elif spec.category == "UNSAT":
            verdict, details = _grade_unsat(state, spec.expectations)
        else:
            verdict, details = _grade_ap(state, store, spec.expectations)
        results.append(RepetitionResult(verdict, details, state.export_events()))
    return CaseReport(spec.id, spec.category, tuple(results))


def run_suite(directory: str | Path, repetitions: int | None = None) -> ScenarioReport:
    report = ScenarioReport()
    for path in sorted(Path(directory).glob("*.json")):
        spec = load_scenario(path)
        report.cases.append(run_scenario(spec, repetitions))
    return report


def render_report_figure(report: ScenarioReport, path: str | Path) -> None:
    """Bar chart of per-category outcomes alongside the delimited report."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = report.aggregate()
    categories = [r["category"] for r in rows]
    fully = [r["fully"] for r in rows]
    partially = [r["partially"] for r in rows]
    failed = [r["not"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(categories, fully, label="fully / pass", color="#2a9d8f")
    ax.bar(categories, partially, bottom=fully, label="partially", color="#e9c46a")
    bottoms = [f + p for f, p in zip(fully, partially)]
    ax.bar(categories, failed, bottom=bottoms, label="not / fail", color="#e76f51")
    ax.set_ylabel("cases")
    ax.set_title("Scenario suite outcomes by category")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
