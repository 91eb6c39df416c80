"""Structured scenario programs run as sandbox simulations, followed by a decision and its trace.

A program's steps mutate the session's working copy into the simulation graph.
Only then is the decision step executed, so every decision in a trace is
derived from the evolved graph and covered by a contiguous log range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from graphsim import registry
from graphsim.algorithms import NO_PATH, fuse_graphs, greedy_coloring
from graphsim.core import StateHash, plain, state_hash
from graphsim.errors import InvalidArgument
from graphsim.sandbox import ReplayReport, Sandbox, replay, utc_now

CONSTRAINT = "constraint"
AUGMENTATION = "augmentation"

CONSTRAINT_STEPS = frozenset(
    {"match_nodes", "match_edges", "delete_nodes", "delete_edges", "update_nodes", "update_edges", "set_edge_weights"}
)
AUGMENTATION_STEPS = CONSTRAINT_STEPS | {"create_nodes", "create_edges"}
DECISION_STEPS = frozenset(registry.OPERATIONS) - registry.MUTATING
REASONERS = ("greedy_coloring",)

# decision calls whose missing-endpoint errors resolve to a definitive empty outcome
_MISSING_ENDPOINT_OUTCOMES = {
    "check_direct_edge": {"exists": False, "annotation": NO_PATH},
    "get_node_neighbors": {"neighbors": [], "annotation": NO_PATH},
    "calculate_max_flow": {"max_flow_value": 0, "flows": [], "annotation": NO_PATH},
    "analyze_graph_node": {"annotation": NO_PATH},
    "get_node_info": {"node": None, "annotation": NO_PATH},
}


@dataclass
class BusinessEvent:
    event_id: str
    payload: dict[str, Any] = field(default_factory=dict)
    trigger_field: str | None = None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> BusinessEvent:
        return cls(str(doc["event_id"]), dict(doc.get("payload") or {}), doc.get("trigger_field"))

    def to_dict(self) -> dict[str, Any]:
        return {"event_id": self.event_id, "payload": plain(self.payload), "trigger_field": self.trigger_field}


@dataclass
class ToolCall:
    name: str
    args: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> ToolCall:
        return cls(doc["name"], dict(doc.get("args") or {}))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "args": plain(self.args)}


@dataclass
class ScenarioProgram:
    """Ordered tool calls implementing one rule.

    Step arguments may reference an earlier step's result with
    ``{"$step": n, "field": "nodes"}`` (steps are numbered from 1). ``reasoning``
    names an in-context computation run on the fused export after the decision
    step; ``targets`` are the fusion targets (defaults to every node).
    """

    rule_id: str
    scenario_class: str
    steps: list[ToolCall] = field(default_factory=list)
    decision_step: ToolCall | None = None
    trigger: dict[str, str] | None = None
    reasoning: str | None = None
    targets: list[str] | None = None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> ScenarioProgram:
        return cls(
            rule_id=doc["rule_id"],
            scenario_class=doc["class"],
            steps=[ToolCall.from_dict(s) for s in doc.get("steps", [])],
            decision_step=ToolCall.from_dict(doc["decision_step"]) if doc.get("decision_step") else None,
            trigger=doc.get("trigger"),
            reasoning=doc.get("reasoning"),
            targets=doc.get("targets"),
        )

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "rule_id": self.rule_id,
            "class": self.scenario_class,
            "steps": [s.to_dict() for s in self.steps],
            "decision_step": self.decision_step.to_dict() if self.decision_step else None,
        }
        for key in ("trigger", "reasoning", "targets"):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        return doc

    def validate(self) -> None:
        if self.scenario_class not in (CONSTRAINT, AUGMENTATION):
            raise InvalidArgument(f"scenario class must be constraint or augmentation, got {self.scenario_class!r}")
        allowed = CONSTRAINT_STEPS if self.scenario_class == CONSTRAINT else AUGMENTATION_STEPS
        for i, step in enumerate(self.steps, 1):
            if step.name not in registry.OPERATIONS:
                raise InvalidArgument(f"step {i}: unknown operation {step.name!r}")
            if registry.canonical_name(step.name) not in allowed:
                raise InvalidArgument(f"step {i}: {step.name} is not allowed in a {self.scenario_class} program")
        if self.decision_step is not None and self.decision_step.name not in DECISION_STEPS:
            raise InvalidArgument(f"decision step {self.decision_step.name!r} must be a read-only or algorithm call")
        if self.reasoning is not None and self.reasoning not in REASONERS:
            raise InvalidArgument(f"unknown reasoning computation {self.reasoning!r}")

    def activates(self, event: BusinessEvent) -> bool:
        """Exact string equality of every trigger field against the event payload."""
        if not self.trigger:
            return True
        return all(
            name in event.payload and str(event.payload[name]) == str(value) for name, value in self.trigger.items()
        )


def classify_mode(program: ScenarioProgram | None, static_graph_in_context: bool = True) -> str:
    """A: reason directly on a graph in context; B: tools against graph_id; C: tools then in-context computation."""
    if program is None:
        if not static_graph_in_context:
            raise InvalidArgument("no scenario program and no graph in context: nothing to reason over")
        return "A"
    return "C" if program.reasoning else "B"


@dataclass
class SimulationReport:
    applied_rule: str | None
    deltas: dict[str, Any]
    empty_graph: bool
    pre_hash: StateHash
    post_hash: StateHash
    log_range: tuple[int, int] | None = None
    failed_step: dict[str, Any] | None = None
    step_results: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "applied_rule": self.applied_rule,
            "deltas": self.deltas,
            "empty_graph": self.empty_graph,
            "pre_hash": self.pre_hash.hex(),
            "post_hash": self.post_hash.hex(),
            "log_range": list(self.log_range) if self.log_range else None,
            "failed_step": self.failed_step,
        }


@dataclass
class DecisionTrace:
    event_id: str
    triggered_rule: str | None
    scenario_class: str | None
    simulation: SimulationReport
    decision: dict[str, Any] | None
    step_log_range: tuple[int, int] | None
    timestamp: str
    mode: str = "B"

    def to_document(self) -> dict[str, Any]:
        """Flat audit record: event, rule, deltas, headline decision fields, full decision, timestamp."""
        doc: dict[str, Any] = {"event_id": self.event_id, "triggered_rule": self.triggered_rule}
        d = self.simulation.deltas
        if self.scenario_class == CONSTRAINT:
            doc["deleted_nodes"] = list(d.get("deleted_node_names", []))
            doc["deleted_edges"] = d.get("deleted_edges", 0)
        elif self.scenario_class == AUGMENTATION:
            doc["new_nodes"] = d.get("created_nodes", 0)
            doc["new_edges"] = d.get("created_edges", 0)
        decision = self.decision or {}
        if "simulation_result" in decision:
            doc["simulation_result"] = decision["simulation_result"]
        if decision.get("found"):
            doc["final_path"] = list(decision["path"])
        if "connected" in decision:
            doc["connected"] = decision["connected"]
        for key in ("max_degree", "slots_required"):
            if key in decision:
                doc[key] = decision[key]
        doc["decision"] = decision
        doc["mode"] = self.mode
        doc["step_log_range"] = list(self.step_log_range) if self.step_log_range else None
        doc["timestamp"] = self.timestamp
        return doc


def append_trace(trace: DecisionTrace, path: str | Path) -> None:
    with Path(path).open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(plain(trace.to_document()), sort_keys=False, ensure_ascii=False) + "\n")


def _resolve(value: Any, results: list[dict[str, Any]]) -> Any:
    if isinstance(value, Mapping):
        if set(value) == {"$step", "field"}:
            n = value["$step"]
            if not isinstance(n, int) or not 1 <= n <= len(results):
                raise InvalidArgument(f"reference to step {n!r} which has not run")
            source = results[n - 1]
            if value["field"] not in source:
                raise InvalidArgument(f"step {n} result has no field {value['field']!r}")
            return source[value["field"]]
        return {k: _resolve(v, results) for k, v in value.items()}
    if isinstance(value, list):
        return [_resolve(v, results) for v in value]
    return value


def _accumulate(deltas: dict[str, Any], name: str, result: Mapping[str, Any]) -> None:
    if name == "delete_nodes":
        deltas["deleted_nodes"] += result["deleted_nodes"]
        deltas["deleted_edges"] += result["deleted_edges"]
        deltas["deleted_node_names"].extend(result["nodes"])
    elif name == "delete_edges":
        deltas["deleted_edges"] += result["deleted"]
    elif name == "create_nodes":
        deltas["created_nodes"] += result["count"]
    elif name == "create_edges":
        deltas["created_edges"] += result["count"]
    elif name == "update_nodes":
        deltas["updated_nodes"] += result["updated"]
    elif name in ("update_edges", "set_edge_weights"):
        deltas["updated_edges"] += result["updated"]


def _empty_deltas() -> dict[str, Any]:
    return {"deleted_nodes": 0, "deleted_edges": 0, "created_nodes": 0, "created_edges": 0,
            "updated_nodes": 0, "updated_edges": 0, "deleted_node_names": []}


class ScenarioEngine:
    """Runs scenario programs against sessions of a :class:`Sandbox`."""

    def __init__(self, sandbox: Sandbox) -> None:
        self.sandbox = sandbox

    def apply_scenario(self, graph_id: str, program: ScenarioProgram) -> SimulationReport:
        """Execute the program's steps in order; stops at the first failing step.

        Each step is atomic, the program as a whole is not: earlier steps stay applied.
        """
        program.validate()
        with self.sandbox.hold(graph_id) as session:
            pre = state_hash(session.graph)
            deltas = _empty_deltas()
            results: list[dict[str, Any]] = []
            failed = None
            first_seq = last_seq = None
            for i, step in enumerate(program.steps, 1):
                try:
                    args = _resolve(step.args, results)
                except InvalidArgument as exc:
                    failed = {"step": i, "name": step.name, "error": exc.to_result()["error"]}
                    break
                result = self.sandbox.call(graph_id, step.name, args)
                last_seq = len(session.log)
                first_seq = first_seq or last_seq
                results.append(result)
                if result["status"] != "ok":
                    failed = {"step": i, "name": step.name, "seq": last_seq, "error": result["error"]}
                    break
                _accumulate(deltas, registry.canonical_name(step.name), result)
            post = state_hash(session.graph)
            empty = not session.graph.nodes
        log_range = (first_seq, last_seq) if first_seq else None
        return SimulationReport(program.rule_id, deltas, empty, pre, post, log_range, failed, results)

    def derive_decision(
        self, graph_id: str, event: BusinessEvent, program: ScenarioProgram
    ) -> DecisionTrace:
        """Simulate, then decide on the simulated graph; runtime outcomes are always structured."""
        program.validate()
        with self.sandbox.hold(graph_id) as session:
            triggered = program.activates(event)
            if triggered:
                report = self.apply_scenario(graph_id, program)
            else:
                h = state_hash(session.graph)
                report = SimulationReport(None, _empty_deltas(), not session.graph.nodes, h, h)
            decision, last_seq = self._decide(graph_id, program, report, session)
        start = report.log_range[0] if report.log_range else None
        if last_seq is not None:
            start = start or last_seq
        end = last_seq or (report.log_range[1] if report.log_range else None)
        return DecisionTrace(
            event_id=event.event_id,
            triggered_rule=program.rule_id if triggered else None,
            scenario_class=program.scenario_class if triggered else None,
            simulation=report,
            decision=decision,
            step_log_range=(start, end) if start else None,
            timestamp=str(event.payload.get("timestamp") or utc_now()),
            mode=classify_mode(program),
        )

    def _decide(self, graph_id, program, report, session) -> tuple[dict[str, Any] | None, int | None]:
        if report.failed_step is not None:
            return {"simulation_result": "simulation_failed", "failed_step": report.failed_step}, None
        if report.empty_graph:
            return {"simulation_result": "empty_graph", "reason": f"all nodes excluded by {program.rule_id}"}, None
        decision: dict[str, Any] | None = None
        last_seq = None
        if program.decision_step is not None:
            step = program.decision_step
            args = _resolve(step.args, report.step_results)
            decision = self.sandbox.call(graph_id, step.name, args)
            last_seq = len(session.log)
            missing = decision.get("error", {}).get("code") == "not_found"
            if missing and step.name in _MISSING_ENDPOINT_OUTCOMES:
                decision = {"status": "ok", **_MISSING_ENDPOINT_OUTCOMES[step.name],
                            "reason": decision["error"]["message"]}
        if program.reasoning == "greedy_coloring":
            exported = self.sandbox.export_snapshot(graph_id)
            targets = program.targets or sorted(exported.nodes)
            fused = fuse_graphs([exported], targets)
            coloring = greedy_coloring(fused.graph)
            base = dict(decision or {})
            # keep only the headline of a bulky retrieval payload
            for bulky in ("nodes", "edges"):
                base.pop(bulky, None)
            decision = {
                **base,
                "reasoning": "greedy_coloring",
                "max_degree": coloring.max_degree,
                "color_budget": coloring.budget,
                "slots_required": coloring.color_sum,
                "colors_used": coloring.colors_used,
                "assignment": coloring.assignment,
                "pruned_attribute_count": fused.pruned_attribute_count,
            }
        return decision, last_seq


def verify_trace(sandbox: Sandbox, graph_id: str, trace: DecisionTrace) -> ReplayReport:
    """Rebuild the pre-program state from the session log, then replay the trace's range.

    The report is ok only if the rebuilt state matches the recorded pre-hash and the
    range reproduces every recorded result and the recorded post-simulation hash.
    """
    entries = sandbox.get_log(graph_id)
    snapshot = sandbox.session(graph_id).snapshot
    if trace.step_log_range is None:
        h = trace.simulation.pre_hash
        return ReplayReport(trace.simulation.post_hash == h, None, h, trace.simulation.post_hash, [])
    first, last = trace.step_log_range
    before = snapshot.copy()
    for entry in entries[: first - 1]:
        before, _, _, _ = registry.execute(before, entry.name, entry.args)
    report = replay(before, entries[first - 1 : last], trace.simulation.post_hash)
    if state_hash(before) != trace.simulation.pre_hash:
        report.ok = False
    return report
