"""Shipped fixture graphs and the two worked scenario programs built on them."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from graphsim.core import PropertyGraph
from graphsim.sandbox import Sandbox
from graphsim.scenario import AUGMENTATION, CONSTRAINT, BusinessEvent, DecisionTrace, ScenarioEngine, ScenarioProgram, ToolCall


def load_fixture(name: str) -> dict[str, Any]:
    text = resources.files("graphsim").joinpath("fixtures", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def fixture_graph(name: str) -> PropertyGraph:
    return PropertyGraph.from_dict(load_fixture(name))


def approval_event() -> BusinessEvent:
    return BusinessEvent.from_dict(load_fixture("event_007"))


def restructure_event() -> BusinessEvent:
    return BusinessEvent.from_dict(load_fixture("event_031"))


def approval_program(source: str = "Dept_Finance", target: str = "CFO_Node") -> ScenarioProgram:
    """Drop every approver whose ijudgemethod is not "1", then route the expense."""
    return ScenarioProgram(
        rule_id="R",
        scenario_class=CONSTRAINT,
        trigger={"approval_type": "expense"},
        steps=[
            ToolCall("match_nodes", {"properties": {"ijudgemethod": {"op": "ne", "value": "1"}}}),
            ToolCall("delete_nodes", {"node_names": {"$step": 1, "field": "nodes"}}),
        ],
        decision_step=ToolCall("shortest_path", {"source": source, "target": target}),
    )


def restructure_program(event: BusinessEvent | None = None) -> ScenarioProgram:
    """Add the event's new units and their conflict edges, then colour the export."""
    event = event or restructure_event()
    units = event.payload["new_units"]
    conflicts = [{"source": c["u"], "target": c["v"], "rel_type": "CONFLICT"} for c in event.payload["new_conflicts"]]
    return ScenarioProgram(
        rule_id="R_restructure",
        scenario_class=AUGMENTATION,
        trigger={"event_type": "org_restructure"},
        steps=[ToolCall("create_nodes", {"nodes": units}), ToolCall("create_edges", {"edges": conflicts})],
        decision_step=ToolCall("get_graph_info", {}),
        reasoning="greedy_coloring",
        targets=[u["name"] for u in units],
    )


def run_approval_demo(sandbox: Sandbox | None = None) -> tuple[Sandbox, str, DecisionTrace]:
    sandbox = sandbox or Sandbox()
    gid = sandbox.create_session(fixture_graph("approval_routing"))
    trace = ScenarioEngine(sandbox).derive_decision(gid, approval_event(), approval_program())
    return sandbox, gid, trace


def run_restructure_demo(sandbox: Sandbox | None = None) -> tuple[Sandbox, str, DecisionTrace]:
    sandbox = sandbox or Sandbox()
    gid = sandbox.create_session(fixture_graph("audit_conflicts"))
    event = restructure_event()
    trace = ScenarioEngine(sandbox).derive_decision(gid, event, restructure_program(event))
    return sandbox, gid, trace
