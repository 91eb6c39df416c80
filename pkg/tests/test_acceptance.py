"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``. The lines go straight to the terminal
(bypassing capture) so they also land in a tee'd log.
"""

from __future__ import annotations

import dataclasses
import random
import time

import pytest

import oracles
from callgen import random_call, random_constraint_case, seed_graph
from graphsim import registry
from graphsim.algorithms import calculate_max_flow, calculate_max_matching, shortest_path
from graphsim.benchgen import (
    CorpusManifest,
    PLUGIN_FOR_TASK,
    SamplerConfig,
    bypass_agent,
    check_split,
    generate_corpus,
    generate_task,
    verify_instance,
)
from graphsim.core import PropertyGraph, induced_subgraph, state_hash
from graphsim.demo import approval_event, run_approval_demo, run_restructure_demo
from graphsim.evalkit import (
    TASKS,
    GroundTruthInstance,
    ToolCallRecord,
    aggregate_means,
    compute_ia,
    confidence_interval,
    match_sequence,
    score_instance,
)
from graphsim.sandbox import Sandbox, replay
from graphsim.scenario import CONSTRAINT, ScenarioEngine, ScenarioProgram, ToolCall, verify_trace


@pytest.fixture
def report(capsys):
    """report(n, ok, detail): print the criterion line, then assert."""

    def _report(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return _report


def test_criterion_1_approval_fixture(report, approval_graph):
    t0 = time.perf_counter()
    failing = [n for n, r in approval_graph.nodes.items() if r.properties["ijudgemethod"] != "1"]
    incident = [k for k in approval_graph.edges if k[0] in failing or k[1] in failing]
    sb, gid, trace = run_approval_demo()
    doc = trace.to_document()
    info = sb.call(gid, "get_graph_info", {})
    elapsed = time.perf_counter() - t0
    checks = {
        "fixture 17/26": (len(approval_graph.nodes), len(approval_graph.edges)) == (17, 26),
        "3 failing": len(failing) == 3,
        "7 incident": len(incident) == 7,
        "post 14/19": (info["node_count"], info["edge_count"]) == (14, 19),
        "2-hop path": len(doc["final_path"]) == 3 and doc["final_path"][0] == "Dept_Finance"
        and doc["final_path"][-1] == "CFO_Node",
        "trace fields": list(doc)[:5] == ["event_id", "triggered_rule", "deleted_nodes", "deleted_edges",
                                          "final_path"] and doc["deleted_nodes"] == sorted(failing)
        and doc["deleted_edges"] == 7 and "timestamp" in doc and doc["triggered_rule"] == "R",
        "trace replays": verify_trace(sb, gid, trace).ok,
        "< 1 s": elapsed < 1.0,
    }
    bad = [k for k, v in checks.items() if not v]
    report(1, not bad, f"approval fixture path={doc['final_path']} in {elapsed:.3f}s" + (f" failed: {bad}" if bad else ""))


def test_criterion_2_restructure_fixture(report):
    t0 = time.perf_counter()
    sb, gid, trace = run_restructure_demo()
    doc = trace.to_document()
    d = trace.decision
    g = sb.export_snapshot(gid)
    assignment = d["assignment"]
    proper = all(assignment[e.source] != assignment[e.target] for e in g.edges.values()
                 if e.source != e.target and e.source in assignment and e.target in assignment)
    elapsed = time.perf_counter() - t0
    checks = {
        "8 new nodes / 11 new edges": (doc["new_nodes"], doc["new_edges"]) == (8, 11),
        "max_degree 14": doc["max_degree"] == 14 == g.max_degree(),
        "budget 15": d["color_budget"] == 15,
        "proper": proper and set(assignment) == set(g.nodes),
        "<= 15 colors": d["colors_used"] <= 15 and max(assignment.values()) < 15,
        "< 1 s": elapsed < 1.0,
    }
    bad = [k for k, v in checks.items() if not v]
    report(2, not bad, f"restructure fixture budget={d['color_budget']} colors_used={d['colors_used']} "
                       f"slots_required={doc['slots_required']} in {elapsed:.3f}s" + (f" failed: {bad}" if bad else ""))


ACC_COLUMNS = {
    "LOM": [1.00, 1.00, 1.00, 1.00, 0.88, 1.00, 1.00, 1.00, 1.00, 0.98, 0.46],
    "Doubao": [0.98, 1.00, 1.00, 1.00, 0.94, 0.16, 1.00, 1.00, 0.66, 0.98, 0.08],
    "DeepSeek": [1.00, 0.98, 1.00, 1.00, 0.78, 0.86, 0.90, 0.70, 0.64, 0.96, 0.00],
}
ACC_OVERALL = {"LOM": 0.9382, "Doubao": 0.8000, "DeepSeek": 0.8018}
STATED = {"LOM": (0.9382, 0.9874, -0.0492, -0.05), "Doubao": (0.8000, 0.2442, 0.5558, 0.56),
          "DeepSeek": (0.8018, 0.3621, 0.4397, 0.44)}


def test_criterion_3_metric_fixtures(report):
    t0 = time.perf_counter()
    problems = []
    for model, col in ACC_COLUMNS.items():
        got = aggregate_means({t: (a, 0.0) for t, a in zip(TASKS, col)})["overall"].acc
        if abs(got - ACC_OVERALL[model]) > 5e-4:
            problems.append(f"{model} acc {got:.5f}")
    for model, (acc, f1, ia, rounded) in STATED.items():
        got = compute_ia(acc, f1)
        if abs(got - ia) > 5e-4 or abs(got - rounded) > 5e-3:
            problems.append(f"{model} ia {got:.5f}")
    lo, hi = confidence_interval(0.46, 100)
    if abs(lo - 0.362) > 5e-4 or abs(hi - 0.558) > 5e-4 or (round(lo, 2), round(hi, 2)) != (0.36, 0.56):
        problems.append(f"ci [{lo:.4f}, {hi:.4f}]")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        problems.append(f"took {elapsed:.2f}s")
    report(3, not problems, f"acc overalls, IA and CI=[{lo:.3f}, {hi:.3f}] reproduced" + (f" failed: {problems}" if problems else ""))


def test_criterion_4_algorithm_oracles(report):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    mismatches = []
    for i in range(200):
        g = oracles.random_graph(rng, max_nodes=8, weighted=True)
        names = sorted(g.nodes)
        s, t = rng.choice(names), rng.choice(names)
        cost, path = oracles.best_path(g, s, t, weighted=bool(g.edges))
        res = shortest_path(g, s, t)
        if res["cost"] != cost or res["path"] != path:
            mismatches.append(("path", i))
        if len(names) >= 2:
            s, t = rng.sample(names, 2)
            if calculate_max_flow(g, s, t)["max_flow_value"] != oracles.min_cut(g, s, t):
                mismatches.append(("flow", i))
        unweighted = PropertyGraph.build(list(g.nodes.values()), [(e.source, e.target, e.rel_type) for e in g.edges.values()])
        cost, path = oracles.best_path(unweighted, s, t, weighted=False)
        res = shortest_path(unweighted, s, t)
        if res["cost"] != cost or res["path"] != path:
            mismatches.append(("hops", i))
        b = oracles.random_bipartite(rng, max_nodes=10)
        if calculate_max_matching(b, "L", "R")["size"] != oracles.max_matching(b, "L", "R"):
            mismatches.append(("matching", i))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 30
    report(4, ok, f"200 graphs: flow=min-cut, path=enumeration, matching=enumeration in {elapsed:.2f}s"
                  + (f" mismatches: {mismatches[:5]}" if mismatches else ""))


def _sequence(rng: random.Random):
    g = seed_graph(rng)
    current, calls, counter = g.copy(), [], [0]
    for _ in range(rng.randint(0, 20)):
        name, args = random_call(rng, current, counter)
        current, *_ = registry.execute(current, name, args)
        calls.append((name, args))
    return g, calls


def test_criterion_5_replay_determinism(report):
    t0 = time.perf_counter()
    rng = random.Random(5)
    failures = []
    corrupted = 0
    for i in range(500):
        g, calls = _sequence(rng)
        sb = Sandbox()
        gid = sb.create_session(g)
        for name, args in calls:
            sb.call(gid, name, args)
        rep = sb.replay_verify(gid)
        if not rep.ok or rep.actual_hash != sb.state_hash(gid):
            failures.append(("replay", i))
        log = sb.get_log(gid)
        if log:
            k = rng.randrange(len(log))
            bad = list(log)
            bad[k] = dataclasses.replace(log[k], result={**log[k].result, "tampered": True})
            rep = replay(g, bad, sb.state_hash(gid))
            corrupted += 1
            if rep.ok or rep.first_divergence != k + 1:
                failures.append(("corrupt", i))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    report(5, ok, f"500 sequences replayed, {corrupted} corruptions detected at the right seq in {elapsed:.2f}s"
                  + (f" failures: {failures[:5]}" if failures else ""))


def test_criterion_6_phase2_law(report):
    t0 = time.perf_counter()
    rng = random.Random(6)
    wrong = []
    for i in range(100):
        g, prog, keep = random_constraint_case(rng)
        sb = Sandbox()
        gid = sb.create_session(g)
        rep = ScenarioEngine(sb).apply_scenario(gid, prog)
        if rep.post_hash != state_hash(induced_subgraph(g, keep)):
            wrong.append(i)
    elapsed = time.perf_counter() - t0
    report(6, not wrong and elapsed < 10, f"100 constraint programs match the induced-subgraph oracle in {elapsed:.2f}s"
                                          + (f" wrong: {wrong[:5]}" if wrong else ""))


def test_criterion_7_empty_graph(report, approval_graph):
    sb = Sandbox()
    gid = sb.create_session(approval_graph)
    prog = ScenarioProgram(
        "R_all", CONSTRAINT,
        [ToolCall("match_nodes", {}), ToolCall("delete_nodes", {"node_names": {"$step": 1, "field": "nodes"}})],
        ToolCall("shortest_path", {"source": "Dept_Finance", "target": "CFO_Node"}),
    )
    try:
        trace = ScenarioEngine(sb).derive_decision(gid, approval_event(), prog)
        d = trace.decision
        ok = d.get("simulation_result") == "empty_graph" and "all nodes excluded" in d.get("reason", "")
        detail = f"decision={d}"
    except Exception as exc:  # the contract is that nothing raises
        ok, detail = False, f"raised {exc!r}"
    report(7, ok, f"all-excluding program: {detail}")


def test_criterion_8_f1_edge_cases(report):
    call = ToolCallRecord("shortest_path", {"source": "a", "target": "b"})
    gt = GroundTruthInstance("t", "i", [call], [["source", "target"]], "x")
    empty_gt = GroundTruthInstance("t", "j", [], [], "x")
    m0 = match_sequence([], gt)
    n0 = match_sequence([call], empty_gt)
    perfect = match_sequence([call], gt)
    inst, _ = generate_task(PLUGIN_FOR_TASK["fc_constraint_path"], "fc_constraint_path", SamplerConfig(), 8)
    bypass = score_instance(bypass_agent(inst), inst.ground_truth)
    static = match_sequence([inst.ground_truth.calls[-1]], inst.ground_truth)
    checks = {
        "m=0": m0.f1 == 0,
        "n=0": (n0.precision, n0.recall, n0.f1) == (0, 1, 0),
        "perfect": perfect.f1 == 1,
        "3-call gt": len(inst.ground_truth.calls) == 3,
        "bypass": bypass.f1 == 0 and bypass.acc == 1 and static.f1 == 0,
    }
    bad = [k for k, v in checks.items() if not v]
    report(8, not bad, f"F1 edge cases, bypass acc={bypass.acc} f1={bypass.f1}" + (f" failed: {bad}" if bad else ""))


def test_criterion_9_default_corpus(report):
    t0 = time.perf_counter()
    corpus = generate_corpus(CorpusManifest())
    per_task = {t: sum(1 for i in corpus.instances if i.task_id == t) for t in TASKS}
    # snapshots are the sampled graphs; augmentation only happens inside the session
    sizes_ok = all(20 <= len(g.nodes) <= 30 and 30 <= len(g.edges) <= 60 for g in corpus.snapshots.values())
    train = {i.graph_id for i in corpus.split("train")}
    test = {i.graph_id for i in corpus.split("test")}
    try:
        check_split(corpus.instances)
        unique = True
    except Exception:
        unique = False
    replay_ok = all(verify_instance(i, corpus.snapshots[i.graph_id]) for i in corpus.instances)
    elapsed = time.perf_counter() - t0
    checks = {
        "11 x 300": len(TASKS) == 11 and all(n == 300 for n in per_task.values()),
        "sizes": sizes_ok and len(corpus.snapshots) == 3300,
        "disjoint": not (train & test) and unique,
        "replay": replay_ok,
        "< 10 min": elapsed < 600,
    }
    bad = [k for k, v in checks.items() if not v]
    report(9, not bad, f"{len(corpus.instances)} instances, {len(train)} train / {len(test)} test graphs, "
                       f"all replay in {elapsed:.1f}s" + (f" failed: {bad}" if bad else ""))
