"""Seeded synthesis of the eleven-task tool-use benchmark.

Every instance is produced by running its ground-truth calls against a live
sandbox session; the answer is extracted from the algorithm's result, never
computed separately by the generator.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from graphsim.algorithms import NO_PATH, fuse_graphs, greedy_coloring, reachable_from, shortest_path
from graphsim.core import EdgeRecord, NodeRecord, PropertyGraph, canonical_json, induced_subgraph, plain
from graphsim.errors import InvalidArgument
from graphsim.evalkit import TASKS, GroundTruthInstance, ToolCallRecord, Transcript
from graphsim.sandbox import Sandbox
from graphsim.scenario import AUGMENTATION, CONSTRAINT, BusinessEvent, ScenarioEngine, ScenarioProgram, ToolCall

logger = logging.getLogger(__name__)

MAX_RETRIES = 25
EVENT_TIME = "2025-06-01T09:00:00Z"

DEFAULT_PROPERTIES: dict[str, tuple[tuple[Any, ...], tuple[float, ...]]] = {
    "ijudgemethod": (("1", "0", "2"), (0.8, 0.1, 0.1)),
    "role": (("department", "manager", "auditor", "director"), (1, 1, 1, 1)),
    "region": (("north", "south", "east", "west"), (1, 1, 1, 1)),
}


class Infeasible(Exception):
    """The sampled graph cannot host the task; the generator resamples."""


@dataclass
class SamplerConfig:
    node_range: tuple[int, int] = (20, 30)
    edge_range: tuple[int, int] = (30, 60)
    seed: int = 0
    label_vocabulary: tuple[str, ...] = ("Department", "Manager", "Auditor", "Approver")
    property_generators: Mapping[str, tuple[Sequence[Any], Sequence[float]]] = field(
        default_factory=lambda: dict(DEFAULT_PROPERTIES)
    )
    weight_range: tuple[int, int] = (1, 20)
    weighted: bool = False
    bipartite: tuple[str, str] | None = None

    def to_dict(self) -> dict[str, Any]:
        doc = asdict(self)
        doc["property_generators"] = {k: [list(v[0]), list(v[1])] for k, v in self.property_generators.items()}
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> SamplerConfig:
        doc = dict(doc)
        for key in ("node_range", "edge_range", "weight_range", "label_vocabulary", "bipartite"):
            if doc.get(key) is not None:
                doc[key] = tuple(doc[key])
        if "property_generators" in doc:
            doc["property_generators"] = {k: (tuple(v[0]), tuple(v[1])) for k, v in doc["property_generators"].items()}
        return cls(**doc)


def derive_seed(*parts: Any) -> int:
    digest = hashlib.sha256("/".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def seeded_uuid(rng: random.Random) -> str:
    return str(uuid.UUID(int=rng.getrandbits(128), version=4))


def sample_subgraph(cfg: SamplerConfig, rng: random.Random | None = None) -> PropertyGraph:
    """Random weakly connected graph: a random spanning tree plus extra edges."""
    rng = rng or random.Random(cfg.seed)
    lo_n, hi_n = cfg.node_range
    lo_m, hi_m = cfg.edge_range
    if lo_n < 2 or lo_n > hi_n or lo_m > hi_m:
        raise InvalidArgument(f"bad ranges: nodes {cfg.node_range}, edges {cfg.edge_range}")
    n = rng.randint(lo_n, hi_n)
    if hi_m < n - 1:
        raise InvalidArgument(f"edge_range {cfg.edge_range} cannot connect {n} nodes (needs at least {n - 1} edges)")
    side = [i % 2 for i in range(n)] if cfg.bipartite else None
    capacity = (n // 2) * (n - n // 2) if side else n * (n - 1)
    if capacity < lo_m:
        raise InvalidArgument(f"{n} nodes cannot hold {lo_m} edges")
    m = rng.randint(max(lo_m, n - 1), min(hi_m, capacity))

    g = PropertyGraph()
    names = [f"N{i:02d}" for i in range(n)]
    rng.shuffle(names)
    for i, name in enumerate(names):
        if side is not None:
            label = cfg.bipartite[side[i]]
        else:
            label = rng.choice(cfg.label_vocabulary)
        props = {k: rng.choices(list(vals), weights=list(w))[0] for k, (vals, w) in sorted(cfg.property_generators.items())}
        g.add_node(NodeRecord(name, label, props))

    def weight():
        return rng.randint(*cfg.weight_range) if cfg.weighted else None

    def orient(i: int, j: int) -> tuple[int, int]:
        if side is not None:
            return (i, j) if side[i] == 0 else (j, i)
        return (i, j) if rng.random() < 0.5 else (j, i)

    for i in range(1, n):
        if side is not None:
            j = rng.choice([k for k in range(i) if side[k] != side[i]])
        else:
            j = rng.randrange(i)
        a, b = orient(i, j)
        g.add_edge(EdgeRecord(names[a], names[b], "LINK", weight()))
    while len(g.edges) < m:
        i, j = rng.sample(range(n), 2)
        if side is not None and side[i] == side[j]:
            continue
        a, b = orient(i, j)
        if (names[a], names[b], "LINK") in g.edges:
            continue
        g.add_edge(EdgeRecord(names[a], names[b], "LINK", weight()))
    return g


# ---------------------------------------------------------------------------
# plugins
# ---------------------------------------------------------------------------


@dataclass
class Plan:
    calls: list[ToolCall] = field(default_factory=list)
    event: BusinessEvent | None = None
    program: ScenarioProgram | None = None
    question: dict[str, Any] = field(default_factory=dict)


class TaskPlugin:
    name = ""
    tasks: tuple[str, ...] = ()
    mode = "B"

    def config(self, cfg: SamplerConfig) -> SamplerConfig:
        return cfg

    def build(self, task_id: str, graph: PropertyGraph, rng: random.Random) -> Plan:
        raise NotImplementedError


def _pair(graph: PropertyGraph, rng: random.Random, want: Callable[[str, str], bool]) -> tuple[str, str]:
    names = sorted(graph.nodes)
    pairs = [(s, t) for s in names for t in names if s != t and want(s, t)]
    if not pairs:
        raise Infeasible("no qualifying node pair")
    return rng.choice(pairs)


class TraversalPlugin(TaskPlugin):
    name = "traversal_plugin"
    tasks = ("CONNECTIVITY", "NEIGHBOR", "PREDECESSOR", "EDGE")

    def build(self, task_id, graph, rng):
        names = sorted(graph.nodes)
        if task_id == "CONNECTIVITY":
            reach = {s: reachable_from(graph, s) for s in names}
            expect = rng.random() < 0.5
            s, t = _pair(graph, rng, lambda a, b: (b in reach[a]) == expect)
            return Plan([ToolCall("check_graph_connectivity", {"source": s, "target": t})],
                        question={"source": s, "target": t, "semantics": "directed"})
        if task_id in ("NEIGHBOR", "PREDECESSOR"):
            direction = "out" if task_id == "NEIGHBOR" else "in"
            fn = graph.successors if direction == "out" else graph.predecessors
            candidates = [v for v in names if fn(v)]
            if not candidates:
                raise Infeasible("no node with neighbours")
            v = rng.choice(candidates)
            return Plan([ToolCall("get_node_neighbors", {"name": v, "direction": direction})], question={"name": v})
        expect = rng.random() < 0.5
        s, t = _pair(graph, rng, lambda a, b: bool(graph.edges_between(a, b)) == expect)
        return Plan([ToolCall("check_direct_edge", {"source": s, "target": t})], question={"source": s, "target": t})


class GraphInfoPlugin(TaskPlugin):
    name = "graph_info_plugin"
    tasks = ("fc_graph_info",)

    def build(self, task_id, graph, rng):
        return Plan([ToolCall("get_graph_info", {})], question={"fields": ["node_count", "edge_count", "max_degree"]})


class NodeInfoPlugin(TaskPlugin):
    name = "node_info_plugin"
    tasks = ("fc_node_info",)

    def build(self, task_id, graph, rng):
        v = rng.choice(sorted(graph.nodes))
        return Plan([ToolCall("get_node_info", {"name": v})], question={"name": v, "field": "role"})


class MatchingPlugin(TaskPlugin):
    name = "matching_plugin"
    tasks = ("fc_bipartite_maximum_matching",)
    sides = ("Worker", "Task")

    def config(self, cfg):
        return SamplerConfig(**{**cfg.__dict__, "bipartite": self.sides})

    def build(self, task_id, graph, rng):
        left, right = self.sides
        return Plan([ToolCall("calculate_max_matching", {"left_label": left, "right_label": right})],
                    question={"left_label": left, "right_label": right})


class MaxFlowPlugin(TaskPlugin):
    name = "max_flow_plugin"
    tasks = ("fc_maximum_flow",)

    def config(self, cfg):
        return SamplerConfig(**{**cfg.__dict__, "weighted": True})

    def build(self, task_id, graph, rng):
        reach = {s: reachable_from(graph, s) for s in sorted(graph.nodes)}
        s, t = _pair(graph, rng, lambda a, b: b in reach[a])
        return Plan([ToolCall("calculate_max_flow", {"source": s, "sink": t})], question={"source": s, "sink": t})


def _constraint_program(rule_id: str, decision: ToolCall) -> ScenarioProgram:
    return ScenarioProgram(
        rule_id=rule_id,
        scenario_class=CONSTRAINT,
        trigger={"approval_type": "expense"},
        steps=[
            ToolCall("match_nodes", {"properties": {"ijudgemethod": {"op": "ne", "value": "1"}}}),
            ToolCall("delete_nodes", {"node_names": {"$step": 1, "field": "nodes"}}),
        ],
        decision_step=decision,
    )


def survivors(graph: PropertyGraph) -> set[str]:
    return {n for n, rec in graph.nodes.items() if rec.properties.get("ijudgemethod") == "1"}


class _ConstraintPlugin(TaskPlugin):
    decision_name = ""

    def answers(self, g: PropertyGraph, s: str, t: str) -> Any:
        raise NotImplementedError

    def build(self, task_id, graph, rng):
        keep = survivors(graph)
        if len(keep) == len(graph.nodes) or len(keep) < 2:
            raise Infeasible("rule must exclude at least one node and keep two")
        restricted = induced_subgraph(graph, keep)
        differ = rng.random() < 0.5
        ordered = sorted(keep)
        pairs = []
        for s in ordered:
            for t in ordered:
                if s != t and self.qualifies(graph, restricted, s, t, differ):
                    pairs.append((s, t))
        if not pairs:
            raise Infeasible("no pair with the wanted G / G_R relation")
        s, t = rng.choice(pairs)
        event = BusinessEvent(
            f"evt_{rng.getrandbits(32):08x}",
            {"source_node": s, "target_node": t, "approval_type": "expense", "timestamp": EVENT_TIME},
            "approval_type",
        )
        decision = ToolCall(self.decision_name, {"source": s, "target": t})
        return Plan(event=event, program=_constraint_program("R", decision),
                    question={"source": s, "target": t, "changed_by_scenario": differ})

    def qualifies(self, g, r, s, t, differ):
        a, b = self.answers(g, s, t), self.answers(r, s, t)
        return (a != b) if differ else (a == b)


class ConstraintConnectionPlugin(_ConstraintPlugin):
    name = "constraint_connection_plugin"
    tasks = ("fc_constraint_connection",)
    decision_name = "check_graph_connectivity"

    def answers(self, g, s, t):
        return t in reachable_from(g, s)

    def qualifies(self, g, r, s, t, differ):
        # only pairs connected on the full graph, so the "no" answers all come from the scenario
        return self.answers(g, s, t) and super().qualifies(g, r, s, t, differ)


class ConstraintPathPlugin(_ConstraintPlugin):
    name = "constraint_path_plugin"
    tasks = ("fc_constraint_path",)
    decision_name = "shortest_path"

    def answers(self, g, s, t):
        return tuple(shortest_path(g, s, t)["path"])

    def qualifies(self, g, r, s, t, differ):
        return bool(self.answers(g, s, t)) and super().qualifies(g, r, s, t, differ)


class ColoringPlugin(TaskPlugin):
    name = "coloring_plugin"
    tasks = ("delta_plus_one_coloring",)
    mode = "C"

    def build(self, task_id, graph, rng):
        existing = sorted(graph.nodes)
        k = rng.randint(2, 4)
        units = [{"name": f"Unit_{i}", "label": "Auditor", "properties": {"region": rng.choice(["north", "south"])}}
                 for i in range(k)]
        edges = set()
        for i, u in enumerate(units):
            pool = existing + [w["name"] for w in units[:i]]
            for v in rng.sample(pool, rng.randint(1, 3)):
                edges.add((u["name"], v))
        conflicts = [{"source": a, "target": b, "rel_type": "CONFLICT"} for a, b in sorted(edges)]
        program = ScenarioProgram(
            rule_id="R_aug",
            scenario_class=AUGMENTATION,
            trigger={"event_type": "org_restructure"},
            steps=[ToolCall("create_nodes", {"nodes": units}), ToolCall("create_edges", {"edges": conflicts})],
            decision_step=ToolCall("get_graph_info", {}),
            reasoning="greedy_coloring",
            targets=[u["name"] for u in units],
        )
        event = BusinessEvent(f"evt_{rng.getrandbits(32):08x}",
                              {"event_type": "org_restructure", "timestamp": EVENT_TIME}, "event_type")
        return Plan(event=event, program=program, question={"new_units": [u["name"] for u in units]})


PLUGINS: tuple[TaskPlugin, ...] = (
    TraversalPlugin(),
    GraphInfoPlugin(),
    NodeInfoPlugin(),
    MatchingPlugin(),
    MaxFlowPlugin(),
    ConstraintConnectionPlugin(),
    ConstraintPathPlugin(),
    ColoringPlugin(),
)
PLUGIN_FOR_TASK = {task: p for p in PLUGINS for task in p.tasks}


def extract_answer(task_id: str, decision: Mapping[str, Any]) -> str:
    """Canonical answer string from the decision result of a task."""
    if task_id in ("CONNECTIVITY", "fc_constraint_connection"):
        return "true" if decision["connected"] else "false"
    if task_id in ("NEIGHBOR", "PREDECESSOR"):
        return canonical_json(decision["neighbors"])
    if task_id == "EDGE":
        return "true" if decision["exists"] else "false"
    if task_id == "fc_graph_info":
        return canonical_json({k: decision[k] for k in ("node_count", "edge_count", "max_degree")})
    if task_id == "fc_node_info":
        return str(decision["node"]["properties"].get("role", ""))
    if task_id == "fc_bipartite_maximum_matching":
        return str(decision["size"])
    if task_id == "fc_maximum_flow":
        return canonical_json(decision["max_flow_value"])
    if task_id == "fc_constraint_path":
        return canonical_json(decision["path"]) if decision.get("found") else NO_PATH
    if task_id == "delta_plus_one_coloring":
        return str(decision["slots_required"])
    raise KeyError(task_id)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkInstance:
    instance_id: str
    task_id: str
    plugin: str
    mode: str
    split: str
    graph_id: str
    seed: int
    event: BusinessEvent | None
    program: ScenarioProgram | None
    ground_truth: GroundTruthInstance
    question: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance_id": self.instance_id,
            "task_id": self.task_id,
            "plugin": self.plugin,
            "mode": self.mode,
            "split": self.split,
            "graph_id": self.graph_id,
            "snapshot_ref": self.graph_id,
            "seed": self.seed,
            "event": self.event.to_dict() if self.event else None,
            "program": self.program.to_dict() if self.program else None,
            "question": plain(self.question),
            "ground_truth": self.ground_truth.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> BenchmarkInstance:
        return cls(
            doc["instance_id"], doc["task_id"], doc["plugin"], doc["mode"], doc["split"], doc["graph_id"],
            int(doc["seed"]),
            BusinessEvent.from_dict(doc["event"]) if doc.get("event") else None,
            ScenarioProgram.from_dict(doc["program"]) if doc.get("program") else None,
            GroundTruthInstance.from_dict(doc["ground_truth"]),
            dict(doc.get("question") or {}),
        )


def _run_plan(plan: Plan, task_id: str, graph: PropertyGraph, graph_id: str) -> tuple[Sandbox, dict[str, Any]]:
    sandbox = Sandbox()
    sandbox.create_session(graph, graph_id)
    if plan.program is not None:
        trace = ScenarioEngine(sandbox).derive_decision(graph_id, plan.event, plan.program)
        decision = trace.decision or {}
        if trace.triggered_rule is None or "simulation_result" in decision:
            raise Infeasible(f"scenario did not yield a decision: {decision.get('simulation_result')}")
    else:
        decision = {}
        for call in plan.calls:
            decision = sandbox.call(graph_id, call.name, call.args)
    if decision.get("status") != "ok":
        raise Infeasible(f"decision call failed: {decision.get('error')}")
    return sandbox, decision


def generate_task(plugin: TaskPlugin, task_id: str, cfg: SamplerConfig, seed: int, split: str = "train") -> tuple[BenchmarkInstance, PropertyGraph]:
    """Sample a graph, build the task and execute its ground truth live; resample on infeasibility."""
    last = None
    for attempt in range(MAX_RETRIES):
        rng = random.Random(derive_seed(seed, attempt))
        graph = sample_subgraph(plugin.config(cfg), rng)
        graph_id = seeded_uuid(rng)
        try:
            plan = plugin.build(task_id, graph, rng)
            sandbox, decision = _run_plan(plan, task_id, graph, graph_id)
        except Infeasible as exc:
            last = exc
            continue
        entries = sandbox.get_log(graph_id)
        if not all(e.ok for e in entries) or not sandbox.replay_verify(graph_id).ok:
            raise RuntimeError(f"ground truth for {task_id} seed {seed} failed live verification")
        calls = [ToolCallRecord(e.name, {"graph_id": graph_id, **e.args}) for e in entries]
        instance_id = f"{task_id}-{split}-{graph_id[:8]}"
        gt = GroundTruthInstance(task_id, instance_id, calls, [sorted(e.args) for e in entries],
                                 extract_answer(task_id, decision))
        return BenchmarkInstance(instance_id, task_id, plugin.name, plugin.mode, split, graph_id, seed,
                                 plan.event, plan.program, gt, plan.question), graph
    raise InvalidArgument(f"{task_id}: no feasible instance after {MAX_RETRIES} resamples (seed {seed}): {last}")


def verify_instance(instance: BenchmarkInstance, snapshot: PropertyGraph) -> bool:
    """Re-run the ground-truth calls on a fresh session and re-derive the answer."""
    sandbox = Sandbox()
    gid = sandbox.create_session(snapshot)
    result: dict[str, Any] = {}
    for call in instance.ground_truth.calls:
        result = sandbox.call(gid, call.name, call.args)
        if result.get("status") != "ok":
            return False
    if not sandbox.replay_verify(gid).ok:
        return False
    if instance.mode == "C":
        exported = sandbox.export_snapshot(gid)
        fused = fuse_graphs([exported], instance.program.targets or sorted(exported.nodes))
        result = {"slots_required": greedy_coloring(fused.graph).color_sum}
    return extract_answer(instance.task_id, result) == instance.ground_truth.answer


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


@dataclass
class CorpusManifest:
    counts: dict[str, tuple[int, int]] = field(default_factory=lambda: {t: (200, 100) for t in TASKS})
    master_seed: int = 0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)

    def to_dict(self) -> dict[str, Any]:
        return {"counts": {t: list(c) for t, c in self.counts.items()}, "master_seed": self.master_seed,
                "sampler": self.sampler.to_dict()}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> CorpusManifest:
        counts = doc.get("counts")
        unknown = set(counts or {}) - set(TASKS)
        if unknown:
            raise InvalidArgument(f"unknown task ids in manifest: {sorted(unknown)}")
        return cls(
            {t: (int(c[0]), int(c[1])) for t, c in counts.items()} if counts else {t: (200, 100) for t in TASKS},
            int(doc.get("master_seed", 0)),
            SamplerConfig.from_dict(doc["sampler"]) if doc.get("sampler") else SamplerConfig(),
        )

    def jobs(self) -> list[tuple[str, str, int]]:
        out = []
        for task, (n_train, n_test) in self.counts.items():
            for split, count in (("train", n_train), ("test", n_test)):
                out.extend((task, split, derive_seed(self.master_seed, task, split, i)) for i in range(count))
        return out


@dataclass
class Corpus:
    manifest: CorpusManifest
    instances: list[BenchmarkInstance]
    snapshots: dict[str, PropertyGraph]

    def split(self, name: str) -> list[BenchmarkInstance]:
        return [i for i in self.instances if i.split == name]


def check_split(instances: Iterable[BenchmarkInstance]) -> None:
    """Every graph id is used exactly once, so train and test cannot share a graph."""
    seen: dict[str, str] = {}
    for inst in instances:
        if inst.graph_id in seen:
            raise InvalidArgument(
                f"graph id {inst.graph_id} used twice ({seen[inst.graph_id]} and {inst.instance_id})"
            )
        seen[inst.graph_id] = inst.instance_id


def _job(args: tuple[str, str, int, dict]) -> tuple[dict, dict]:
    task, split, seed, sampler = args
    inst, graph = generate_task(PLUGIN_FOR_TASK[task], task, SamplerConfig.from_dict(sampler), seed, split)
    return inst.to_dict(), graph.to_dict()


def generate_corpus(manifest: CorpusManifest, out_dir: str | Path | None = None, workers: int = 1) -> Corpus:
    sampler = manifest.sampler.to_dict()
    jobs = [(task, split, seed, sampler) for task, split, seed in manifest.jobs()]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            docs = list(pool.map(_job, jobs, chunksize=16))
    else:
        docs = [_job(j) for j in jobs]
    instances = [BenchmarkInstance.from_dict(d) for d, _ in docs]
    snapshots = {inst.graph_id: PropertyGraph.from_dict(g) for inst, (_, g) in zip(instances, docs)}
    check_split(instances)
    corpus = Corpus(manifest, instances, snapshots)
    if out_dir is not None:
        write_corpus(corpus, out_dir)
    logger.info("generated %d instances", len(instances))
    return corpus


def _dump(obj: Any) -> str:
    return json.dumps(plain(obj), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for split in ("train", "test"):
        lines = [_dump(i.to_dict()) for i in corpus.split(split)]
        (out / f"{split}.jsonl").write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    snaps = [_dump({"graph_id": gid, "snapshot": g.to_dict()}) for gid, g in corpus.snapshots.items()]
    (out / "snapshots.jsonl").write_text("".join(s + "\n" for s in snaps), encoding="utf-8")
    (out / "manifest.json").write_text(json.dumps(corpus.manifest.to_dict(), indent=2) + "\n", encoding="utf-8")


def read_corpus(out_dir: str | Path) -> Corpus:
    root = Path(out_dir)
    manifest = CorpusManifest.from_dict(json.loads((root / "manifest.json").read_text(encoding="utf-8")))
    instances = []
    for split in ("train", "test"):
        with (root / f"{split}.jsonl").open(encoding="utf-8") as fh:
            instances.extend(BenchmarkInstance.from_dict(json.loads(line)) for line in fh if line.strip())
    snapshots = {}
    with (root / "snapshots.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                doc = json.loads(line)
                snapshots[doc["graph_id"]] = PropertyGraph.from_dict(doc["snapshot"])
    return Corpus(manifest, instances, snapshots)


# ---------------------------------------------------------------------------
# bypass agent
# ---------------------------------------------------------------------------


def bypass_agent(instance: BenchmarkInstance, mode: str = "oracle", snapshot: PropertyGraph | None = None) -> Transcript:
    """Agent that skips simulation.

    ``oracle``: no calls at all, ground-truth answer copied in. ``static``: only the
    final decision call, issued against the unrestricted snapshot, answered from it.
    """
    gt = instance.ground_truth
    if mode == "oracle":
        return Transcript(gt.task_id, gt.instance_id, [], gt.answer)
    if mode != "static":
        raise ValueError(f"unknown bypass mode {mode!r}")
    if snapshot is None:
        raise ValueError("static bypass needs the instance snapshot")
    decision_call = gt.calls[-1]
    sandbox = Sandbox()
    gid = sandbox.create_session(snapshot)
    result = sandbox.call(gid, decision_call.name, decision_call.args)
    if instance.mode == "C":
        result = {"slots_required": greedy_coloring(snapshot).color_sum}
    try:
        answer = extract_answer(gt.task_id, result)
    except KeyError:
        answer = ""
    return Transcript(gt.task_id, gt.instance_id, [ToolCallRecord(decision_call.name, dict(decision_call.args))], answer)
