"""Scoring of agent transcripts: answer accuracy, order-sensitive tool-chain F1 and illusive accuracy."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from graphsim.core import canonical_json, format_decimal, plain, to_value

F1_THRESHOLD = 0.90
IA_THRESHOLD = 0.30
EXCLUDED_ARGS = frozenset({"graph_id"})

TASKS = (
    "CONNECTIVITY",
    "NEIGHBOR",
    "PREDECESSOR",
    "EDGE",
    "fc_graph_info",
    "fc_node_info",
    "fc_bipartite_maximum_matching",
    "fc_maximum_flow",
    "fc_constraint_connection",
    "fc_constraint_path",
    "delta_plus_one_coloring",
)

TASK_GROUPS = {
    "Basic Traversal": ("CONNECTIVITY", "NEIGHBOR", "PREDECESSOR", "EDGE"),
    "Information Retrieval": ("fc_graph_info", "fc_node_info"),
    "Graph Algorithms": ("fc_bipartite_maximum_matching", "fc_maximum_flow"),
    "Scenario-Simulation": ("fc_constraint_connection", "fc_constraint_path"),
    "Hybrid / Mode C": ("delta_plus_one_coloring",),
}


def _canon(value: Any) -> str:
    # to_value normalizes numbers; nested structures go through canonical_json as-is
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = to_value(value)
    return canonical_json(value)


@dataclass
class ToolCallRecord:
    name: str
    args: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> ToolCallRecord:
        return cls(doc["name"], dict(doc.get("args") or doc.get("arguments") or {}))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "args": plain(self.args)}


@dataclass
class GroundTruthInstance:
    task_id: str
    instance_id: str
    calls: list[ToolCallRecord]
    required_args: list[list[str]]
    answer: str

    def __post_init__(self) -> None:
        if len(self.required_args) != len(self.calls):
            raise ValueError("required_args needs one entry per ground-truth call")
        for i, (call, req) in enumerate(zip(self.calls, self.required_args)):
            extra = set(req) - set(call.args)
            if extra:
                raise ValueError(f"call {i}: required args {sorted(extra)} missing from its args")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> GroundTruthInstance:
        calls = [ToolCallRecord.from_dict(c) for c in doc["calls"]]
        req = doc.get("required_args")
        if req is None:
            req = [sorted(set(c.args) - EXCLUDED_ARGS) for c in calls]
        return cls(doc["task_id"], str(doc["instance_id"]), calls, [list(r) for r in req], str(doc["answer"]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "instance_id": self.instance_id,
            "calls": [c.to_dict() for c in self.calls],
            "required_args": [sorted(r) for r in self.required_args],
            "answer": self.answer,
        }


@dataclass
class Transcript:
    task_id: str
    instance_id: str
    calls: list[ToolCallRecord]
    final_answer: str

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> Transcript:
        return cls(doc["task_id"], str(doc["instance_id"]),
                   [ToolCallRecord.from_dict(c) for c in doc.get("calls", [])], str(doc.get("final_answer", "")))

    def to_dict(self) -> dict[str, Any]:
        return {"task_id": self.task_id, "instance_id": self.instance_id,
                "calls": [c.to_dict() for c in self.calls], "final_answer": self.final_answer}


@dataclass
class ScoreCard:
    precision: float
    recall: float
    f1: float
    matched: int
    m: int
    n: int
    acc: float | None = None


@dataclass
class ReportRow:
    name: str
    acc: float
    f1: float
    ia: float
    ci_low: float
    ci_high: float
    n: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "acc": self.acc, "f1": self.f1, "ia": self.ia,
                "ci": [self.ci_low, self.ci_high], "n": self.n}


def f1_from_counts(matched: int, m: int, n: int) -> tuple[float, float, float]:
    p = matched / m if m else 0.0
    r = matched / n if n else 1.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def call_matches(pred: ToolCallRecord, gt: ToolCallRecord, required: Iterable[str]) -> bool:
    if pred.name != gt.name:
        return False
    for key in required:
        if key in EXCLUDED_ARGS:
            continue
        if key not in pred.args or _canon(pred.args[key]) != _canon(gt.args[key]):
            return False
    return True


def match_sequence(pred: Sequence[ToolCallRecord], gt: GroundTruthInstance) -> ScoreCard:
    """Position i of the prediction is compared only against position i of the ground truth."""
    matched = sum(
        call_matches(p, g, req) for p, g, req in zip(pred, gt.calls, gt.required_args)
    )
    m, n = len(pred), len(gt.calls)
    p, r, f1 = f1_from_counts(matched, m, n)
    return ScoreCard(p, r, f1, matched, m, n)


def canonical_answer(text: Any) -> str:
    if isinstance(text, bool):
        return "true" if text else "false"
    if not isinstance(text, str):
        return _canon(plain(text)) if isinstance(text, (list, dict)) else _canon(text)
    s = text.strip()
    if s.lower() in ("true", "false"):
        return s.lower()
    try:
        d = Decimal(s)
    except InvalidOperation:
        d = None
    if d is not None and d.is_finite():
        return format_decimal(d)
    if s[:1] in "[{":
        try:
            return canonical_json(json.loads(s, parse_float=Decimal, parse_int=Decimal))
        except ValueError:
            pass
    return s


def score_instance(t: Transcript, gt: GroundTruthInstance) -> ScoreCard:
    card = match_sequence(t.calls, gt)
    card.acc = 1.0 if canonical_answer(t.final_answer) == canonical_answer(gt.answer) else 0.0
    return card


def compute_ia(acc: float, f1: float) -> float:
    return acc - f1


def confidence_interval(p: float, n: int) -> tuple[float, float]:
    """Normal-approximation 95% interval clamped to [0, 1]."""
    if n <= 0:
        raise ValueError("n must be positive")
    half = 1.96 * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def _row(name: str, acc: float, f1: float, n: int) -> ReportRow:
    lo, hi = confidence_interval(acc, n) if n else (acc, acc)
    return ReportRow(name, acc, f1, compute_ia(acc, f1), lo, hi, n)


def aggregate(
    scores: Mapping[str, Sequence[ScoreCard]], groups: Mapping[str, Sequence[str]] | None = None
) -> dict[str, Any]:
    """Per-task means, unweighted macro overall, and optional groups.

    Group CIs use the per-task instance count, since grouped figures are
    means of task means rather than pooled proportions.
    """
    tasks = {}
    for task, cards in scores.items():
        tasks[task] = _row(task, _mean([c.acc or 0.0 for c in cards]), _mean([c.f1 for c in cards]), len(cards))
    overall = _row(
        "Overall",
        _mean([r.acc for r in tasks.values()]),
        _mean([r.f1 for r in tasks.values()]),
        min((r.n for r in tasks.values()), default=0),
    )
    grouped = {}
    for gname, members in (groups or {}).items():
        rows = [tasks[t] for t in members if t in tasks]
        if not rows:
            continue
        grouped[gname] = _row(gname, _mean([r.acc for r in rows]), _mean([r.f1 for r in rows]),
                              min(r.n for r in rows))
    return {"tasks": tasks, "overall": overall, "groups": grouped}


def aggregate_means(task_means: Mapping[str, tuple[float, float]], n: int = 100) -> dict[str, Any]:
    """Same as :func:`aggregate` but from already-computed per-task (acc, f1) means."""
    tasks = {t: _row(t, a, f, n) for t, (a, f) in task_means.items()}
    overall = _row("Overall", _mean([r.acc for r in tasks.values()]), _mean([r.f1 for r in tasks.values()]), n)
    grouped = {}
    for gname, members in TASK_GROUPS.items():
        rows = [tasks[t] for t in members if t in tasks]
        if rows:
            grouped[gname] = _row(gname, _mean([r.acc for r in rows]), _mean([r.f1 for r in rows]), n)
    return {"tasks": tasks, "overall": overall, "groups": grouped}


def threshold_report(overall: ReportRow, f1_min: float = F1_THRESHOLD, ia_max: float = IA_THRESHOLD) -> dict[str, Any]:
    reasons = []
    # a little slack so 0.9 computed as 0.8999999999 still counts as on the boundary
    eps = 1e-9
    if overall.f1 < f1_min - eps:
        reasons.append(f"tool-chain F1 {overall.f1:.4f} below {f1_min:.2f}")
    if overall.ia > ia_max + eps:
        reasons.append(f"illusive accuracy {overall.ia:.4f} above {ia_max:.2f}")
    return {"deployable": not reasons, "reasons": reasons}


# -- files -------------------------------------------------------------------


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_ground_truth(path: str | Path) -> list[GroundTruthInstance]:
    out = []
    for doc in read_jsonl(path):
        # corpus records nest the ground truth; bare files hold it at top level
        out.append(GroundTruthInstance.from_dict(doc.get("ground_truth", doc)))
    return out


def load_transcripts(path: str | Path) -> list[Transcript]:
    return [Transcript.from_dict(doc) for doc in read_jsonl(path)]


def evaluate(transcripts: Iterable[Transcript], truths: Iterable[GroundTruthInstance]) -> dict[str, Any]:
    """Score transcripts against ground truth; instances with no transcript score as empty and wrong."""
    by_key = {(t.task_id, t.instance_id): t for t in transcripts}
    scores: dict[str, list[ScoreCard]] = defaultdict(list)
    for gt in truths:
        t = by_key.get((gt.task_id, gt.instance_id)) or Transcript(gt.task_id, gt.instance_id, [], "")
        scores[gt.task_id].append(score_instance(t, gt))
    ordered = {task: scores[task] for task in TASKS if task in scores}
    ordered.update({task: cards for task, cards in scores.items() if task not in ordered})
    report = aggregate(ordered, TASK_GROUPS)
    report["threshold"] = threshold_report(report["overall"])
    return report


def report_document(report: Mapping[str, Any]) -> dict[str, Any]:
    return {
        "tasks": [r.to_dict() for r in report["tasks"].values()],
        "groups": [r.to_dict() for r in report["groups"].values()],
        "overall": report["overall"].to_dict(),
        "threshold": report.get("threshold") or threshold_report(report["overall"]),
    }


def format_report(report: Mapping[str, Any]) -> str:
    lines = [f"{'task':<32} {'Acc':>7} {'F1':>7} {'IA':>8}"]
    for r in report["tasks"].values():
        lines.append(f"{r.name:<32} {r.acc:>7.4f} {r.f1:>7.4f} {r.ia:>8.4f}")
    o = report["overall"]
    lines.append(f"{'Overall':<32} {o.acc:>7.4f} {o.f1:>7.4f} {o.ia:>8.4f}")
    if report["groups"]:
        lines.append("")
        lines.append(f"{'group':<32} {'Acc [95% CI]':>20} {'F1':>7}")
        for g in report["groups"].values():
            lines.append(f"{g.name:<32} {g.acc:.2f} [{g.ci_low:.2f}, {g.ci_high:.2f}]{'':>4} {g.f1:>7.3f}")
    th = report.get("threshold") or threshold_report(o)
    lines.append("")
    lines.append("deployable" if th["deployable"] else "not deployable: " + "; ".join(th["reasons"]))
    return "\n".join(lines)
