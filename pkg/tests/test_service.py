from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from graphsim import cli, registry
from graphsim.benchgen import PLUGIN_FOR_TASK, SamplerConfig, bypass_agent, generate_task
from graphsim.core import plain
from graphsim.sandbox import Sandbox
from graphsim.service import ServiceConfig, create_app


@pytest.fixture
def client():
    return TestClient(create_app(Sandbox()))


@pytest.fixture
def session(client, approval_graph):
    r = client.post("/sessions", json={"snapshot": plain(approval_graph.to_dict())})
    assert r.status_code == 201
    return r.json()["graph_id"]


def call(client, op, **args):
    return client.post("/call", json={"name": op, "arguments": args})


class TestSchemas:
    def test_complete(self, client):
        docs = client.get("/schemas").json()
        assert len(docs) == 20
        canonical = [d for d in docs if "alias_of" not in d]
        assert len(canonical) == 18 == len(registry.OPERATIONS) - len(registry.ALIASES)
        by_name = {d["name"]: d for d in docs}
        assert by_name["create_node"]["alias_of"] == "create_nodes"
        assert by_name["create_edge"]["alias_of"] == "create_edges"
        sp = by_name["shortest_path"]["parameters"]
        assert sorted(sp["required"]) == ["graph_id", "source", "target"]
        for d in docs:
            assert d["description"] and "graph_id" in d["parameters"]["properties"]

    def test_schemas_are_valid_json_schema(self, client):
        from jsonschema import Draft202012Validator

        for d in client.get("/schemas").json():
            Draft202012Validator.check_schema(d["parameters"])


class TestCalls:
    def test_approval_flow(self, client, session):
        r = call(client, "match_nodes", graph_id=session, properties={"ijudgemethod": {"op": "ne", "value": "1"}})
        assert r.status_code == 200 and r.json()["nodes"] == ["Node_B", "Node_C", "Node_F"]
        r = call(client, "delete_nodes", graph_id=session, node_names=r.json()["nodes"])
        assert r.json()["deleted_edges"] == 7
        r = call(client, "shortest_path", graph_id=session, source="Dept_Finance", target="CFO_Node")
        assert r.json()["path"] == ["Dept_Finance", "VP_Ops", "CFO_Node"]
        log = client.get(f"/sessions/{session}/log").json()["entries"]
        assert [e["seq"] for e in log] == [1, 2, 3]
        rep = client.post(f"/sessions/{session}/replay").json()
        assert rep["ok"]
        snap = client.get(f"/sessions/{session}/snapshot").json()
        assert snap["state_hash"] == rep["actual_hash"]
        assert len(snap["snapshot"]["nodes"]) == 14

    def test_error_statuses(self, client, session):
        assert call(client, "teleport", graph_id=session).status_code == 400
        assert call(client, "shortest_path", graph_id=session, source="x").status_code == 400
        assert call(client, "get_node_info", graph_id=session, name="ghost").status_code == 404
        r = call(client, "create_nodes", graph_id=session, nodes=[{"name": "CFO_Node"}])
        assert r.status_code == 409 and r.json()["error"]["code"] == "conflict"
        assert len(client.get(f"/sessions/{session}/log").json()["entries"]) == 4

    def test_missing_graph_id(self, client):
        r = call(client, "get_graph_info")
        assert r.status_code == 400 and "graph_id" in r.json()["error"]["message"]
        assert client.post("/call", json={"arguments": {}}).status_code == 400

    def test_unknown_session(self, client):
        r = call(client, "get_graph_info", graph_id="nope")
        assert r.status_code == 404 and r.json()["error"]["code"] == "session_not_found"
        assert client.get("/sessions/nope/log").status_code == 404
        assert client.delete("/sessions/nope").status_code == 404

    def test_bad_snapshot(self, client):
        r = client.post("/sessions", json={"nodes": [{"name": "a"}], "edges": [{"source": "a", "target": "b", "rel_type": "L"}]})
        assert r.status_code == 400

    def test_plain_snapshot_body_and_drop(self, client, chain):
        gid = client.post("/sessions", json=chain.to_dict()).json()["graph_id"]
        assert client.get("/health").json()["sessions"] == 1
        assert client.delete(f"/sessions/{gid}").status_code == 200
        assert client.get("/health").json()["sessions"] == 0

    def test_alias_over_the_wire(self, client, session):
        r = call(client, "create_node", graph_id=session, name="New", label="X")
        assert r.status_code == 200
        assert client.get(f"/sessions/{session}/log").json()["entries"][0]["name"] == "create_nodes"

    def test_decimal_wire_roundtrip(self, client, chain):
        gid = client.post("/sessions", json={"snapshot": chain.to_dict(), "graph_id": "w"}).json()["graph_id"]
        assert gid == "w"
        call(client, "set_edge_weights", graph_id=gid, assignments=[{"source": "a", "target": "b", "rel_type": "LINK", "weight": 100}])
        call(client, "update_edges", graph_id=gid, edges=[{"source": "a", "target": "b", "rel_type": "LINK"}],
             weight={"op": "scale", "value": 1.12})
        snap = client.get(f"/sessions/{gid}/snapshot").json()["snapshot"]
        edge = next(e for e in snap["edges"] if e["source"] == "a")
        assert edge["weight"] == 112
        assert client.post(f"/sessions/{gid}/replay").json()["ok"]


class TestConfig:
    def test_defaults(self):
        assert ServiceConfig.load(env={}) == ServiceConfig()

    def test_file_and_env(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"port": 9000, "session_ttl": 30}))
        cfg = ServiceConfig.load(path, env={"GRAPHSIM_PORT": "9100", "GRAPHSIM_LOG_DIR": "/tmp/x"})
        assert (cfg.port, cfg.session_ttl, cfg.log_dir) == (9100, 30.0, "/tmp/x")

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"prot": 1}))
        with pytest.raises(ValueError):
            ServiceConfig.load(path, env={})

    def test_log_dir_used(self, tmp_path, chain):
        app = create_app(config=ServiceConfig(log_dir=str(tmp_path)))
        c = TestClient(app)
        gid = c.post("/sessions", json={"snapshot": chain.to_dict(), "graph_id": "g1"}).json()["graph_id"]
        call(c, "get_graph_info", graph_id=gid)
        assert (tmp_path / "g1.jsonl").read_text().count("\n") == 1


class TestCli:
    def test_demo(self, capsys):
        assert cli.main(["demo"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["final_path"] == ["Dept_Finance", "VP_Ops", "CFO_Node"]
        assert cli.main(["demo", "restructure"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["max_degree"] == 14 and "assignment" not in doc["decision"]

    def test_replay(self, tmp_path, capsys, approval_graph):
        sb = Sandbox(log_dir=tmp_path)
        gid = sb.create_session(approval_graph, graph_id="r")
        sb.call(gid, "delete_nodes", {"node_names": ["Node_B"]})
        snap, log = str(tmp_path / "r.snapshot.json"), tmp_path / "r.jsonl"
        assert cli.main(["replay", "--snapshot", snap, "--log", str(log)]) == 0
        line = json.loads(log.read_text())
        line["result"]["deleted_edges"] += 1
        log.write_text(json.dumps(line) + "\n")
        capsys.readouterr()
        assert cli.main(["replay", "--snapshot", snap, "--log", str(log)]) == 1
        assert json.loads(capsys.readouterr().out)["first_divergence"] == 1

    def test_gen_and_eval(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        assert cli.main(["gen", "--smoke", "--out", str(out)]) == 0
        assert len((out / "test.jsonl").read_text().splitlines()) == 11
        inst, _ = generate_task(PLUGIN_FOR_TASK["EDGE"], "EDGE", SamplerConfig(), 1)
        gt_path, tr_path = tmp_path / "gt.jsonl", tmp_path / "tr.jsonl"
        gt_path.write_text(json.dumps(inst.to_dict()) + "\n")
        bypass = bypass_agent(inst)
        tr_path.write_text(json.dumps(bypass.to_dict()) + "\n")
        assert cli.main(["eval", "--transcripts", str(tr_path), "--ground-truth", str(gt_path)]) == 2
        perfect = {**bypass.to_dict(), "calls": [c.to_dict() for c in inst.ground_truth.calls]}
        tr_path.write_text(json.dumps(perfect) + "\n")
        report = tmp_path / "r.json"
        assert cli.main(["eval", "--transcripts", str(tr_path), "--ground-truth", str(gt_path),
                         "--json", str(report)]) == 0
        assert json.loads(report.read_text())["threshold"]["deployable"]

    def test_bad_input_exits_1(self, tmp_path):
        assert cli.main(["replay", "--snapshot", str(tmp_path / "none.json"), "--log", str(tmp_path / "x")]) == 1
