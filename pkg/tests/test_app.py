"""Tests for the application layer: config loading, the command-line
entry point, and the HTTP gateway."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from acurai.app import AppConfig, create_app, load_config, main, make_client
from acurai.llm import RecordingClient, ReplayClient, default_cassette_path

SAMPLES = Path(__file__).resolve().parents[1] / "src" / "acurai" / "resources" / "samples"
FLAGSHIP = SAMPLES / "flagship.json"
DEMO_DATASET = SAMPLES / "ragtruth_demo.jsonl"


class TestLoadConfig:
    def test_defaults(self):
        config = load_config(env={})
        assert config.pipeline.collision_threshold == 0.75
        assert config.replay is None
        assert config.llm_base_url is None

    def test_file_values(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "pipeline": {"collision_threshold": 0.5},
                    "trace_dir": "out",
                    "llm_base_url": "https://file.example",
                }
            ),
            "utf-8",
        )
        config = load_config(str(path), env={})
        assert config.pipeline.collision_threshold == 0.5
        assert config.trace_dir == "out"
        assert config.llm_base_url == "https://file.example"

    def test_env_overrides_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"llm_base_url": "https://file.example"}), "utf-8")
        env = {
            "ACURAI_LLM_BASE_URL": "https://env.example",
            "ACURAI_LLM_API_KEY": "sk-test",
            "ACURAI_EMBED_API_KEY": "em-test",
        }
        config = load_config(str(path), env=env)
        assert config.llm_base_url == "https://env.example"
        assert config.llm_api_key == "sk-test"
        assert config.embed_api_key == "em-test"

    def test_config_path_from_environment(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"trace_dir": "from-env"}), "utf-8")
        config = load_config(env={"ACURAI_CONFIG": str(path)})
        assert config.trace_dir == "from-env"

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"trace_dri": "typo"}), "utf-8")
        with pytest.raises(ValueError, match="trace_dri"):
            load_config(str(path), env={})

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json", "utf-8")
        with pytest.raises(ValueError):
            load_config(str(path), env={})


class TestMakeClient:
    def test_replay_path_selected(self):
        config = load_config(env={})
        client = make_client(AppConfig(pipeline=config.pipeline, replay=str(default_cassette_path())))
        assert isinstance(client, ReplayClient)

    def test_record_wraps_live_client(self, tmp_path):
        config = load_config(env={})
        client = make_client(
            AppConfig(
                pipeline=config.pipeline,
                record=str(tmp_path / "new.json"),
                llm_base_url="https://example.invalid",
            )
        )
        assert isinstance(client, RecordingClient)

    def test_offline_default_is_replay_of_bundled_cassette(self):
        config = load_config(env={})
        client = make_client(config)
        assert isinstance(client, ReplayClient)


class TestCli:
    def test_wilson_subcommand(self, capsys):
        assert main(["wilson", "37", "37"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload == {"low": 0.9059, "high": 1.0}

    def test_split_query_subcommand(self, capsys):
        code = main(
            ["split-query", "What are the chemical and physical properties of calcium and magnesium?"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["was_split"] is True
        assert len(payload["queries"]) == 4
        assert payload["truncated"] is False

    def test_run_subcommand_writes_trace(self, capsys, tmp_path):
        code = main(
            ["run", str(FLAGSHIP), "--replay", str(default_cassette_path()),
             "--trace-dir", str(tmp_path)]
        )
        assert code == 0
        captured = capsys.readouterr()
        payload = json.loads(captured.out)
        assert payload["verdict"] == "faithful"
        trace_file = tmp_path / f"{payload['trace_id']}.json"
        assert trace_file.exists()
        assert json.loads(trace_file.read_text("utf-8"))["trace_id"] == payload["trace_id"]

    def test_eval_subcommand_exit_zero_when_all_faithful(self, capsys):
        code = main(
            ["eval", str(DEMO_DATASET), "--replay", str(default_cassette_path())]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 5
        assert payload["all_faithful"] is True
        assert payload["interval"] == "[0.57, 1]"

    def test_eval_csv_export(self, capsys, tmp_path):
        out = tmp_path / "results.csv"
        code = main(
            ["eval", str(DEMO_DATASET), "--replay", str(default_cassette_path()),
             "--csv", str(out)]
        )
        assert code == 0
        assert out.read_text("utf-8").count("\n") == 6
        capsys.readouterr()

    def test_runtime_error_exits_one_with_json_on_stderr(self, capsys, tmp_path):
        record = tmp_path / "record.json"
        record.write_text(json.dumps({"query": "", "passages": ["p"]}), "utf-8")
        code = main(["run", str(record), "--replay", str(default_cassette_path())])
        assert code == 1
        captured = capsys.readouterr()
        assert "error" in json.loads(captured.err)

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["wilson", "37"])
        assert exc.value.code == 2

    def test_flags_accepted_after_subcommand(self, capsys, tmp_path):
        code = main(
            ["run", str(FLAGSHIP), "--trace-dir", str(tmp_path),
             "--replay", str(default_cassette_path())]
        )
        assert code == 0
        capsys.readouterr()


@pytest.fixture(scope="module")
def gateway():
    config = load_config(env={})
    app = create_app(config, llm=ReplayClient(default_cassette_path()))
    with TestClient(app, raise_server_exceptions=False) as client:
        yield client


@pytest.fixture(scope="module")
def flagship_request():
    record = json.loads(FLAGSHIP.read_text("utf-8"))
    return {"query": record["query"], "passages": record["passages"]}


class TestGateway:
    def test_healthz(self, gateway):
        resp = gateway.get("/healthz")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["service"] == "acurai"

    def test_answer_returns_verdict_and_timings(self, gateway, flagship_request):
        resp = gateway.post("/v1/answer", json=flagship_request)
        assert resp.status_code == 200
        body = resp.json()
        assert body["verdict"] == "faithful"
        assert "**Specifics**" in body["answer"]
        assert set(body["timings"]) == {"split", "facts", "answer", "compose", "total"}

    def test_trace_round_trip(self, gateway, flagship_request):
        trace_id = gateway.post("/v1/answer", json=flagship_request).json()["trace_id"]
        resp = gateway.get(f"/v1/trace/{trace_id}")
        assert resp.status_code == 200
        trace = resp.json()
        assert trace["trace_id"] == trace_id
        assert trace["final_verdict"] == "faithful"
        assert len(trace["queries"]) == 4

    def test_unknown_trace_is_404(self, gateway):
        resp = gateway.get("/v1/trace/feedfacefeed")
        assert resp.status_code == 404
        assert "feedfacefeed" in resp.json()["error"]

    def test_validation_failure_is_400_with_field_details(self, gateway):
        resp = gateway.post("/v1/answer", json={"query": "", "passages": []})
        assert resp.status_code == 400
        body = resp.json()
        assert body["error"] == "invalid request"
        fields = {item["field"] for item in body["fields"]}
        assert fields == {"query", "passages"}

    def test_unexpected_fields_rejected(self, gateway, flagship_request):
        resp = gateway.post("/v1/answer", json={**flagship_request, "temperature": 2})
        assert resp.status_code == 400

    def test_missing_fixture_maps_to_502_with_kind(self, gateway, flagship_request):
        resp = gateway.post(
            "/v1/answer",
            json={**flagship_request, "options": {"model": "no-such-model"}},
        )
        assert resp.status_code == 502
        body = resp.json()
        assert body["kind"] == "missing-fixture"

    def test_include_specifics_option(self, gateway, flagship_request):
        resp = gateway.post(
            "/v1/answer",
            json={**flagship_request, "options": {"include_specifics": False}},
        )
        assert resp.status_code == 200
        assert "**Specifics**" not in resp.json()["answer"]
