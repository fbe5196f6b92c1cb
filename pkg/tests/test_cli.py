import hashlib
import json
from pathlib import Path

import pytest

from txlife.cli import main
from txlife.ingest import to_ndjson
from txlife.testkit import SynthParams, cohort_batch, synth_project


@pytest.fixture(scope="module")
def cohort_file(tmp_path_factory):
    projects = [
        synth_project(SynthParams(seed=1, n_days=40, peak_day=3, peak_height=80, project_id="alpha")),
        synth_project(SynthParams(seed=2, n_days=50, peak_day=10, peak_height=60, decay_rate=0.2,
                                  project_id="beta", launch_day=19005)),
        synth_project(SynthParams(seed=3, n_days=8, peak_day=1, peak_height=20, project_id="gamma")),
    ]
    path = tmp_path_factory.mktemp("in") / "cohort.ndjson"
    path.write_bytes(to_ndjson(cohort_batch(projects).records))
    return path, projects


def _run(out, path, *extra):
    return main(["run", "--input", str(path), "--out", str(out), "--min-sales", "0",
                 "--gog-min-overlap", "5", "--report", str(out / "parse.json"), *extra])


def _digests(root: Path) -> dict:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file() and p.name != "parse.json"}


def test_full_pipeline(tmp_path, cohort_file):
    path, projects = cohort_file
    assert _run(tmp_path, path, "--svg") == 0
    report = json.loads((tmp_path / "report" / "report.json").read_text())
    assert len(report["summaries"]) == 3
    got = {s["project_id"]: (s["t_peak"], s["t_diminishing"]) for s in report["summaries"]}
    for p in projects:
        assert got[p.params.project_id] == (p.truth.t_peak, p.truth.t_diminishing)
    assert report["cohort"]["n_projects"] == 3
    assert report["validation"]["duplicate_tx_ids"] == []
    for name in ("projects.csv", "scatter.csv", "scatter.svg", "manifest.json"):
        assert (tmp_path / "report" / name).is_file()
    for name in ("project_graph.graphml", "project_graph.csv", "project_graph.dot", "summary.json"):
        assert (tmp_path / "gog" / name).is_file()
    header = (tmp_path / "report" / "projects.csv").read_text().splitlines()[0]
    assert header.startswith("project_id,n_records,launch_day,launch_date")


def test_min_sales_excludes(tmp_path, cohort_file):
    path, projects = cohort_file
    gamma = len(projects[2].batch)
    assert main(["run", "--input", str(path), "--out", str(tmp_path), "--min-sales", str(gamma + 1),
                 "--gog-min-overlap", "5", "--report", str(tmp_path / "parse.json")]) == 0
    report = json.loads((tmp_path / "report" / "report.json").read_text())
    assert sorted(s["project_id"] for s in report["summaries"]) == ["alpha", "beta"]
    assert report["excluded_projects"] == [{"project_id": "gamma", "n_records": gamma}]


def test_byte_identical_across_runs_and_jobs(tmp_path, cohort_file):
    path, _ = cohort_file
    assert _run(tmp_path / "a", path) == 0
    assert _run(tmp_path / "b", path, "--jobs", "2") == 0
    assert _digests(tmp_path / "a") == _digests(tmp_path / "b")


def test_stage_by_stage_matches_run(tmp_path, cohort_file):
    path, _ = cohort_file
    _run(tmp_path / "whole", path)
    common = ["--input", str(path), "--out", str(tmp_path / "staged"), "--min-sales", "0",
              "--gog-min-overlap", "5", "--report", str(tmp_path / "staged" / "parse.json")]
    for stage in ("ingest", "build", "metrics", "lifecycle", "gog", "report"):
        assert main([stage, *common]) == 0
    assert _digests(tmp_path / "whole") == _digests(tmp_path / "staged")


def test_missing_artifact_exit_1(tmp_path, capsys):
    assert main(["lifecycle", "--out", str(tmp_path)]) == 1
    assert "metrics" in capsys.readouterr().err


def test_missing_artifact_names_stage(tmp_path, capsys):
    main(["report", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert "lifecycle" in err


def test_bad_flags_exit_1(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["run", "--metric", "bogus"])
    assert e.value.code == 1
    assert main(["ingest", "--out", str(tmp_path)]) == 1
    assert main(["ingest", "--input", str(tmp_path / "nope.ndjson"), "--out", str(tmp_path)]) == 1
    assert main(["lifecycle", "--diminish-frac", "abc", "--out", str(tmp_path)]) == 1


def test_config_file(tmp_path, cohort_file):
    path, _ = cohort_file
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"min-sales": 0, "gog_min_overlap": 5, "metric": "volume"}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--input", str(path), "--out", str(out),
                 "--metric", "nodes", "--report", str(tmp_path / "p.json")]) == 0
    lc = json.loads((out / "lifecycle" / "lifecycle.json").read_text())
    assert lc["metric"] == "node_count"  # flag beats config
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"no_such_key": 1}))
    assert main(["run", "--config", str(bad), "--input", str(path), "--out", str(out)]) == 1
    bad.write_text("[1, 2")
    assert main(["run", "--config", str(bad), "--input", str(path), "--out", str(out)]) == 1


def test_malformed_input(tmp_path, capsys):
    src = tmp_path / "x.ndjson"
    good = '{"tx_id":"a","timestamp":86400,"from_addr":"0x1","to_addr":"0x2","value":"5","project_id":"P"}'
    src.write_text(good + "\n{not json\n")
    assert main(["ingest", "--input", str(src), "--out", str(tmp_path / "o"), "--strict"]) == 2
    assert '"line":2' in capsys.readouterr().err
    assert main(["ingest", "--input", str(src), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads(capsys.readouterr().err)
    assert rep[0]["n_records"] == 1 and rep[0]["malformed"][0]["line"] == 2


def test_synth_command(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--n-projects", "3", "--seed", "7"]) == 0
    assert (tmp_path / "synth.ndjson").stat().st_size > 0
    assert len(list((tmp_path / "truth").glob("*.json"))) == 3


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
