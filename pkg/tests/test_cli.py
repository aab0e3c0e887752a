import csv
import json
import os

import pytest

from parmatroid.cli import main
from parmatroid.errors import DomainError
from parmatroid.experiment import (COLUMNS, ExperimentSpec, ResultRecord, loglog_slope, read_records,
                                   run_experiment, summarize, write_outputs)
from parmatroid.instances import from_spec, generate, load, to_spec


def test_find_basis_outputs(tmp_path, capsys):
    spec = tmp_path / "tri.json"
    spec.write_text(json.dumps({"family": "graphic", "vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}))
    assert main(["find-basis", "--matroid", str(spec), "--algo", "kuw", "--out", str(tmp_path / "o")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rank"] == 2 and out["valid"]
    ledger = json.loads((tmp_path / "o" / "ledger.json").read_text())
    assert set(ledger) == {"rounds", "totalQueries", "perRound", "seed"}


def test_find_basis_with_trace_and_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 1000, "verify": True}))
    assert main(["find-basis", "--matroid", "gen:complete:n=200", "--config", str(cfg), "--trace"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "trace" in out


def test_decompose_and_sequence(capsys):
    assert main(["decompose", "--matroid", "gen:rank1:n=256"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["stopReason"] in ("contractReturn", "deleteReturn", "exhausted", "independent")
    assert main(["sequence", "--matroid", "gen:uniform:n=6,r=2", "--seed", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["sequence"]) == 2


def test_bad_inputs_exit_nonzero(tmp_path, capsys):
    assert main(["find-basis", "--matroid", "gen:nosuch:n=4"]) == 2
    assert "family" in capsys.readouterr().err
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"speed": 3}))
    assert main(["find-basis", "--matroid", "gen:free:n=4", "--config", str(cfg)]) == 2
    with pytest.raises(SystemExit):
        main(["find-basis"])


def test_experiment_grid_cardinality(tmp_path):
    spec = {"family": "uniform", "sizes": [256, 1024], "algorithms": ["kuw", "main37"], "seeds": [0, 1, 2],
            "out": str(tmp_path), "trace": True}
    records, failures = run_experiment(spec)
    assert len(records) == 12 and not failures
    with open(tmp_path / "records.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == COLUMNS and len(rows) == 12
    assert len([f for f in os.listdir(tmp_path) if f.startswith("trace_")]) == 12


def test_unknown_family_names_field():
    with pytest.raises(DomainError, match="family"):
        ExperimentSpec.parse({"family": "bogus", "sizes": [4], "algorithms": ["kuw"]})
    with pytest.raises(DomainError, match="algorithms"):
        ExperimentSpec.parse({"family": "uniform", "sizes": [4], "algorithms": []})
    with pytest.raises(DomainError, match="sizes"):
        ExperimentSpec.parse({"family": "uniform", "sizes": [], "algorithms": ["kuw"]})
    with pytest.raises(DomainError, match="config"):
        ExperimentSpec.parse({"family": "uniform", "sizes": [4], "algorithms": ["kuw"], "config": {"x": 1}})


def test_budget_failure_recorded(tmp_path):
    spec = {"family": "uniform", "sizes": [64], "algorithms": ["main37"], "budget_cap": 10,
            "out": str(tmp_path)}
    records, failures = run_experiment(spec)
    assert records == [] and len(failures) == 1
    assert "BudgetExceeded" in failures[0]["reason"]
    assert (tmp_path / "failures.jsonl").exists()


def test_rank_one_records_favor_main(tmp_path):
    records, _ = run_experiment({"family": "rank1", "sizes": [4096], "algorithms": ["kuw", "main37"],
                                 "seeds": [0, 1]})
    kuw = {r.seed: r.rounds for r in records if r.algo == "kuw"}
    for r in records:
        if r.algo == "main37":
            assert r.rounds < kuw[r.seed]


def test_summary_roundtrip_and_slopes(tmp_path):
    records, _ = run_experiment({"family": "uniform", "sizes": [64, 256, 1024, 4096], "algorithms": ["kuw"]})
    table = summarize(records)
    assert abs(table[0]["slope"] - 0.5) <= 0.15
    write_outputs(str(tmp_path), records)
    for name in ("records.csv", "records.jsonl"):
        assert summarize(read_records(str(tmp_path / name))) == table
    assert summarize(records[:1])[0]["slope"] is None
    assert summarize([]) == []
    assert loglog_slope([4, 16], [2, 4]) == pytest.approx(0.5)


def test_summarize_command(tmp_path, capsys):
    rec = ResultRecord("uniform", 64, "kuw", 0, 13, 300, 21, 1.5, 0, 0, 0)
    write_outputs(str(tmp_path), [rec])
    assert main(["summarize", str(tmp_path / "records.csv"), "--out", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "summary.csv").exists()
    assert json.loads(capsys.readouterr().out.splitlines()[0])["mean_rounds"] == 13


def test_experiment_command(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"families": ["partition", "free"], "sizes": [64], "algorithms": ["kps49"]}))
    assert main(["experiment", str(spec), "--out", str(tmp_path / "o"), "--seed", "5"]) == 0
    assert (tmp_path / "o" / "summary.csv").exists()


def test_spec_roundtrip():
    for text in ["gen:partition:n=40", "gen:graphic:n=40", "gen:linear7:n=20", "gen:direct_sum:n=30",
                 "gen:uniform:n=9,r=4"]:
        m = generate(text)
        again = from_spec(json.loads(json.dumps(to_spec(m))))
        assert to_spec(again) == to_spec(m)
    with pytest.raises(DomainError):
        from_spec({"family": "uniform", "n": 3})
    with pytest.raises(DomainError):
        load("gen:uniform:r=3")
