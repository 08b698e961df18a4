from __future__ import annotations

import csv
import io
import json

import pytest

from altfolner.cli import RunConfig, main, run
from altfolner.folner import profile_to_json, sample_profile


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_delta_csv(capsys):
    code, out, _ = invoke(capsys, "delta", "--d", "5", "--k-max", "10")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["k", "delta_num", "delta_den", "delta_float"]
    assert (r[0]["delta_num"], r[0]["delta_den"]) == ("4", "5")
    assert (r[1]["delta_num"], r[1]["delta_den"]) == ("1476", "2101")
    assert len(r) == 11


def test_oracle(capsys):
    code, out, _ = invoke(capsys, "oracle", "--d", "2", "--k", "2")
    assert code == 0
    last = rows(out)[-1]
    assert last["brute"] == last["recursion"] == "3/4"


def test_oracle_mixed(capsys):
    code, out, _ = invoke(capsys, "oracle", "--valency", '{"prefix": [2], "period": [3]}', "--K", "2")
    assert code == 0
    assert rows(out)[-1]["brute"] == "19/29"


def test_lemma_check_and_reproducibility(capsys):
    args = ("lemma-check", "--d", "5", "--k", "2", "--n", "1000", "--seed", "7")
    code, first, _ = invoke(capsys, *args)
    assert code == 0
    assert all(r["violations"] == "0" for r in rows(first))
    _, second, _ = invoke(capsys, *args)
    assert first == second


def test_json_report(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = invoke(capsys, "sample", "--d", "5", "--k", "1", "--n", "2000", "--seed", "3",
                        "--format", "json", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert set(rep) == {"metadata", "rows", "summary"}
    assert rep["metadata"]["config"]["seed"] == 3
    assert rep["rows"][0]["expected"] == "625/2101"
    assert rep["summary"]["passed"] is True


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ALTFOLNER_SEED", "5")
    _, env_out, _ = invoke(capsys, "sample", "--d", "5", "--k", "1", "--n", "500")
    _, flag_out, _ = invoke(capsys, "sample", "--d", "5", "--k", "1", "--n", "500", "--seed", "5")
    _, other, _ = invoke(capsys, "sample", "--d", "5", "--k", "1", "--n", "500", "--seed", "6")
    assert env_out == flag_out != other


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 3, "k_max": 2}))
    _, out, _ = invoke(capsys, "delta", "--config", str(cfg))
    assert len(rows(out)) == 3 and rows(out)[0]["delta_den"] == "3"
    _, out, _ = invoke(capsys, "delta", "--config", str(cfg), "--k-max", "4")
    assert len(rows(out)) == 5


def test_exit_codes(capsys):
    assert invoke(capsys, "nosuch")[0] == 2
    assert invoke(capsys, "delta")[0] == 2
    assert invoke(capsys, "delta", "--d", "1")[0] == 2
    assert invoke(capsys, "epsilon", "--valency", "{bad", "--K", "1")[0] == 2
    assert invoke(capsys, "cardinality", "--d", "5", "--k-max", "30")[0] == 3
    assert invoke(capsys, "oracle", "--d", "2", "--k", "6")[0] == 3


def test_member_profile(capsys, tmp_path, rng):
    p = sample_profile(5, 1, "interior", rng)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(profile_to_json(p)))
    code, out, _ = invoke(capsys, "member", "--profile", str(path))
    assert code == 0
    r = rows(out)[0]
    assert r["member"] == "True" and r["interior"] == "True"


def test_member_word(capsys, tmp_path):
    gens = tmp_path / "g.json"
    gens.write_text(json.dumps({"x": "(1 2 3)", "y": {"a": ["e", "e", "e", "e"], "rho": "(2 3 4)"}}))
    code, out, _ = invoke(capsys, "member", "--word", "y x", "--generators", str(gens), "--d", "5", "--k", "0")
    assert code == 0
    assert rows(out)[0]["member"] == "True"
    # x first puts the B letter under slot 3, where an A label is required
    code, out, _ = invoke(capsys, "member", "--word", "x y", "--generators", str(gens), "--d", "5", "--k", "0")
    assert code == 0
    assert rows(out)[0]["member"] == "False"
    code, out, _ = invoke(capsys, "member", "--word", "x z", "--generators", str(gens), "--d", "5")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ("epsilon", "--d", "5", "--K", "4"),
    ("cardinality", "--d", "5", "--k-max", "2"),
    ("folfun", "--d", "5", "--n", "2", "5"),
    ("embed", "--n", "10", "--seed", "2"),
    ("orbit", "--d", "5", "--j", "2"),
    ("decay", "--d", "5", "--K-max", "50", "--eta", "0.24", "--stride", "10"),
    ("sample", "--d", "5", "--k", "2", "--n", "100", "--stratum", "boundary"),
])
def test_other_subcommands_pass(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 0, err
    assert rows(out)


def test_check_failure_exit_code(monkeypatch, capsys):
    import altfolner.cli as cli

    def broken(d, k, n, seed, jobs=1):
        return {"d": d, "k": k, "n": n, "interior_samples": 0,
                "violations": {"ga_member": 1}, "witnesses": [{"violated": ["ga_member"], "profile": {}}]}
    monkeypatch.setattr(cli, "lemma_check", broken)
    code, _, err = invoke(capsys, "lemma-check", "--d", "5", "--k", "1", "--n", "1")
    assert code == 1
    assert "FAILED ga_member" in err and "profile" in err
