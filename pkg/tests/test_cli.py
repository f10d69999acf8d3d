import csv
import json
import subprocess
import sys

import pytest

from strongnash.cli import main, parse_grid
from strongnash.game import serialize_game
from strongnash.generator import FIXTURES, fixture


@pytest.fixture
def fixdir(tmp_path):
    d = tmp_path / "fixtures"
    d.mkdir()
    for name in FIXTURES:
        (d / f"{name}.json").write_bytes(serialize_game(fixture(name)))
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_fig2(capsys, fixdir):
    code, out, _ = run(capsys, "solve", fixdir / "fig2.json", "--algorithm", "iterated", "--mode", 1)
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == 1
    assert rep["status"] == "FoundSNE" and rep["values"] == ["5/2", "5/2"]
    assert rep["sne_kind"] == "mixed"


def test_solve_fig1_and_fig4(capsys, fixdir):
    assert run(capsys, "solve", fixdir / "fig1.json")[0] == 1
    code, out, _ = run(capsys, "solve", fixdir / "fig4.json", "--mode", 2, "--oracle", "milp")
    assert code == 0 and json.loads(out)["values"] == [4, 4]
    code, out, _ = run(capsys, "solve", fixdir / "fig3.json", "--format", "text")
    assert code == 0 and out.startswith("FoundSNE")


def test_solve_unknown_exit_code(capsys, fixdir):
    code, out, _ = run(capsys, "solve", fixdir / "fig4.json", "--mode", 0, "--timeout", 0)
    assert code == 3 and json.loads(out)["status"] == "Unknown"


def test_solve_errors(capsys, tmp_path, fixdir):
    bad = tmp_path / "bad.json"
    bad.write_text('{"agents": 2, "actions": [2], "payoffs": []}')
    code, _, err = run(capsys, "solve", bad)
    assert code == 2 and "actions" in err
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["solve", str(fixdir / "fig1.json"), "--mode", "9"])
    assert e.value.code == 2


def test_seed_from_environment(capsys, fixdir, monkeypatch):
    monkeypatch.setenv("STRONGNASH_SEED", "oops")
    assert run(capsys, "solve", fixdir / "fig2.json")[0] == 2
    monkeypatch.setenv("STRONGNASH_SEED", "5")
    assert run(capsys, "solve", fixdir / "fig2.json", "--algorithm", "spatial")[0] == 0


@pytest.mark.parametrize("game, prof, what, code", [
    ("fig2", [[0, 0, 1], [0, 0, 1]], "sne", 1),
    ("fig3", [[0, 0, 1], [0, 0, 1]], "sne", 0),
    ("fig1", [[0, 1], [0, 1]], "ne", 0),
    ("fig1", [[1, 0], [1, 0]], "ne", 1),
    ("fig1", [[0, 1], [0, 1]], "pareto-weak", 1),
    ("fig2", [["1/2", "1/2", 0], ["1/2", "1/2", 0]], "pareto-strong", 0),
])
def test_verify(capsys, tmp_path, fixdir, game, prof, what, code):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"strategies": prof}))
    got, out, _ = run(capsys, "verify", fixdir / f"{game}.json", p, "--what", what)
    rep = json.loads(out)
    assert got == code and rep["holds"] == (code == 0)
    if game == "fig2" and what == "sne":
        assert rep["coalition"] == [1, 2]
        assert rep["witness"] == [[0, 1, 0], ["1/2", "1/2", 0]]


def test_verify_shape_mismatch(capsys, tmp_path, fixdir):
    p = tmp_path / "x.json"
    p.write_text('{"strategies": [[1, 0, 0], [1, 0]]}')
    assert run(capsys, "verify", fixdir / "fig1.json", p)[0] == 2


def test_gen(capsys, tmp_path):
    out = tmp_path / "g.json"
    assert run(capsys, "gen", "--m", 10, "--supp", 4, "--decoys", 2, "--seed", 7, "--out", out)[0] == 0
    first = (out.read_bytes(), (tmp_path / "g.cert.json").read_bytes())
    run(capsys, "gen", "--m", 10, "--supp", 4, "--decoys", 2, "--seed", 7, "--out", out)
    assert (out.read_bytes(), (tmp_path / "g.cert.json").read_bytes()) == first
    run(capsys, "gen", "--m", 10, "--supp", 0, "--out", out)
    assert json.loads((tmp_path / "g.cert.json").read_text())["sne"] is None
    code, _, err = run(capsys, "gen", "--m", 10, "--supp", 12, "--out", out)
    assert code == 2 and "supp" in err


def test_gen_check_marks_uniqueness(capsys, tmp_path):
    out = tmp_path / "g.json"
    run(capsys, "gen", "--m", 6, "--supp", 2, "--decoys", 2, "--seed", 1, "--out", out, "--check")
    assert json.loads((tmp_path / "g.cert.json").read_text())["uniqueness"] == "verified"


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_bench_fixtures(capsys, tmp_path, fixdir):
    path = tmp_path / "b.csv"
    assert run(capsys, "bench", "--dir", fixdir, "--modes", "0,1,2,3", "--csv", path)[0] == 0
    rows = read_csv(path)
    runs = [r for r in rows if r["instance"] != "*"]
    aggs = [r for r in rows if r["instance"] == "*"]
    assert len(runs) == 16 and len(aggs) == 4
    assert {r["outcome"] for r in runs if r["instance"] == "fig1"} == {"N"}
    assert {r["outcome"] for r in runs if r["instance"] != "fig1"} == {"Y"}
    assert list(rows[0])[:9] == ["instance", "mode", "algorithm", "outcome", "sne_kind",
                                 "time_s", "iterations", "oracle_calls", "verify_share"]
    for a in aggs:
        assert a["Y_pct"] == "75.0" and a["mY_pct"] == "50.0" and a["omY_pct"] == "50.0"
        mode_runs = [r for r in runs if r["mode"] == a["mode"]]
        mean = sum(float(r["time_s"]) for r in mode_runs) / len(mode_runs)
        assert float(a["time_mean"]) == pytest.approx(mean, abs=1e-3)


def test_bench_deterministic_and_parallel(capsys, tmp_path, fixdir):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "bench", "--dir", fixdir, "--omit-times", "--csv", a)
    run(capsys, "bench", "--dir", fixdir, "--omit-times", "--jobs", 2, "--csv", b)
    assert a.read_text() == b.read_text()


def test_bench_grid(capsys, tmp_path):
    path = tmp_path / "g.csv"
    run(capsys, "bench", "--gen-grid", "m=4..6,supp=0|2,decoys=0", "--modes", "3", "--csv", path)
    rows = read_csv(path)
    assert len([r for r in rows if r["instance"] == "*"]) == 2 * 3
    for r in rows:
        if r["instance"] == "*":
            assert r["Y_pct"] == ("0.0" if "supp=0" in r["class"] else "100.0")


def test_bench_marks_large_instances_na(capsys, tmp_path):
    path = tmp_path / "g.csv"
    run(capsys, "bench", "--gen-grid", "m=14,supp=2", "--modes", "3", "--csv", path)
    agg = [r for r in read_csv(path) if r["instance"] == "*"][0]
    assert agg["mY_pct"] == "n/a" and agg["Y_pct"] == "100.0"


def test_parse_grid():
    g = parse_grid("m=10..20:5,supp=0|2,decoys=0,n=3")
    assert g == {"m": [10, 15, 20], "supp": [0, 2], "decoys": [0], "n": [3]}
    assert parse_grid("m=10..12")["m"] == [10, 11, 12]
    with pytest.raises(Exception):
        parse_grid("supp=2")


def test_module_entry_point(fixdir):
    proc = subprocess.run([sys.executable, "-m", "strongnash", "solve", str(fixdir / "fig1.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and json.loads(proc.stdout)["status"] == "NoSNE"
