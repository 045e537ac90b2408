import csv
import io
import json

import pytest

from streamcut.cli import main


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exact_on_three_points(capsys, files):
    m = files("line.metric", "euclidean 1\n0 0\n1 1\n2 2\n")
    code, out, _ = run(capsys, "exact", m)
    assert code == 0 and out.strip() == "3"


def test_exact_restricted_to_live_ids(capsys, files):
    m = files("line.metric", "euclidean 1\n0 0\n1 1\n2 2\n")
    s = files("s.stream", "+ 0\n+ 1\n+ 2\n- 1\n")
    assert run(capsys, "exact", m, "--stream", s)[1].strip() == "2"


def test_window_on_identical_points(capsys, files):
    m = files("same.metric", "euclidean 2\n" + "".join(f"{i} 1 1\n" for i in range(8)))
    s = files("same.stream", "".join(f"+ {i}\n" for i in range(8)))
    code, out, _ = run(capsys, "run-window", m, s, "--window", "3", "--samples", "16",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 8
    assert all(float(r["estimate"]) == 0.0 for r in rows)
    assert "wall_time" not in rows[0]


def test_window_requires_width(capsys, files):
    m = files("a.metric", "euclidean 1\n0 0\n")
    s = files("a.stream", "+ 0\n")
    assert run(capsys, "run-window", m, s)[0] == 3


def test_insertion_json_carries_config(capsys, files):
    m = files("l.metric", "euclidean 1\n" + "".join(f"{i} {i * i % 17}\n" for i in range(12)))
    s = files("l.stream", "".join(f"+ {i}\n" for i in range(12)))
    code, out, _ = run(capsys, "run-insertion", m, s, "--samples", "50", "--replicas", "3",
                       "--exact", "--timing")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["samples"] == 50 and doc["config"]["replicas"] == 3
    rec = doc["records"][0]
    assert rec["timestamp"] == 12 and rec["exact"] > 0 and rec["ratio"] >= 1
    assert rec["wall_time"] is not None


def test_bench_csv_is_reproducible(capsys, files, tmp_path):
    m = files("b.metric", "euclidean 1\n" + "".join(f"{i} {(7 * i) % 23}\n" for i in range(30)))
    s = files("b.stream", "".join(f"+ {i}\n" for i in range(30)))
    args = ("bench", m, s, "--epsilons", "0.1", "0.25", "--sample-counts", "20",
            "--every", "10", "--seed", "5")
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second
    rows = list(csv.DictReader(io.StringIO(first)))
    assert len(rows) == 6
    assert {r["epsilon"] for r in rows} == {"0.1", "0.25"}
    out = tmp_path / "bench.csv"
    assert run(capsys, *args, "--out", str(out))[0] == 0
    assert out.read_text() == first


def test_gen_writes_sidecars(capsys, tmp_path):
    prefix = str(tmp_path / "cl")
    code, out, _ = run(capsys, "gen", "clusters", "centers=2", "size=50", "separation=100",
                       "--out", prefix)
    assert code == 0
    assert json.loads(out)["truth"]["maxcut"] == 250000
    assert json.loads((tmp_path / "cl.truth.json").read_text())["maxcut"] == 250000


def test_gen_rejects_bad_parameters(capsys):
    assert run(capsys, "gen", "clusters", "centers")[0] == 3


def test_verify_metric_reports_violations(capsys, files):
    m = files("bad.metric", "matrix 3\n0 1 5\n1 0 1\n5 1 0\n")
    code, out, _ = run(capsys, "verify-metric", m)
    assert code == 3
    assert json.loads(out)["violation"] == [0, 1, 2]
    good = files("good.metric", "euclidean 1\n0 0\n1 1\n2 2\n")
    assert run(capsys, "verify-metric", good, "--delta", "2")[0] == 0
    assert run(capsys, "verify-metric", good, "--delta", "1.5")[0] == 3


def test_unseen_id_exit_code(capsys, files):
    m = files("x.metric", "euclidean 1\n0 0\n1 1\n")
    s = files("x.stream", "+ 0\n+ 7\n")
    code, _, err = run(capsys, "run-insertion", m, s)
    assert code == 4 and "7" in err


def test_input_errors_exit_code(capsys, files):
    m = files("x.metric", "euclidean 1\n0 0\n1 1\n")
    assert run(capsys, "run-insertion", m, files("d.stream", "- 9\n"))[0] == 3
    assert run(capsys, "run-insertion", m, files("del.stream", "+ 0\n- 0\n"))[0] == 3
    assert run(capsys, "exact", str(m) + ".missing")[0] == 3


def test_usage_errors_exit_code(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2


def test_adversary_demo_command(capsys, tmp_path):
    out = tmp_path / "demo.json"
    code, _, _ = run(capsys, "adversary-demo", "--n", "27", "--samples", "32", "--out", str(out))
    doc = json.loads(out.read_text())
    assert code == 0 and doc["n"] == 27 and len(doc["cases"]) == 2
