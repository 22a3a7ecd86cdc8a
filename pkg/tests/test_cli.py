import json

import pytest

from ranet.expectations import ErrorBound
from ranet.cli import main
from ranet.formats import read_edge_list, read_histogram, read_trace
from ranet.core import replay


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_prints_counts(capsys):
    code, out, _ = run(capsys, "generate", "--t", "1", "--seed", "5")
    assert code == 0
    assert out == "V=4 E=6 F=3 max_degree=3\n"


def test_generate_zero(capsys):
    code, out, _ = run(capsys, "generate", "--t", "0", "--seed", "5")
    assert code == 0 and out.startswith("V=3 E=3 F=1")


def test_generate_files(capsys, tmp_path):
    edges, hist, trace = tmp_path / "e.txt", tmp_path / "h.csv", tmp_path / "t.txt"
    code, out, _ = run(capsys, "generate", "--t", "200", "--seed", "3",
                       "--out", str(edges), "--hist", str(hist), "--trace", str(trace))
    assert code == 0
    e = read_edge_list(edges)
    assert e.shape == (603, 2)
    h = read_histogram(hist)
    assert h.vertex_count() == 203
    assert hist.read_text().startswith("k,count\n")
    assert replay(read_trace(trace)).same_graph(replay(read_trace(trace)))
    assert f"max_degree={h.max_degree}" in out


def test_generate_is_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.txt", tmp_path / "b.txt"]
    for p in paths:
        assert run(capsys, "generate", "--t", "1000000", "--seed", "42", "--out", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_generate_large_seed(capsys):
    code, out, _ = run(capsys, "generate", "--t", "10", "--seed", str(2**64 - 1))
    assert code == 0 and out.startswith("V=13")


def test_limits(capsys):
    assert run(capsys, "limits", "--kmax", "5") == (0, "3,2/5\n4,1/5\n5,4/35\n", "")


def test_expect(capsys):
    code, out, _ = run(capsys, "expect", "--t", "1", "--kmax", "3")
    assert code == 0
    assert out == "k,t,N,b_k_times_t,e\n3,1,4.0,0.4,3.6\n"
    code, out, _ = run(capsys, "expect", "--t", "2", "--kmax", "4", "--exact")
    assert out.splitlines()[1:] == ["3,2,1,4/5,1/5", "4,2,4,2/5,18/5"]


def test_expect_exact_cap(capsys):
    assert run(capsys, "expect", "--t", "1001", "--kmax", "5", "--exact")[0] == 3


def test_oracle(capsys, tmp_path):
    code, out, _ = run(capsys, "oracle", "--t", "2")
    assert code == 0
    assert out.splitlines()[1:] == ["3,2,1,1,-1", "4,3,1,4,1"]
    assert run(capsys, "oracle", "--t", "9")[0] == 3


def test_couple(capsys):
    code, out, _ = run(capsys, "couple", "--t", "4", "--exhaustive")
    assert code == 0
    doc = json.loads(out)
    assert doc["max_difference"] <= 6
    code, out, _ = run(capsys, "couple", "--t", "50", "--samples", "200", "--seed", "1")
    assert code == 0 and json.loads(out)["pairs_checked"] == 200
    assert run(capsys, "couple", "--t", "6", "--exhaustive")[0] == 3
    assert run(capsys, "couple", "--t", "6")[0] == 1


def test_simulate(capsys, tmp_path):
    out_path = tmp_path / "s.json"
    code, _, _ = run(capsys, "simulate", "--t", "1000", "--replicates", "10", "--seed", "3",
                     "--workers", "2", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["t"] == 1000 and doc["replicates"] == 10


def test_usage_errors(capsys):
    assert run(capsys, "simulate", "--t", "10", "--replicates", "0", "--seed", "1")[0] == 1
    assert run(capsys, "generate", "--t", "-1", "--seed", "1")[0] == 1
    assert run(capsys, "limits", "--kmax", "2")[0] == 1
    assert run(capsys, "nonsense")[0] == 1


def test_unwritable_path(capsys, tmp_path):
    bad = tmp_path / "missing" / "out.txt"
    code, out, err = run(capsys, "generate", "--t", "5", "--seed", "1", "--out", str(bad))
    assert code == 2
    assert out == ""
    assert not bad.parent.exists()


def test_verify_reports_sup(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--only", "1")
    assert code == 0
    assert "3.6" in out and "[PASS]" in out


def test_verify_fails_when_a_criterion_fails(capsys, monkeypatch):
    monkeypatch.setattr(ErrorBound, "holds", property(lambda self: self.value > 3.6))
    code, out, _ = run(capsys, "verify", "--quick", "--only", "1")
    assert code == 1
    assert "[FAIL]" in out


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    print(out)
    assert code == 0
