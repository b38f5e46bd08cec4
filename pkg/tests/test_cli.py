import csv
import json
import subprocess
import sys

import numpy as np
import pytest

import pgmbound as pb
from pgmbound.cli import EVAL_COLUMNS, SWEEP_HEADER, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gen_haar_round_trip(tmp_path):
    out = tmp_path / "h.json"
    assert main(["gen", "haar", "--d", "4", "--m", "4", "--seed", "7", "--out", str(out)]) == 0
    e = pb.read_ensemble(out)
    np.testing.assert_array_equal(e.states, pb.haar_random(4, 4, 7).states)
    first = out.read_bytes()
    assert main(["gen", "haar", "--d", "4", "--m", "4", "--seed", "7", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_gen_equal_overlap(tmp_path):
    out = tmp_path / "eq.json"
    assert main(["gen", "equal-overlap", "--m", "4", "--c", "0.3", "--out", str(out)]) == 0
    assert pb.max_pairwise_fidelity(pb.read_ensemble(out)) == pytest.approx(0.09, abs=1e-12)


def test_gen_trine(tmp_path):
    out = tmp_path / "t.json"
    assert main(["gen", "trine", "--out", str(out)]) == 0
    assert pb.read_ensemble(out).m == 3


def test_gen_from_gram(tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps([[1, 0.6], [0.6, 1]]))
    out = tmp_path / "e.json"
    assert main(["gen", "from-gram", "--gram", str(g), "--out", str(out)]) == 0
    np.testing.assert_allclose(pb.gram(pb.read_ensemble(out)), [[1, 0.6], [0.6, 1]], atol=1e-9)
    g.write_text(json.dumps({"gram": [[[1, 0], [0, 0.5]], [[0, -0.5], [1, 0]]]}))
    assert main(["gen", "from-gram", "--gram", str(g), "--d", "3", "--out", str(out)]) == 0
    e = pb.read_ensemble(out)
    assert e.d == 3
    assert pb.gram(e)[0, 1] == pytest.approx(0.5j, abs=1e-9)


def test_gen_from_gram_not_psd(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(json.dumps([[1, 2], [2, 1]]))
    code = main(["gen", "from-gram", "--gram", str(g), "--out", str(tmp_path / "x.json")])
    assert code == 2
    assert "eigenvalue -1.0" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "haar", "--m", "3"],
        ["gen", "equal-overlap", "--m", "3", "--c", "1.2"],
        ["gen", "haar", "--d", "2", "--m", "1"],
        ["gen", "from-gram", "--gram", "/nonexistent/g.json"],
    ],
)
def test_gen_input_errors(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "x.json")]) == 2


def test_gen_unwritable(tmp_path):
    assert main(["gen", "trine", "--out", str(tmp_path / "no" / "dir" / "x.json")]) == 3


def test_eval_pair(tmp_path, capsys):
    e = pb.from_gram([[1, 0.6], [0.6, 1]])
    path = tmp_path / "p.json"
    pb.write_ensemble(e, path)
    out_csv = tmp_path / "r.csv"
    assert main(["eval", str(path), "--csv", str(out_csv)]) == 0
    text = capsys.readouterr().out
    assert "pgm: 0.9" in text
    rows = read_csv(out_csv)
    assert rows[0] == EVAL_COLUMNS
    rec = dict(zip(rows[0], rows[1]))
    assert float(rec["pgm"]) == pytest.approx(0.9, abs=1e-10)
    assert float(rec["sm"]) == pytest.approx(0.5248, abs=1e-12)
    # flags consistent with the printed values
    assert rec["pgm_ge_linear"] == str(int(float(rec["pgm"]) >= float(rec["linear"]) - 1e-9))
    assert rec["refined_gt_linear"] == str(int(float(rec["refined"]) > float(rec["linear"])))
    assert rec["sm_ge_eq3"] == str(int(float(rec["sm"]) >= float(rec["eq3"]) - 1e-9))


def test_eval_orthonormal(tmp_path, capsys):
    path = tmp_path / "o.json"
    pb.write_ensemble(pb.StateEnsemble(np.eye(3)), path)
    assert main(["eval", str(path)]) == 0
    lines = dict(l.split(": ") for l in capsys.readouterr().out.splitlines())
    for key in ("pgm", "sm", "linear", "refined", "eq3"):
        assert float(lines[key]) == pytest.approx(1.0, abs=1e-12)


def test_eval_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["eval", str(bad)]) == 2
    bad.write_text(json.dumps({"d": 2, "m": 2, "states": [[[1, 0]]]}))
    assert main(["eval", str(bad)]) == 2
    assert main(["eval", str(tmp_path / "missing.json")]) == 2


def test_sweep_rows(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--m", "2", "4", "8", "--steps", "100", "--f-max", "0.5", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == SWEEP_HEADER
    data = rows[1:]
    assert len(data) == 300
    ms = [int(r[0]) for r in data]
    assert ms == sorted(ms)
    F = [float(r[1]) for r in data[:100]]
    assert F[0] == pytest.approx(0.005) and F[-1] == 0.5 and F == sorted(F)
    for m, F, lin, ref, dom in data:
        assert dom == str(int(float(ref) > float(lin)))
        if int(m) >= 4:
            assert dom == "1"
    # byte-stable rewrite
    first = out.read_bytes()
    main(["sweep", "--m", "2", "4", "8", "--steps", "100", "--f-max", "0.5", "--out", str(out)])
    assert out.read_bytes() == first


def test_sweep_values_round_trip(tmp_path):
    out = tmp_path / "s.csv"
    main(["sweep", "--m", "6", "--steps", "7", "--f-max", "0.3", "--out", str(out)])
    for m, F, lin, ref, _ in read_csv(out)[1:]:
        assert float(lin) == pb.linear_bound(int(m), float(F))
        assert float(ref) == pb.refined_bound(int(m), float(F))


def test_sweep_errors(tmp_path):
    assert main(["sweep", "--out", str(tmp_path / "no" / "s.csv"), "--steps", "3"]) == 3
    assert main(["sweep", "--out", str(tmp_path / "s.csv"), "--steps", "1"]) == 2
    assert main(["sweep", "--out", str(tmp_path / "s.csv"), "--f-max", "1.5"]) == 2


def test_verify_stated_reading_reports_violations(tmp_path, capsys):
    cx = tmp_path / "cx.json"
    code = main(["verify", "--trials", "60", "--seed", "3", "--counterexample", str(cx)])
    out = capsys.readouterr().out
    assert code == 1
    assert "pgm_ge_refined" in out and "FAIL" in out
    e = pb.read_ensemble(cx)
    assert e.m >= 2


def test_verify_overlap_reading_passes(tmp_path, capsys):
    report = tmp_path / "r.txt"
    argv = ["verify", "--trials", "200", "--seed", "3", "--convention", "overlap", "--out", str(report)]
    assert main(argv) == 0
    first = report.read_text()
    assert first.rstrip().endswith("PASS")
    assert main(argv) == 0
    assert report.read_text() == first


def test_verify_injected_fault(tmp_path):
    cx = tmp_path / "cx.json"
    code = main(["verify", "--trials", "5", "--tol", "1e-16", "--convention", "overlap",
                 "--counterexample", str(cx)])
    assert code == 1
    assert cx.exists()


def test_verify_input_errors(tmp_path):
    assert main(["verify", "--trials", "0"]) == 2
    assert main(["verify", "--m-range", "1", "3"]) == 2
    assert main(["verify", "--d-range", "5", "3"]) == 2


def test_appendix(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["appendix", "--out", str(out)]) == 0
    rec = dict(read_csv(out)[1:])
    assert int(rec["violations"]) == 0
    assert float(rec["h_critical_F"]) == pytest.approx(0.22, abs=5e-3)
    assert "PASS" in capsys.readouterr().out


def test_appendix_bad_args():
    assert main(["appendix", "--grid-step", "0.5"]) == 2
    assert main(["appendix", "--m-max", "3"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pgmbound", "appendix", "--grid-step", "0.01", "--m-max", "8"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "PASS" in r.stdout
    r = subprocess.run([sys.executable, "-m", "pgmbound"], capture_output=True, text=True)
    assert r.returncode == 2
