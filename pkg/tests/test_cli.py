import json
import subprocess
import sys

import numpy as np
import pytest

from cpm.cli import main, read_table


def cpm(*args):
    return main([str(a) for a in args])


@pytest.fixture
def blobs(tmp_path):
    path = tmp_path / "c.csv"
    assert cpm("generate", "clusters", "--k", 3, "--per-cluster", 15, "--dim", 4,
               "--seed", 0, "--out", path) == 0
    return path


def test_generate_prints_shape(tmp_path, capsys):
    assert cpm("generate", "gaussian", "--n", 30, "--dim", 4, "--out", tmp_path / "g.csv") == 0
    assert capsys.readouterr().out.split() == ["N=30", "n=4"]
    data = read_table(tmp_path / "g.csv")
    assert data.points.shape == (30, 4) and data.labels is None


def test_generate_labels_round_trip(blobs):
    data = read_table(blobs)
    assert data.points.shape == (45, 4)
    np.testing.assert_array_equal(np.unique(data.labels), [0, 1, 2])
    assert blobs.read_text().splitlines()[0] == "x1,x2,x3,x4,label"


def test_usage_errors(tmp_path):
    assert cpm() == 1
    assert cpm("generate") == 1
    assert cpm("generate", "gaussian") == 1  # missing --out
    assert cpm("generate", "torus", "--out", tmp_path / "x.csv") == 1
    assert cpm("embed", "--in", tmp_path / "x.csv") == 1
    assert cpm("embed", "--in", "a", "--out", "b", "--dim", 4) == 1


def test_missing_input_is_data_error(tmp_path):
    assert cpm("embed", "--in", tmp_path / "nope.csv", "--out", tmp_path / "e.csv") == 2


def test_bad_config_is_data_error(tmp_path, blobs, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"perplexity": 30}))
    assert cpm("embed", "--in", blobs, "--out", tmp_path / "e.csv", "--config", cfg) == 2
    assert "perplexity" in capsys.readouterr().err


def test_embed_writes_outputs(tmp_path, blobs, capsys):
    out, diag, dist, hist = (tmp_path / n for n in ("e.csv", "d.json", "D.csv", "h.json"))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_iters": 5, "seed": 9}))
    assert cpm("embed", "--in", blobs, "--out", out, "--diag", diag, "--config", cfg,
               "--max-iters", 20, "--dump-distances", dist, "--kl-history", hist) == 0
    emb = read_table(out)
    assert emb.points.shape == (45, 2) and emb.labels is not None
    assert out.read_text().splitlines()[0] == "y1,y2,label"
    d = json.loads(diag.read_text())
    assert set(d) == {"method", "config", "N", "n", "warnings", "dimension_curve", "kl_history"}
    # the flag wins over the file, untouched keys come from the file
    assert d["config"]["max_iters"] == 20 and d["config"]["seed"] == 9
    assert d["N"] == 45 and d["n"] == 4 and d["method"] == "cpm"
    assert json.loads(hist.read_text()) == d["kl_history"]
    D = np.loadtxt(dist, delimiter=",")
    assert D.shape == (45, 45) and np.allclose(D, D.T)
    assert capsys.readouterr().out.startswith("N=45\nkl=")


def test_embed_mds(tmp_path, blobs):
    diag = tmp_path / "d.json"
    assert cpm("embed", "--in", blobs, "--out", tmp_path / "e.csv", "--method", "mds",
               "--dim", 3, "--diag", diag) == 0
    d = json.loads(diag.read_text())
    assert d["method"] == "mds" and "kl_history" not in d
    assert read_table(tmp_path / "e.csv").points.shape == (45, 3)


def test_evaluate_reports(tmp_path, blobs, capsys):
    emb = tmp_path / "e.csv"
    assert cpm("embed", "--in", blobs, "--out", emb, "--method", "mds") == 0
    capsys.readouterr()
    shep, prox, var, traj = (tmp_path / n for n in ("s.csv", "p.csv", "v.csv", "t.csv"))
    assert cpm("evaluate", "--orig", blobs, "--emb", emb, "--shepard", shep, "--proximity", prox,
               "--variances", var, "--trajectory", traj, "--p-grid", "0.5") == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("spearman=") and -1 <= float(out[0].split("=")[1]) <= 1
    assert out[1].startswith("proximity_error[0.5]=")
    assert len(shep.read_text().splitlines()) == 1 + 45 * 44 // 2
    assert prox.read_text().splitlines()[0] == "p,error"
    assert len(var.read_text().splitlines()) == 4


def test_evaluate_size_mismatch(tmp_path, blobs):
    other = tmp_path / "g.csv"
    assert cpm("generate", "gaussian", "--n", 10, "--dim", 2, "--out", other) == 0
    assert cpm("evaluate", "--orig", blobs, "--emb", other) == 2


def test_evaluate_crowding(tmp_path, capsys):
    data, emb = tmp_path / "b.csv", tmp_path / "e.csv"
    assert cpm("generate", "ball-shell", "--dim", 3, "--n1", 30, "--n2", 30, "--out", data) == 0
    assert cpm("embed", "--in", data, "--out", emb, "--method", "mds") == 0
    capsys.readouterr()
    assert cpm("evaluate", "--orig", data, "--emb", emb, "--crowding") == 0
    line = capsys.readouterr().out.splitlines()[-1]
    assert line.startswith("crowding=") and 0 <= float(line.split("=")[1]) <= 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cpm", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
