import itertools
import json
from fractions import Fraction
from pathlib import Path

import pytest

from lspace import FiniteDomain, Sample
from lspace.cli import main
from lspace.io import read_dataset, write_dataset

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
SPLIT_CSV = str(FIXTURES / "four_point_split.csv")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out else None), err


def exact(entry):
    return Fraction(entry["exact"])


def write_csv(path, rows):
    path.write_text("\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return str(path)


def test_select_on_split_data(capsys):
    code, rep, _ = run(capsys, "select", SPLIT_CSV, "--estimator", "holdout:100")
    assert code == 0
    assert exact(rep["selected"]["estimate"]) == Fraction(33, 100)
    assert rep["statistics"]["estimates_computed"] <= 15
    assert {"point", "label"} <= set(rep["final_hypothesis"][0])


def test_select_and_oracle_agree(capsys):
    _, sel, _ = run(capsys, "select", SPLIT_CSV, "--estimator", "kfold:4")
    _, orc, _ = run(capsys, "oracle", SPLIT_CSV, "--estimator", "kfold:4")
    assert sel["selected"] == orc["selected"]
    assert len(orc["costs"]) == 15 and orc["statistics"]["estimates_computed"] == 15


def test_constant_labels_select_the_coarsest(tmp_path, capsys):
    rows = [("f1", "f2", "label")] + [(a, b, 1) for a, b in itertools.product([0, 1], repeat=2)] * 5
    code, rep, _ = run(capsys, "select", write_csv(tmp_path / "c.csv", rows), "--estimator", "holdout:1/2")
    assert code == 0
    assert rep["selected"]["node"] == "1,2,3,4" and exact(rep["selected"]["estimate"]) == 0


@pytest.mark.parametrize("content", ["", "f1,label\n", "x1,label\n0,1\n", "f1,label\n0,2\n", "f1,label\n0\n"])
def test_bad_csv_exits_with_input_error(tmp_path, capsys, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    code, _, err = run(capsys, "select", path)
    assert code == 2 and "error" in err


def test_domain_cap(tmp_path, capsys):
    rows = [("f1", "f2", "f3", "f4", "label")]
    rows += [(*bits, i % 2) for i, bits in enumerate(itertools.product([0, 1], repeat=4))][:11]
    path = write_csv(tmp_path / "wide.csv", rows)
    code, _, err = run(capsys, "select", path, "--estimator", "holdout:5")
    assert code == 3 and "cap" in err


def test_config_file_supplies_defaults_and_flags_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"estimator": "holdout:100", "prune-worse": True}))
    _, rep, _ = run(capsys, "select", SPLIT_CSV, "--config", cfg)
    assert rep["config"]["prune_worse"] is True
    assert exact(rep["selected"]["estimate"]) == Fraction(33, 100)
    _, rep2, _ = run(capsys, "select", SPLIT_CSV, "--config", cfg, "--estimator", "kfold:2")
    assert rep2["estimator"] != rep["estimator"]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "select", SPLIT_CSV, "--config", cfg)[0] == 2


def test_check_on_boolean_costs(capsys):
    code, rep, _ = run(capsys, "check", "--costs", FIXTURES / "boolean4_costs.json", "--property", "ucurve-weak")
    assert code == 0 and rep["holds"] is True
    strong = [m["node"] for m in rep["minima"] if "strong_local" in m["kinds"]]
    assert len(strong) == 3
    code, rep, _ = run(capsys, "check", "--costs", FIXTURES / "boolean4_costs.json", "--property", "ucurve-strong")
    assert rep["holds"] is False and rep["violations"]


def test_check_convexity_on_four_node_costs(capsys):
    code, rep, _ = run(capsys, "check", "--costs", FIXTURES / "four_node_costs.json", "--property", "convexity")
    assert code == 0 and rep["holds"] is False
    assert rep["violations"][0]["text"] == "0.33 < 0.37"


def test_check_rejects_unknown_node_keys(tmp_path, capsys):
    path = tmp_path / "costs.json"
    path.write_text(json.dumps({"1,2|3": "1/2", "1|2|4": "1/3"}))
    assert run(capsys, "check", "--costs", path, "--property", "convexity")[0] == 2


def test_stats(capsys):
    _, rep, _ = run(capsys, "check", "--points", 5, "--space", "l2", "--property", "stats")
    assert rep["stats"] == {"node_count": 16, "vc_dim_max": 2, "maximal_count": 15}
    _, rep, _ = run(capsys, "check", "--points", 5, "--property", "stats")
    assert rep["stats"] == {"node_count": 52, "vc_dim_max": 5, "maximal_count": 1}


def test_simulate(tmp_path, capsys):
    code, rep, _ = run(capsys, "simulate", FIXTURES / "two_point_dist.json", "--sizes", "20,200", "--reps", 30,
                       "--dot", tmp_path / "walk.dot")
    assert code == 0 and len(rep["rows"]) == 2
    assert exact(rep["discrimination_gap"]) == Fraction(2, 5)
    assert (tmp_path / "walk_n20.dot").read_text().startswith("digraph")
    code, rep, _ = run(capsys, "simulate", FIXTURES / "two_point_dist.json", "--sizes", "20", "--reps", 0)
    assert code == 0 and rep["rows"] == []


def test_simulate_point_mass(tmp_path, capsys):
    path = tmp_path / "det.json"
    path.write_text(json.dumps({"points": [1, 2], "prob": {"1,0": "1/2", "2,1": "1/2"}}))
    _, rep, _ = run(capsys, "simulate", path, "--sizes", "20", "--reps", 10)
    assert exact(rep["rows"][0]["error_is_target"]) == 1


def test_simulate_rejects_unnormalised(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"points": [1, 2], "prob": {"1,0": "1/2", "2,1": "1/3"}}))
    assert run(capsys, "simulate", path)[0] == 2


def test_truth_section(tmp_path, capsys):
    body = [(0, 1)] * 9 + [(0, 0)] + [(1, 0)] * 9 + [(1, 1)]
    path = write_csv(tmp_path / "two.csv", [("f1", "label")] + body * 2)
    _, rep, _ = run(capsys, "select", path, "--dist", FIXTURES / "two_point_dist.json")
    truth = rep["truth"]
    assert truth["target"]["node"] == "1|2" and exact(truth["target"]["error"]) == Fraction(1, 10)
    assert exact(truth["discrimination_gap"]) == Fraction(2, 5)
    assert set(truth["errors"]) == {"uniform_deviation", "within_model", "model_bias", "total_excess"}


def test_independent_mode_and_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "select", SPLIT_CSV, "--mode", "independent:1/4", "--out", out)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["input"]["final_rows"] == 50 and rep["input"]["selection_rows"] == 150


def test_feature_space(capsys):
    code, rep, _ = run(capsys, "select", SPLIT_CSV, "--space", "feature", "--estimator", "holdout:100")
    assert code == 0 and rep["space"]["nodes"] == 4


def test_dataset_roundtrip(tmp_path):
    d = FiniteDomain.from_feature_rows([(0, 1), (1, 1), (0, 0)])
    s = Sample(d, (0, 2, 1, 1), (1, 0, 0, 1))
    write_dataset(tmp_path / "s.csv", s)
    d2, s2 = read_dataset(tmp_path / "s.csv")
    assert d2 == d and s2.points == s.points and s2.labels == s.labels


def test_plot_option(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    fig = tmp_path / "walk.png"
    code, _, _ = run(capsys, "select", SPLIT_CSV, "--plot", fig)
    assert code == 0 and fig.read_bytes()[:4] == b"\x89PNG"
