import json
import math

import pytest

from horolip.cli import main

PX = '{"x": 3.2, "y": 3.05, "z": 2.8131424819306003}'
PY = '{"x": 3.5, "y": 3.2, "z": 2.621745477632914}'
BASE = '{"x": 3.0, "y": 3.0, "z": 3.0}'

EDGELIST = "base 0\n0 1 1\n1 0 4\n1 2 2\n2 1 1\n0 2 5\n2 0 6\n"


def run(capsys, argv):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def run_json(capsys, argv):
    code, out, err = run(capsys, argv)
    assert code == 0, err
    return json.loads(out)


def test_dist_same_point_zero(capsys):
    d = run_json(capsys, ["dist", PX, PX, "--depth", "400"])
    assert d["L_xy"] == 0.0 and d["L_yx"] == 0.0


def test_dist_swapped_arguments(capsys):
    d1 = run_json(capsys, ["dist", PX, PY, "--depth", "400"])
    d2 = run_json(capsys, ["dist", PY, PX, "--depth", "400"])
    assert d1["L_xy"] == d2["L_yx"]
    assert d1["L_yx"] == d2["L_xy"]
    assert d1["L_xy"] > 0 and d1["L_xy"] != d1["L_yx"]


def test_dist_csv_format(capsys):
    code, out, err = run(capsys, ["dist", PX, PX, "--depth", "200",
                                  "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "direction,value,witness_p,witness_q,err_estimate"
    assert len(lines) == 3 and lines[1].startswith("L_xy,0.0")


def test_dist_deterministic_rerun(capsys):
    _, out1, _ = run(capsys, ["dist", PX, PY, "--depth", "400"])
    _, out2, _ = run(capsys, ["dist", PX, PY, "--depth", "400"])
    assert out1 == out2


def test_horo_value_at_base_is_zero(capsys):
    mu = '{"slope": [0, 1], "weight": 1.0}'
    d = run_json(capsys, ["horo", mu, BASE, "--depth", "400"])
    assert d["value"] == 0.0


def test_horo_scale_invariance(capsys):
    d1 = run_json(capsys, ["horo", '{"slope": [1, 2], "weight": 1.0}', PX,
                           "--depth", "400"])
    d2 = run_json(capsys, ["horo", '{"slope": [1, 2], "weight": 4.5}', PX,
                           "--depth", "400"])
    assert d1["value"] == d2["value"]


def test_converge_first_row(capsys):
    d = run_json(capsys, ["converge", "twist", "[0, 1]", "0",
                          "--depth", "400"])
    assert d["columns"][0] == "n"
    assert len(d["rows"]) == 1
    n, dist, res, wp, wq = d["rows"][0]
    assert n == 0 and dist == 0.0


def test_converge_csv(capsys):
    code, out, _ = run(capsys, ["converge", "twist", "[0, 1]", "2",
                                "--depth", "400", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,d_b_xn,residual,witness_p,witness_q"
    assert len(lines) == 4


def test_maxset_contains_witness(capsys):
    d = run_json(capsys, ["maxset", PX, PY, "--depth", "400"])
    dd = run_json(capsys, ["dist", PX, PY, "--depth", "400"])
    assert dd["witness_xy"] in d["maxset"]


def test_mcg_identity_residual(capsys):
    d = run_json(capsys, ["mcg", "[[1, 0], [0, 1]]", PX, PY,
                          "--depth", "400"])
    assert d["residual"] == 0.0
    d2 = run_json(capsys, ["mcg", "[[1, 1], [0, 1]]", PX, PY,
                           "--depth", "600"])
    assert d2["residual"] < 1e-6


def test_detour_log6(capsys, tmp_path):
    sig = tmp_path / "sigma.json"
    bet = tmp_path / "beta.json"
    sig.write_text('{"basis": ["e1", "e2"], "weights": {"e1": 2, "e2": 1}}')
    bet.write_text('{"basis": ["e1", "e2"], "weights": {"e1": 1, "e2": 3}}')
    d = run_json(capsys, ["detour", "--sigma", str(sig), "--beta", str(bet)])
    assert not d["infinite"]
    assert abs(d["delta"] - math.log(6)) < 1e-12


def test_detour_disjoint_infinite(capsys, tmp_path):
    sig = tmp_path / "sigma.json"
    bet = tmp_path / "beta.json"
    sig.write_text('{"basis": ["e1", "e2"], "weights": {"e1": 1, "e2": 0}}')
    bet.write_text('{"basis": ["e1", "e2"], "weights": {"e1": 0, "e2": 1}}')
    d = run_json(capsys, ["detour", "--sigma", str(sig), "--beta", str(bet)])
    assert d["infinite"]
    assert d["delta"] == "inf"


def test_graph_demo_exact_match(capsys, tmp_path):
    f = tmp_path / "g.edges"
    f.write_text(EDGELIST)
    d = run_json(capsys, ["graph-demo", str(f)])
    assert d["exact_match"] is True
    assert d["distance_table"][0][2] == 3
    assert d["distance_table"][2][0] == 5


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "horolip.cfg"
    cfg.write_text("depth = 300\nformat = csv\n")
    code, out, _ = run(capsys, ["dist", PX, PX, "--config", str(cfg)])
    assert code == 0 and out.startswith("direction,")
    code, out, _ = run(capsys, ["dist", PX, PX, "--config", str(cfg),
                                "--format", "json"])
    assert code == 0 and out.startswith("{")


def test_malformed_inputs_exit_two(capsys):
    code, _, err = run(capsys, ["dist", "{bad json", PX])
    assert code == 2
    msg = json.loads(err)
    assert msg["error"] == "contract"
    code, _, _ = run(capsys, ["converge", "twist", "nonsense", "3"])
    assert code == 2
    code, _, _ = run(capsys, ["mcg", "[[1, 0], [0]]", PX, PY])
    assert code == 2
    code, _, _ = run(capsys, ["dist", PX, PX, "--depth", "0"])
    assert code == 2


def test_invalid_point_exit_two(capsys):
    bad = '{"x": 1.0, "y": 1.0, "z": 1.0}'  # not a hyperbolic structure
    code, _, err = run(capsys, ["dist", bad, PX])
    assert code == 2
    assert json.loads(err)["error"] == "contract"


def test_missing_file_exit_two(capsys):
    code, _, err = run(capsys, ["graph-demo", "/nonexistent/file.edges"])
    assert code == 2
    assert json.loads(err)["error"] == "io"
