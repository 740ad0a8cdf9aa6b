import json

import numpy as np

from arcs.cli import main
from arcs.io import load_truth
from arcs.rotation import rotation_error_deg


def run(*argv):
    return main(list(argv))


def test_gen_srcs_writes_files_and_is_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ["gen", "srcs", "--m", "200", "--n", "160", "--k", "40", "--sigma", "0.01", "--seed", "7"]
    assert run(*args, "--out", str(out1)) == 0
    assert run(*args, "--out", str(out2)) == 0
    for name in ("Q.csv", "P.csv", "truth.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    R, inliers, sigma, seed = load_truth(out1 / "truth.json")
    assert inliers.shape == (40, 2)
    assert sigma == 0.01 and seed == 7


def test_gen_output_reproduces_instance_bitwise(tmp_path):
    from arcs import gen_srcs
    from arcs.io import load_cloud

    out = tmp_path / "data"
    run("gen", "srcs", "--m", "150", "--n", "120", "--k", "30", "--sigma", "0.01", "--seed", "11", "--out", str(out))
    inst = gen_srcs(150, 120, 30, 0.01, seed=11)
    np.testing.assert_array_equal(load_cloud(out / "Q.csv"), inst.q)
    np.testing.assert_array_equal(load_cloud(out / "P.csv"), inst.p)


def test_gen_rrs_writes_files(tmp_path):
    out = tmp_path / "rrs"
    assert (
        run(
            "gen", "rrs", "--l", "300", "--k", "60", "--sigma", "0.01",
            "--norm-constrained", "--seed", "3", "--out", str(out),
        )
        == 0
    )
    assert (out / "pairs.csv").exists()
    assert (out / "truth.json").exists()


def test_pipeline_arcs_stage_exact(tmp_path):
    out = tmp_path / "data"
    run("gen", "srcs", "--m", "500", "--n", "400", "--k", "5", "--sigma", "0", "--seed", "1", "--out", str(out))
    result = tmp_path / "result.json"
    code = run(
        "pipeline", "--q", str(out / "Q.csv"), "--p", str(out / "P.csv"),
        "--stage", "arcs", "--out", str(result),
    )
    assert code == 0
    doc = json.loads(result.read_text())
    R_true, _, _, _ = load_truth(out / "truth.json")
    R_est = np.asarray(doc["rotation"]).reshape(3, 3)
    assert rotation_error_deg(R_est, R_true) < 1e-6
    assert len(doc["correspondences"]) == 5
    assert "arcs" in doc["timings_ms"]


def test_pipeline_o_r_on_pairs(tmp_path):
    out = tmp_path / "rrs"
    run("gen", "rrs", "--l", "1000", "--k", "250", "--sigma", "0.01",
        "--norm-constrained", "--seed", "5", "--out", str(out))
    result = tmp_path / "r.json"
    code = run(
        "pipeline", "--pairs", str(out / "pairs.csv"), "--stage", "o,r",
        "--sigma", "0.01", "--threads", "2", "--out", str(result),
    )
    assert code == 0
    doc = json.loads(result.read_text())
    R_true, _, _, _ = load_truth(out / "truth.json")
    R_est = np.asarray(doc["rotation"]).reshape(3, 3)
    assert rotation_error_deg(R_est, R_true) < 0.5
    assert doc["consensus_size"] >= 200
    assert set(doc["timings_ms"]) == {"o", "r"}


def test_pipeline_full_stages(tmp_path):
    out = tmp_path / "srcs"
    run("gen", "srcs", "--m", "400", "--n", "320", "--k", "100", "--sigma", "0.01", "--seed", "2", "--out", str(out))
    result = tmp_path / "full.json"
    code = run(
        "pipeline", "--q", str(out / "Q.csv"), "--p", str(out / "P.csv"),
        "--stage", "n,o,r", "--sigma", "0.01", "--out", str(result),
    )
    assert code == 0
    doc = json.loads(result.read_text())
    R_true, _, _, _ = load_truth(out / "truth.json")
    assert rotation_error_deg(np.asarray(doc["rotation"]).reshape(3, 3), R_true) < 2.0
    assert doc["n_candidates"] > 0
    assert len(doc["consensus_pairs"]) == doc["consensus_size"]


def test_match_command(tmp_path, capsys):
    out = tmp_path / "srcs"
    run("gen", "srcs", "--m", "100", "--n", "80", "--k", "20", "--sigma", "0.01", "--seed", "4", "--out", str(out))
    matches = tmp_path / "matches.csv"
    code = run(
        "match", "--q", str(out / "Q.csv"), "--p", str(out / "P.csv"),
        "--sigma", "0.01", "--out", str(matches),
    )
    assert code == 0
    rows = matches.read_text().strip().splitlines()
    assert rows[0] == "i,j"
    assert len(rows) > 20


def test_prune_and_refine_commands(tmp_path):
    out = tmp_path / "rrs"
    run("gen", "rrs", "--l", "500", "--k", "120", "--sigma", "0.01", "--seed", "6", "--out", str(out))
    pruned = tmp_path / "pruned.json"
    assert run("prune", "--pairs", str(out / "pairs.csv"), "--sigma", "0.01", "--out", str(pruned)) == 0
    doc = json.loads(pruned.read_text())
    assert doc["consensus_size"] > 0
    w = ",".join(str(v) for v in doc["quaternion"])
    refined = tmp_path / "refined.json"
    assert run("refine", "--pairs", str(out / "pairs.csv"), "--init", w, "--out", str(refined)) == 0
    doc2 = json.loads(refined.read_text())
    assert len(doc2["quaternion"]) == 4


def test_exit_code_degenerate(tmp_path, capsys):
    q = tmp_path / "q.csv"
    p = tmp_path / "p.csv"
    q.write_text("x,y,z\n1,0,0\n")
    p.write_text("x,y,z\n1,0,0\n")
    assert run("pipeline", "--q", str(q), "--p", str(p), "--stage", "arcs") == 2
    assert "degenerate" in capsys.readouterr().err


def test_exit_code_missing_file(capsys):
    assert run("match", "--q", "/nonexistent/q.csv", "--p", "/nonexistent/p.csv", "--c", "0.1") == 74


def test_exit_code_parse_error(tmp_path, capsys):
    q = tmp_path / "q.csv"
    q.write_text("x,y,z\n1,2,bad\n")
    p = tmp_path / "p.csv"
    p.write_text("x,y,z\n1,2,3\n")
    assert run("match", "--q", str(q), "--p", str(p), "--c", "0.1") == 74
    assert ":2:" in capsys.readouterr().err


def test_exit_code_usage_errors(tmp_path, capsys):
    assert run("bench", "--preset", "nope") == 64
    assert run("frobnicate") == 64
    out = tmp_path / "rrs"
    run("gen", "rrs", "--l", "10", "--k", "5", "--sigma", "0.01", "--seed", "0", "--out", str(out))
    assert run("pipeline", "--pairs", str(out / "pairs.csv"), "--stage", "x,y") == 64
    # o/r without inputs
    assert run("pipeline", "--stage", "o,r", "--sigma", "0.01") == 64


def test_bench_list(capsys):
    assert run("bench", "--list") == 0
    names = capsys.readouterr().out.split()
    assert "table3" in names and "fig2_pipeline" in names


def test_bench_tiny_run(tmp_path, capsys):
    code = run(
        "bench", "--preset", "table3", "--trials", "2", "--seed", "1",
        "--out", str(tmp_path),
    )
    assert code == 0
    assert (tmp_path / "table3.json").exists()
    assert (tmp_path / "table3.csv").exists()
    doc = json.loads((tmp_path / "table3.json").read_text())
    assert doc["preset"] == "table3"
    assert len(doc["records"]) == 2


def test_pipeline_no_candidates_is_degenerate(tmp_path, capsys):
    q = tmp_path / "q.csv"
    p = tmp_path / "p.csv"
    q.write_text("x,y,z\n1,0,0\n0,2,0\n")
    p.write_text("x,y,z\n50,0,0\n0,60,0\n")
    code = run("pipeline", "--q", str(q), "--p", str(p), "--stage", "n,o", "--sigma", "0.001")
    assert code == 2
