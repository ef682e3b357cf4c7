import json

import numpy as np

from activescan import paper_params, read_similarity_csv, read_trim_report
from activescan.cli import main, read_csv_rows
from activescan.sbm import edge_count_sd, expected_edge_count
from _testutil import er_graph

TRI = "0 1\n1 2\n2 0\n"


def write_tri(tmp_path):
    path = tmp_path / "tri.edges"
    path.write_text(TRI)
    return path


def test_detect_smoke_three_cycle(tmp_path):
    out = tmp_path / "out"
    rc = main(["detect", "--input", str(write_tri(tmp_path)), "--Q", "3",
               "--out", str(out), "--emit-similarity"])
    assert rc == 0
    header, rows = read_csv_rows(out / "clusters.csv")
    assert header == ["vertex", "cluster"]
    assert len(rows) == 3
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["q"] == 3
    assert diag["cluster_floor_applied"] is True
    assert diag["num_clusters"] == 2
    _, topq_rows = read_csv_rows(out / "topq.csv")
    assert [r[1] for r in topq_rows] == ["3", "3", "3"]
    _, mds_rows = read_csv_rows(out / "mds.csv")
    assert len(mds_rows) == 3
    sim = read_similarity_csv(out / "similarity.csv")
    assert np.array_equal(sim.values, np.ones((3, 3)))


def test_detect_missing_input_reports_error_json(tmp_path, capsys):
    rc = main(["detect", "--input", str(tmp_path / "absent.edges"),
               "--Q", "2", "--out", str(tmp_path / "o")])
    assert rc != 0
    err = json.loads(capsys.readouterr().err)
    assert "absent.edges" in err["message"]
    assert "absent.edges" in err["path"]


def test_topq_full_q_computes_everything(tmp_path):
    g, _, _ = er_graph(100, 0.05, 1)
    from activescan import write_edge_list
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    report = tmp_path / "r.json"
    rc = main(["topq", "--input", str(path), "--Q", "100", "--out", str(report)])
    assert rc == 0
    q, res = read_trim_report(report)
    assert q == 100
    assert res.computed_count == 100


def test_topq_trims_on_skewed_graph(tmp_path):
    # star head on top of sparse noise: Q=1 needs few exact computations
    rng = np.random.default_rng(0)
    n = 400
    src = [0] * (n - 1) + rng.integers(1, n, size=150).tolist()
    dst = list(range(1, n)) + rng.integers(1, n, size=150).tolist()
    from activescan import Graph, write_edge_list
    g = Graph.from_edges(n, src, dst)
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    report = tmp_path / "r.json"
    assert main(["topq", "--input", str(path), "--Q", "1", "--out", str(report)]) == 0
    _, res = read_trim_report(report)
    assert res.computed_count < g.n


def test_topq_repeated_runs_identical_reports(tmp_path):
    path = write_tri(tmp_path)
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["topq", "--input", str(path), "--Q", "2", "--workers", "1",
                 "--out", str(r1)]) == 0
    assert main(["topq", "--input", str(path), "--Q", "2", "--workers", "1",
                 "--out", str(r2)]) == 0
    q1, a = read_trim_report(r1)
    q2, b = read_trim_report(r2)
    # deterministic content; wall time is the only field allowed to vary
    assert (q1, a.entries, a.computed_count, a.est1_count, a.est2_count) == \
           (q2, b.entries, b.computed_count, b.est1_count, b.est2_count)


def test_sbm_paper_flag_writes_expected_files(tmp_path, capsys):
    prefix = tmp_path / "bench"
    rc = main(["sbm", "--paper", "--seed", "4", "--out", str(prefix)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "n=1000" in out
    _, label_rows = read_csv_rows(tmp_path / "bench_labels.csv")
    assert len(label_rows) == 1000
    m = int(out.split("m=")[1])
    params = paper_params()
    assert abs(m - expected_edge_count(params)) < 6 * edge_count_sd(params)
    edges = (tmp_path / "bench.edges").read_text().splitlines()
    assert len(edges) == m


def test_sbm_seed_determinism_byte_level(tmp_path):
    p1, p2 = tmp_path / "a", tmp_path / "b"
    assert main(["sbm", "--paper", "--seed", "11", "--out", str(p1)]) == 0
    assert main(["sbm", "--paper", "--seed", "11", "--out", str(p2)]) == 0
    assert (tmp_path / "a.edges").read_bytes() == (tmp_path / "b.edges").read_bytes()


def test_sbm_invalid_params_json(tmp_path, capsys):
    bad = tmp_path / "p.json"
    bad.write_text("{not json")
    rc = main(["sbm", "--params", str(bad), "--out", str(tmp_path / "x")])
    assert rc != 0
    assert json.loads(capsys.readouterr().err)["error"]


def test_eval_roc_single_run_matches_library(tmp_path):
    params_file = tmp_path / "p.json"
    from activescan import params_to_json, SBMParams
    params = SBMParams((30, 10), np.full((2, 2), 0.05) + np.diag([0.0, 0.6]))
    params_to_json(params, params_file)
    out = tmp_path / "ev"
    rc = main(["eval", "--mode", "roc", "--params", str(params_file),
               "--runs", "1", "--k", "1", "--seed", "3", "--out", str(out)])
    assert rc == 0
    from activescan import monte_carlo_roc
    res = monte_carlo_roc(params, runs=1, k=1, seed=3)
    _, rows = read_csv_rows(out / "roc_mean_curve.csv")
    assert [float(r[1]) for r in rows] == res.mean_tpr.tolist()
    _, runs = read_csv_rows(out / "roc_runs.csv")
    assert float(runs[0][1]) == res.run_aucs[0]


def test_eval_ari_row_counts(tmp_path):
    params_file = tmp_path / "p.json"
    from activescan import params_to_json, SBMParams
    params = SBMParams((30, 10, 10),
                       np.full((3, 3), 0.02) + np.diag([0.0, 0.8, 0.8]))
    params_to_json(params, params_file)
    out = tmp_path / "ev"
    rc = main(["eval", "--mode", "ari", "--params", str(params_file),
               "--runs", "3", "--k", "1", "--q-values", "10,20",
               "--seed", "5", "--out", str(out)])
    assert rc == 0
    _, rows = read_csv_rows(out / "ari_runs.csv")
    assert len(rows) == 6  # runs x q_values
    _, summary = read_csv_rows(out / "ari_summary.csv")
    assert [r[0] for r in summary] == ["10", "20"]


def test_eval_runs_zero_rejected(tmp_path, capsys):
    rc = main(["eval", "--mode", "roc", "--paper", "--runs", "0",
               "--out", str(tmp_path / "e")])
    assert rc != 0
    assert json.loads(capsys.readouterr().err)["error"] == "ValueError"


def test_bench_trim_full_q(tmp_path):
    path = write_tri(tmp_path)
    out = tmp_path / "bench.csv"
    rc = main(["bench-trim", "--input", str(path), "--q-values", "1,3",
               "--out", str(out)])
    assert rc == 0
    header, rows = read_csv_rows(out)
    assert header == ["q", "wall_ms", "computed_count", "est1_count", "est2_count"]
    assert rows[1][0] == "3" and rows[1][2] == "3"


def test_bench_trim_validates_q_values(tmp_path, capsys):
    path = write_tri(tmp_path)
    rc = main(["bench-trim", "--input", str(path), "--q-values", "3,1",
               "--out", str(tmp_path / "b.csv")])
    assert rc != 0
    capsys.readouterr()
    rc = main(["bench-trim", "--input", str(path), "--q-values", "",
               "--out", str(tmp_path / "b.csv")])
    assert rc != 0


def test_config_file_and_flag_precedence(tmp_path, capsys):
    path = write_tri(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": 2, "workers": 1}))
    report = tmp_path / "r.json"
    rc = main(["topq", "--input", str(path), "--config", str(cfg),
               "--out", str(report), "--dump-config"])
    assert rc == 0
    dumped = json.loads(capsys.readouterr().out)
    assert dumped["q"] == 2  # from config file
    q, _ = read_trim_report(report)
    assert q == 2
    # flag overrides config
    rc = main(["topq", "--input", str(path), "--config", str(cfg), "--Q", "3",
               "--out", str(report), "--dump-config"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["q"] == 3


def test_config_rejects_unknown_keys(tmp_path, capsys):
    path = write_tri(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    rc = main(["topq", "--input", str(path), "--config", str(cfg)])
    assert rc != 0
    assert "bogus" in json.loads(capsys.readouterr().err)["message"]


def test_detect_end_to_end_on_sbm(tmp_path):
    from activescan import ari, generate_sbm, write_edge_list
    lg = generate_sbm(paper_params(seed=2))
    edges = tmp_path / "sbm.edges"
    write_edge_list(lg.graph, edges)
    out = tmp_path / "out"
    rc = main(["detect", "--input", str(edges), "--Q", "60", "--k", "1",
               "--out", str(out), "--seed", "1"])
    assert rc == 0
    _, rows = read_csv_rows(out / "clusters.csv")
    pred = [int(r[1]) for r in rows]
    true = [int(lg.labels[int(r[0])]) for r in rows]
    assert ari(pred, true) > 0.7
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["num_clusters"] >= 2


def test_detect_nondefault_k_ranks_by_full_sweep(tmp_path):
    from activescan import generate_sbm, psi_all, write_edge_list
    lg = generate_sbm(paper_params(seed=2))
    edges = tmp_path / "sbm.edges"
    write_edge_list(lg.graph, edges)
    out = tmp_path / "out2"
    rc = main(["detect", "--input", str(edges), "--Q", "25", "--k", "0",
               "--out", str(out), "--seed", "1"])
    assert rc == 0
    header, rows = read_csv_rows(out / "topq.csv")
    assert header == ["vertex", "psi0"]
    scores = psi_all(lg.graph, 0)
    want = np.sort(scores)[::-1][:25].tolist()
    assert sorted((int(r[1]) for r in rows[:25]), reverse=True) == want


def test_workers_default_from_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ACTIVE_SCAN_THREADS", "5")
    path = write_tri(tmp_path)
    rc = main(["topq", "--input", str(path), "--Q", "1", "--dump-config"])
    assert rc == 0
    out = capsys.readouterr().out
    cfg = json.loads(out[:out.rindex("}") + 1])  # JSON block precedes the summary
    assert cfg["workers"] == 5
