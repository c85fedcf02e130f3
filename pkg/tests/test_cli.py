import io
from importlib import resources

import pytest

import oracles
from hybridmem.cli import main
from hybridmem.config import load_config
from hybridmem.optimizer import objective, solve_bruteforce
from hybridmem.placement import counts, parse_layout
from hybridmem.workload import parse_aggregate

LAYOUTS = resources.files("hybridmem") / "data" / "layouts"


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(*argv):
    return main([str(a) for a in argv])


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "hybridmem 0.1.0" in capsys.readouterr().out


def test_optimize_read_heavy(tmp_path):
    cfg = write_cfg(tmp_path, "workload.profile = read_heavy\n")
    assert run("optimize", "--config", cfg, "--out", tmp_path / "o") == 0
    layout = parse_layout(tmp_path / "o" / "layout.csv", load_config(cfg).grid)
    n_dr, n_st = counts(layout)
    assert n_st > n_dr
    # the exhaustive oracle agrees on the same configuration
    c = load_config(cfg)
    problem = c.problem(c.workload.load(c.cores, c.grid))
    assert solve_bruteforce(problem).layout == layout
    summary = (tmp_path / "o" / "summary.txt").read_text()
    assert "solver = branch_and_bound" in summary and f"sttram_count = {n_st}" in summary


def test_optimize_rerun_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, "workload.kind = read_heavy\nworkload.total_accesses = 50000\n"
                              "workload.seed = 3\n")
    for out in ("a", "b"):
        assert run("optimize", "--config", cfg, "--out", tmp_path / out) == 0
    for name in ("layout.csv", "summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_optimize_contradictory_constraints(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "workload.profile = uniform\nconstraint.min_edram = 10\n"
                              "constraint.max_edram = 5\n")
    assert run("optimize", "--config", cfg, "--out", tmp_path) == 2
    assert "infeasible: min_edram > max_edram" in capsys.readouterr().err


def test_optimize_brute_and_greedy_modes(tmp_path):
    for mode in ("brute", "greedy"):
        cfg = write_cfg(tmp_path, f"workload.profile = mixed\nsolver.mode = {mode}\n")
        assert run("optimize", "--config", cfg, "--out", tmp_path / mode) == 0
    assert (tmp_path / "brute" / "layout.csv").read_bytes() == \
        (tmp_path / "greedy" / "layout.csv").read_bytes()


def test_optimize_missing_workload_file(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "workload.file = nowhere.csv\n")
    assert run("optimize", "--config", cfg, "--out", tmp_path) == 3
    assert "I/O error" in capsys.readouterr().err


def test_optimize_bad_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "workload.profile = uniform\nproblem.colour = red\n")
    assert run("optimize", "--config", cfg) == 1
    assert "unknown key 'problem.colour'" in capsys.readouterr().err


def test_optimize_from_aggregate_file(tmp_path):
    (tmp_path / "w.csv").write_text("core,x,y,reads,writes\n0,1,1,1000,100\n3,2,2,100,1000\n")
    cfg = write_cfg(tmp_path, "workload.file = w.csv\n")
    assert run("optimize", "--config", cfg, "--out", tmp_path / "o") == 0
    layout = parse_layout(tmp_path / "o" / "layout.csv", load_config(cfg).grid)
    assert layout[(1, 1)] == "sttram" and layout[(2, 2)] == "edram"


def test_optimize_bad_workload_row(tmp_path, capsys):
    (tmp_path / "w.csv").write_text("core,x,y,reads,writes\n0,9,9,1,1\n")
    cfg = write_cfg(tmp_path, "workload.file = w.csv\n")
    assert run("optimize", "--config", cfg, "--out", tmp_path) == 1
    assert "coordinate (9,9) out of range" in capsys.readouterr().err


def test_evaluate_idle_baseline_edram(tmp_path):
    cfg = write_cfg(tmp_path, "workload.kind = uniform\nworkload.total_accesses = 0\n")
    layout = LAYOUTS / "baseline_edram.csv"
    assert run("evaluate", "--config", cfg, "--layout", layout, "--out", tmp_path / "a") == 0
    lines = (tmp_path / "a" / "report.csv").read_text().splitlines()
    assert len(lines) == 2
    row = lines[1].split(",")
    assert row[0] == "baseline_edram"
    assert oracles.rel_err(float(row[1]), "15.49056e-9") <= 1e-15
    assert run("evaluate", "--config", cfg, "--layout", layout, "--out", tmp_path / "b") == 0
    assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()


def test_evaluate_missing_cell(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "workload.profile = uniform\n")
    text = (LAYOUTS / "hybrid_symmetric.csv").read_text().splitlines()
    (tmp_path / "bad.csv").write_text("\n".join(l for l in text if l != "3,3,edram") + "\n")
    assert run("evaluate", "--config", cfg, "--layout", tmp_path / "bad.csv", "--out", tmp_path) == 1
    assert "(3,3) unassigned" in capsys.readouterr().err


def _read_rows(path):
    lines = path.read_text().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, l.split(","))) for l in lines[1:]]


def test_compare_bundled_suite(tmp_path):
    cfg = str(resources.files("hybridmem") / "data" / "compare.cfg")
    assert run("compare", "--config", cfg, "--out", tmp_path) == 0
    rows = _read_rows(tmp_path / "comparison.csv")
    assert len(rows) == 8 * 5
    for wl in {r["workload"] for r in rows}:
        group = {r["layout"]: r for r in rows if r["workload"] == wl}
        assert list(group) == ["baseline_edram", "baseline_sttram", "hybrid_symmetric",
                               "edram_centric", "optimized"]
        best = float(group["optimized"]["objective_weighted_j"])
        assert all(best <= float(r["objective_weighted_j"]) for r in group.values())
        assert (tmp_path / f"report_{wl}.csv").exists()
    hot = {r["layout"]: r for r in rows if r["workload"] == "hotspot_write"}
    assert int(hot["optimized"]["lifetime_iters"]) >= int(hot["hybrid_symmetric"]["lifetime_iters"])
    for metric in ("energy", "delay", "edp", "lifetime"):
        plot = _read_rows(tmp_path / f"plot_{metric}.csv")
        assert len(plot) == 40 and set(plot[0]) == {"workload", "layout", "value"}


def test_compare_single_workload_without_suite(tmp_path):
    cfg = write_cfg(tmp_path, "workload.profile = mixed\n")
    assert run("compare", "--config", cfg, "--out", tmp_path / "o") == 0
    assert (tmp_path / "o" / "report_mixed.csv").exists()


def test_compare_empty_suite(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "workload.suite =\n")
    assert run("compare", "--config", cfg, "--out", tmp_path) == 1
    assert "no workloads configured" in capsys.readouterr().err


def test_compare_skips_undefined_baselines(tmp_path):
    cfg = write_cfg(tmp_path, "grid.cx = 3\ngrid.cy = 3\nworkload.profile = uniform\n")
    assert run("compare", "--config", cfg, "--out", tmp_path) == 0
    layouts = [r["layout"] for r in _read_rows(tmp_path / "comparison.csv")]
    assert layouts == ["baseline_edram", "baseline_sttram", "optimized"]


def test_gen_workload_conserves_total(tmp_path):
    cfg = write_cfg(tmp_path, "workload.kind = uniform\nworkload.total_accesses = 100000\n"
                              "workload.seed = 7\n")
    assert run("gen-workload", "--config", cfg, "--out", tmp_path) == 0
    m = parse_aggregate(tmp_path / "workload.csv", 16, (4, 4))
    assert m.total_reads() + m.total_writes() == 100000


def test_gen_workload_seeds(tmp_path):
    outputs = {}
    for seed, tag in ((7, "a"), (7, "b"), (8, "c")):
        cfg = write_cfg(tmp_path, f"workload.kind = write_heavy\nworkload.total_accesses = 100000\n"
                                  f"workload.seed = {seed}\n", name=f"{tag}.cfg")
        assert run("gen-workload", "--config", cfg, "--out", tmp_path / tag) == 0
        outputs[tag] = (tmp_path / tag / "workload.csv").read_bytes()
    assert outputs["a"] == outputs["b"] != outputs["c"]


def test_gen_workload_write_only(tmp_path):
    cfg = write_cfg(tmp_path, "workload.kind = uniform\nworkload.total_accesses = 5000\n"
                              "workload.read_fraction = 0.0\n")
    assert run("gen-workload", "--config", cfg, "--out", tmp_path) == 0
    m = parse_aggregate(tmp_path / "workload.csv", 16, (4, 4))
    assert m.total_reads() == 0 and m.total_writes() == 5000


def test_gen_workload_invalid_profile(tmp_path):
    cfg = write_cfg(tmp_path, "workload.kind = hotspot\nworkload.total_accesses = 10\n")
    assert run("gen-workload", "--config", cfg, "--out", tmp_path) == 1


def test_output_dir_from_config(tmp_path):
    cfg = write_cfg(tmp_path, "workload.profile = uniform\noutput.dir = results\n")
    assert run("optimize", "--config", cfg) == 0
    assert (tmp_path / "results" / "layout.csv").exists()
