import json
import os

import numpy as np
import pytest

from spinmz.cli import (
    ExperimentConfig,
    _thread_count,
    diff_tables,
    load_table,
    main,
    render_csv,
    run_experiment,
)

from goldens import BS1_FIDELITY_TAU5


def run(experiment, **kw):
    return run_experiment(ExperimentConfig(experiment=experiment, **kw))


# --------------------------------------------------------------- experiments


def test_populations_initial_rows_uniform():
    table = run("populations", n=(2, 3), tau=1.0, dt=2e-3, sample_every=50)
    assert table.columns[0] == "t"
    for n in (2, 3):
        p_up = table.column(f"p_up_n{n}")
        p_down = table.column(f"p_down_n{n}")
        assert abs(p_up[0] - 2.0 ** (-n)) < 1e-12
        assert abs(p_down[0] - 2.0 ** (-n)) < 1e-12
        assert np.max(np.abs(p_up - p_down)) < 1e-8


def test_populations_endpoint_golden():
    table = run("populations", n=(2,), tau=5.0, sample_every=10**9)
    p_sum = table.column("p_sum_n2")
    assert abs(p_sum[-1] - BS1_FIDELITY_TAU5[2]) < 1e-6


def test_populations_rejects_bad_scheme():
    with pytest.raises(ValueError):
        run("populations", scheme="triple-step", tau=1.0)


def test_fidelity_scan_diabatic_limit():
    table = run("fidelity-scan", n=(3,), tau_grid=(0.02,), dt=1e-3)
    assert abs(table.column("fidelity_n3")[0] - 2.0 ** (1 - 3)) < 5e-3


def test_fidelity_scan_plateau_richardson():
    # tau doublings 10 -> 20 -> 40; a 1/tau^2 tail extrapolates to the
    # infinite-time plateau, which the longest sweep must already match
    table = run("fidelity-scan", n=(4,), tau_grid=(20.0, 40.0, 80.0), dt=2e-3)
    f20, f40, f80 = table.column("fidelity_n4")
    f_inf = f80 + (f80 - f40) / 3.0
    assert abs(f80 - f_inf) < 1e-3
    assert f20 <= f40 + 1e-3 and f40 <= f80 + 1e-3


def test_scheme_compare_structure():
    table = run("scheme-compare", n=(2,), tau=1.0, dt=2e-3, sample_every=100)
    for tag in ("single_J", "single_B", "two_step"):
        col = table.column(f"p_sum_{tag}")
        assert np.all((col >= 0) & (col <= 1 + 1e-12))
    assert table.column("t")[-1] == 2.0  # equal total time 2*tau


def test_fringe_ideal_matches_analytic():
    table = run("fringe", n=(4,))
    assert len(table.rows) == 64
    assert np.max(np.abs(table.column("p1") - table.column("p1_analytic"))) < 1e-9
    assert abs(table.meta["sensitivity_at_optimum"] - 0.25) < 1e-2


def test_sensitivity_heisenberg_column():
    table = run("sensitivity", n=(1, 2, 4, 8))
    expected = np.array([1.0, 0.5, 0.25, 0.125])
    assert np.max(np.abs(table.column("delta_phi") - expected)) < 1e-3
    assert np.allclose(table.column("heisenberg_limit"), expected)


def test_bias_scan_symmetry_columns():
    table = run("bias-scan", n=(2,), tau=0.5, dt=1e-3, delta_max=0.05,
                delta_points=5)
    fid = table.column("noon_fidelity")
    assert np.max(np.abs(fid - fid[::-1])) < 1e-8
    assert np.max(np.abs(table.column("p_up")
                         - table.column("p_down")[::-1])) < 1e-8


def test_spectrum_experiment():
    table = run("spectrum", n=(2,), j0=1.0, b0=0.0, k_levels=4)
    assert np.allclose(table.column("energy"), [-1.0, -1.0, 1.0, 1.0])
    assert table.columns == ["level", "energy", "parity"]


def test_unknown_experiment_rejected():
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(experiment="teleportation"))


# ------------------------------------------------------------- serialization


def test_csv_deterministic_and_formatted():
    a = run("sensitivity", n=(2, 4))
    b = run("sensitivity", n=(2, 4))
    assert render_csv(a) == render_csv(b)
    text = render_csv(a)
    assert text.startswith("n,delta_phi,heisenberg_limit\n")
    assert text.endswith("\n") and "\r" not in text


def test_meta_echoes_resolved_config():
    table = run("fringe", n=(2,))
    meta = table.meta
    assert meta["experiment"] == "fringe"
    assert meta["tau"] == 5.0 and meta["dt"] == 1e-3
    assert meta["version"]
    assert "wall_time_s" in meta
    # JSON round trip preserves the metadata block
    from spinmz.cli import render_json

    payload = json.loads(render_json(table))
    assert payload["meta"]["tau"] == 5.0
    assert payload["columns"] == table.columns


def test_table_files_round_trip(tmp_path):
    rc = main(["sensitivity", "--n", "2,4", "--out", str(tmp_path / "s.csv")])
    assert rc == 0
    rc = main(["sensitivity", "--n", "2,4", "--format", "json",
               "--out", str(tmp_path / "s.json")])
    assert rc == 0
    csv_tab = load_table(str(tmp_path / "s.csv"))
    json_tab = load_table(str(tmp_path / "s.json"))
    assert csv_tab.columns == json_tab.columns
    assert np.allclose(csv_tab.rows, json_tab.rows, rtol=1e-11)
    assert json_tab.meta["experiment"] == "sensitivity"


def test_diff_tool(tmp_path):
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    main(["sensitivity", "--n", "2", "--out", str(p1)])
    main(["sensitivity", "--n", "2", "--out", str(p2)])
    assert main(["diff", str(p1), str(p2)]) == 0
    p2.write_text(p2.read_text().replace("0.5", "0.6"))
    assert main(["diff", str(p1), str(p2)]) == 1


# ---------------------------------------------------------------- config/CLI


def test_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"n": [3], "tau": 1.0, "points": 16}))
    out = tmp_path / "f.csv"
    rc = main(["fringe", "--config", str(cfg_file), "--tau", "2.0",
               "--format", "json", "--out", str(out)])
    assert rc == 0
    meta = load_table(str(out)).meta
    assert meta["tau"] == 2.0  # flag wins
    assert meta["n"] == [3] and meta["points"] == 16  # file applies


def test_config_file_unknown_key(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"taus": 1.0}))
    assert main(["fringe", "--config", str(cfg_file)]) == 1


def test_failed_run_leaves_no_output(tmp_path, capsys):
    out = tmp_path / "x.csv"
    # dt larger than the sweep segments: propagation config is invalid
    rc = main(["populations", "--n", "2", "--tau", "1", "--dt", "5",
               "--out", str(out)])
    assert rc == 1
    assert not out.exists()
    assert "error:" in capsys.readouterr().err


def test_threads_resolution(monkeypatch):
    cfg = ExperimentConfig(experiment="fringe", threads=3)
    assert _thread_count(cfg, 10) == 3
    cfg = ExperimentConfig(experiment="fringe")
    monkeypatch.setenv("SPINMZ_THREADS", "2")
    assert _thread_count(cfg, 10) == 2
    monkeypatch.delenv("SPINMZ_THREADS")
    assert _thread_count(cfg, 10) == min(10, os.cpu_count() or 1)


def test_threads_do_not_change_results():
    serial = run("bias-scan", n=(2,), tau=0.5, delta_points=5, threads=1)
    threaded = run("bias-scan", n=(2,), tau=0.5, delta_points=5, threads=4)
    assert render_csv(serial) == render_csv(threaded)
