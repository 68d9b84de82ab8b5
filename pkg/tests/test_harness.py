import json
import math

import numpy as np
import pytest

from tilinglab.errors import ConfigError, DegenerateData
from tilinglab.harness import (
    CSV_COLUMNS, SweepConfig, exponent_estimate, fit_transition, perturbed_instance, records_csv,
    run_trial, sweep,
)
from tilinglab.tiler import exact_perfect_tiling, tiling_digest


def cfg(**kw):
    base = dict(r=3, n_values=[6], c_grid=[0.5, 2.0], trials_per_cell=2, host={"kind": "none"})
    base.update(kw)
    return SweepConfig(**base)


def test_fit_symmetric():
    fit = fit_transition([(1, 0.0), (2, 0.5), (4, 1.0)])
    assert fit.c50 == pytest.approx(2.0, rel=1e-3)


def test_fit_degenerate():
    with pytest.raises(DegenerateData):
        fit_transition([(1, 1.0), (2, 1.0), (4, 1.0)])
    with pytest.raises(DegenerateData):
        fit_transition([(1, 0, 5), (2, 0, 5), (4, 0, 5)])
    with pytest.raises(DegenerateData):
        fit_transition([(1, 0, 5), (2, 3, 5)])


def test_fit_recovers_synthetic_midpoint():
    rng = np.random.default_rng(3)
    grid = [0.8, 1.0, 1.3, 1.7, 2.2, 2.8, 3.6]
    beta = 4.0
    cells = []
    for c in grid:
        q = 1 / (1 + math.exp(-beta * (math.log(c) - math.log(1.7))))
        cells.append((c, int(rng.binomial(200, q)), 200))
    fit = fit_transition(cells)
    assert 1.5 <= fit.c50 <= 1.9
    assert fit.c50_ci[0] <= fit.c50 <= fit.c50_ci[1]
    assert fit.dof == len(grid) - 2


def test_exponent_estimate():
    r = 3
    c50 = {n: 1.5 for n in (15, 24, 33)}
    assert exponent_estimate(c50, r) == pytest.approx(-2 / 3)
    assert exponent_estimate({15: 1.0}, r) is None


def test_config_validation():
    with pytest.raises(ConfigError):
        cfg(c_grid=[0.0, 1.0])
    with pytest.raises(ConfigError):
        cfg(trials_per_cell=0)
    with pytest.raises(ConfigError):
        cfg(host={"kind": "extremal"})
    with pytest.raises(ConfigError):
        cfg(solver="pipeline")
    with pytest.raises(ConfigError):
        SweepConfig.from_dict({"r": 3, "n_values": [5], "c_grid": [1.0], "trials_per_cell": 1, "bogus": 1})
    with pytest.raises(ConfigError):
        SweepConfig.from_dict({"r": 3, "n_values": [5]})


def test_config_json_roundtrip(tmp_path):
    c = cfg(host={"kind": "extremal", "alpha": 0.1})
    p = tmp_path / "c.json"
    p.write_text(json.dumps(c.to_dict()))
    assert SweepConfig.from_json(p) == c


def test_run_trial_complete_host():
    rec = run_trial(cfg(host={"kind": "complete"}), 6, 0.5, 0)
    assert rec.outcome == "perfect" and rec.leftover == 0 and rec.digest


def test_run_trial_no_host_p_zero():
    # c must be positive, so p = 0 is approximated by a vanishing c
    rec = run_trial(cfg(n_values=[3], c_grid=[1e-12, 1.0]), 3, 1e-12, 0)
    assert rec.outcome == "no_tiling"


def test_run_trial_greedy_and_pipeline():
    rec = run_trial(cfg(solver="greedy", host={"kind": "complete"}), 6, 2.0, 1)
    assert rec.outcome == "perfect"
    star = cfg(solver="pipeline", host={"kind": "star", "d": 0.4}, n_values=[20], c_grid=[40.0], delta=0.1)
    rec = run_trial(star, 20, 40.0, 0)
    assert rec.outcome == "perfect" or rec.outcome.startswith("pipeline_failure:")


def test_run_trial_deterministic():
    c = cfg(host={"kind": "extremal", "alpha": 0.2}, n_values=[10], c_grid=[1.0, 3.0])
    assert run_trial(c, 10, 3.0, 4) == run_trial(c, 10, 3.0, 4)


def test_perfect_digest_regenerates():
    c = cfg(host={"kind": "extremal", "alpha": 0.2}, n_values=[9], c_grid=[4.0, 5.0], trials_per_cell=3)
    for t in range(3):
        rec = run_trial(c, 9, 4.0, t)
        if rec.outcome == "perfect":
            g = perturbed_instance(c, 9, 0, t)
            assert tiling_digest(exact_perfect_tiling(g)) == rec.digest


def test_sweep_totals_and_files(tmp_path):
    c = cfg(n_values=[4, 5], c_grid=[0.5, 1.0, 4.0], trials_per_cell=3)
    res = sweep(c, out_dir=tmp_path)
    assert len(res.records) == 2 * 3 * 3
    assert sum(s.trials for s in res.cells.values()) == 18
    lines = (tmp_path / "results.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 19
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["total_trials"] == 18
    assert all(0 <= cell["fraction"] <= 1 for cell in summary["cells"])
    assert (tmp_path / "transition.dat").exists()


def test_sweep_duplicated_cell_identical():
    c = cfg(n_values=[5], c_grid=[1.0, 2.0], trials_per_cell=1)
    a, b = sweep(c), sweep(c)
    assert a.records == b.records


def test_sweep_thread_count_independent(tmp_path):
    c = cfg(n_values=[5, 6], c_grid=[0.5, 2.0, 5.0], trials_per_cell=2)
    sweep(c, threads=1, out_dir=tmp_path / "a")
    sweep(c, threads=2, out_dir=tmp_path / "b")
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_sweep_resume(tmp_path):
    c = cfg(n_values=[5], c_grid=[0.5, 2.0, 5.0], trials_per_cell=3)
    full = sweep(c, out_dir=tmp_path / "full")
    part = tmp_path / "part"
    part.mkdir()
    lines = (tmp_path / "full" / "partial.jsonl").read_text().splitlines()
    # four complete records and one torn line
    (part / "partial.jsonl").write_text("\n".join(lines[:4]) + "\n" + lines[4][:10])
    res = sweep(c, out_dir=part, resume=True)
    assert res.records == full.records
    assert (part / "results.csv").read_bytes() == (tmp_path / "full" / "results.csv").read_bytes()


def test_records_csv_blank_wall_time():
    rec = run_trial(cfg(), 6, 0.5, 0)
    row = records_csv([rec]).splitlines()[1].split(",")
    assert row[CSV_COLUMNS.index("wall_ms")] == ""
    timed = run_trial(cfg(record_wall_time=True), 6, 0.5, 0)
    assert timed.wall_ms is not None and timed.wall_ms >= 0
