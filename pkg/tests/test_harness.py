import csv
import io
import json

import numpy as np
import pytest

from augclust.harness import (COLUMNS, OUTPUT_DIR_ENV, ResultRow, build_manifest, candidate_centers,
                              config_from_dict, default_config, grid_optimum, kernel_weights,
                              load_config, long_run_phases, positive_transform, rows_to_csv,
                              run_experiment, write_results)
from augclust.datagen import GenSpec, gen_clusters
from augclust.objectives import quadratic_objective
from augclust.transforms import check_positive_supervision


@pytest.fixture(scope="module")
def small_sweep():
    cfg = default_config("noise_sweep", seeds=[0, 1, 2], sweep=[0.0, 2.0])
    return cfg, run_experiment(cfg)


# -- configuration -----------------------------------------------------------

def test_defaults_resolve_for_every_kind():
    for kind in ("noise_sweep", "rate_check", "unchanged_optima", "graduated_compare", "hessian_check"):
        cfg = default_config(kind)
        assert cfg.experiment == kind and cfg.output_dir == f"results/{kind}"
        json.dumps(cfg.resolved())


def test_table_overrides_merge_with_defaults():
    cfg = config_from_dict({"experiment": "noise_sweep", "objective": {"beta": 0.01}})
    assert cfg.objective.beta == 0.01 and cfg.objective.losses == ("soft_min",)
    assert cfg.optimizer.eta == 0.1


@pytest.mark.parametrize("raw", [
    {"experiment": "nope"},
    {"experiment": "noise_sweep", "bogus": 1},
    {"experiment": "noise_sweep", "optimizer": {"speed": 2}},
    {"experiment": "noise_sweep", "seeds": []},
    {"experiment": "noise_sweep", "epsilon": 0.0},
    {"experiment": "unchanged_optima", "objective": {"losses": ["hinge"]}},
])
def test_bad_configs_rejected(raw):
    with pytest.raises(ValueError):
        config_from_dict(raw)


def test_load_config_and_env_override(tmp_path, monkeypatch):
    p = tmp_path / "c.toml"
    p.write_text('experiment = "hessian_check"\nseeds = [1]\noutput_dir = "here"\n\n'
                 '[objective]\ngamma = 2.0\n')
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    cfg = load_config(p)
    assert cfg.output_dir == "here" and cfg.seeds == (1,) and cfg.objective.gamma == 2.0
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert load_config(p).output_dir == str(tmp_path / "env")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(OSError, match="cannot read config"):
        load_config(tmp_path / "absent.toml")


# -- helpers -----------------------------------------------------------------

def test_exemplars_are_nearest_data_points():
    data = gen_clusters(GenSpec(n_per_cluster=30, seed=2))
    C = candidate_centers(data, "exemplars")
    for c, mu in zip(C, data.centroids):
        assert any(np.array_equal(c, x) for x in data.X)
        assert np.linalg.norm(c - mu) == pytest.approx(np.min(np.linalg.norm(data.X - mu, axis=1)))
    with pytest.raises(ValueError):
        candidate_centers(data, "medoids")


def test_kernel_weights():
    W = kernel_weights([[0.0, 0.0], [2.0, 0.0]], 2.0)
    np.testing.assert_allclose(W, [[0.0, np.exp(-0.5)], [np.exp(-0.5), 0.0]])


def test_positive_transform_preserves_membership():
    data = gen_clusters(GenSpec(n_per_cluster=50, seed=0))
    cfg = default_config("unchanged_optima").transform
    spec, Xg = positive_transform(cfg, data, seed=3, level=4.0)
    assert check_positive_supervision(data, Xg).valid
    assert (spec.seed - 3) % 1000 == 0


def test_grid_optimum_on_quadratic():
    f = quadratic_objective(np.diag([1.0, 3.0]), [12.3, 27.1])
    np.testing.assert_allclose(grid_optimum(f, 0, 40), [12.3, 27.1], atol=1e-6)


def test_long_run_phases():
    assert long_run_phases(20.0, 1e-3, 2.0) == 17  # 2**17 > 80000 > 2**16
    assert long_run_phases(1e-4, 1.0, 2.0) == 1


# -- rows and output ---------------------------------------------------------

def test_noise_sweep_rows_and_csv(small_sweep):
    cfg, rows = small_sweep
    assert len(rows) == 6
    assert [(r.sweep, r.seed) for r in rows] == [(v, s) for v in (0.0, 2.0) for s in (0, 1, 2)]
    text = rows_to_csv(rows)
    lines = text.split("\n")
    assert len(lines) == 8 and lines[-1] == ""   # header + 6 rows, LF-terminated
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert tuple(parsed[0]) == COLUMNS
    assert parsed[0]["lambda_min_baseline"] == "NA" and parsed[0]["passed"] in ("true", "false")


def test_zero_variance_matches_baseline(small_sweep):
    _, rows = small_sweep
    for r in rows:
        if r.sweep == 0.0:
            assert r.epochs_augmented == r.epochs_baseline and r.final_distance == 0.0


def test_empty_rows_header_only():
    assert rows_to_csv([]) == ",".join(COLUMNS) + "\n"
    m = build_manifest([])
    assert m["n_rows"] == 0 and m["all_passed"] is True


def test_write_results_is_deterministic(tmp_path, small_sweep):
    cfg, rows = small_sweep
    rerun = run_experiment(cfg)
    write_results(rows, tmp_path / "a", cfg)
    write_results(rerun, tmp_path / "b", cfg)
    for f in ("results.csv", "manifest.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["n_rows"] == 6 and manifest["seeds"] == [0, 1, 2]
    assert manifest["config"]["experiment"] == "noise_sweep"


def test_write_results_rejects_mixed_kinds(tmp_path):
    rows = [ResultRow("noise_sweep", "a", 0.0, 0), ResultRow("rate_check", "b", 0.0, 0)]
    with pytest.raises(ValueError):
        write_results(rows, tmp_path)


def test_write_results_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="cannot write results"):
        write_results([], blocker / "sub")


def test_failing_arm_becomes_error_row():
    # a rotation cannot be built for the hessian check
    with pytest.raises(ValueError):
        run_experiment(default_config("hessian_check", transform={"kind": "rotation"}))
    cfg = default_config("noise_sweep", seeds=[0], sweep=[1.0], transform={"kind": "no_such"})
    (row,) = run_experiment(cfg)
    assert row.error.startswith("ValueError") and not row.passed
    assert "NA" in rows_to_csv([row])


# -- small end-to-end runs ---------------------------------------------------

def test_rate_check_cells_pass():
    rows = run_experiment(default_config("rate_check"))
    assert len(rows) == 27 and all(r.passed for r in rows)
    for r in rows:
        assert r.fitted_rate_augmented <= r.rate_bound_augmented + 1e-6


def test_hessian_check_passes():
    rows = run_experiment(default_config("hessian_check", seeds=[0, 1, 2]))
    assert all(r.passed for r in rows)
    assert all(r.lambda_min_augmented >= r.lambda_min_baseline - 1e-10 for r in rows)


def test_duplicate_leaves_soft_min_optimum_unchanged():
    cfg = default_config("unchanged_optima", seeds=[0], sweep=[1.0],
                         transform={"kind": "duplicate"}, objective={"losses": ["soft_min"]})
    (row,) = run_experiment(cfg)
    assert row.error is None and row.final_distance <= 1e-10


def test_graduated_compare_single_seed():
    cfg = default_config("graduated_compare", seeds=[0], sweep=[2.0])
    (row,) = run_experiment(cfg)
    assert row.error is None and row.passed
    assert row.grad_evals_augmented < row.grad_evals_baseline
