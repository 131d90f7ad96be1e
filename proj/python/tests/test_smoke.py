import os
from pathlib import Path

import numpy as np
import pytest

import fdia

DATA = Path(os.environ.get("FDIA_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def grid14():
    return fdia.load_grid(str(DATA / "ieee14.case"), str(DATA / "ieee14.meas"))


def test_grid_shapes(grid14):
    assert grid14.H.shape == (grid14.n_z, grid14.n_x)
    assert grid14.bus_count == 14
    assert grid14.label(grid14.find_flow(7, 8)) in ("flow 7-8", "flow 8-7")


def test_estimation_recovers_state(grid14):
    x = np.linspace(-0.5, 0.5, grid14.n_x)
    z = fdia.measure(grid14, x)
    x_hat, z_hat, cost = fdia.wls_estimate(grid14, z)
    np.testing.assert_allclose(x_hat, x, atol=1e-9)
    assert cost < 1e-12
    alarm, tau = fdia.bdd_test(5.0, 1)
    assert alarm and abs(tau - 3.841458820694124) < 1e-9


def test_attack_is_stealthy_and_minimal(grid14):
    target = grid14.find_flow(7, 8)
    plan = fdia.min_resource_attack(grid14, target, -0.1)
    assert plan.optimal
    assert target in plan.support
    oracle = fdia.brute_force_min_attack(grid14, target, -0.1, max_support=plan.cardinality)
    assert oracle is not None and oracle.cardinality == plan.cardinality
    z = fdia.measure(grid14, np.full(grid14.n_x, 0.1), seed=4)
    assert np.allclose(fdia.residual(grid14, z + plan.a), fdia.residual(grid14, z), atol=1e-9)


def test_infeasible_attack_raises(grid14):
    others = [j for j in range(grid14.n_z) if j != 0]
    with pytest.raises(fdia.InfeasibleError):
        fdia.min_resource_attack(grid14, 0, 0.1, protected=others)
    with pytest.raises(fdia.InputError):
        fdia.min_resource_attack(grid14, 0, 0.0)


def test_train_and_detect(grid14, tmp_path):
    z, x = fdia.generate_scenarios(grid14, 400)
    assert z.shape == (400, grid14.n_z) and x.shape == (400, grid14.n_x)
    n_train, n_val, n_test = fdia.split_sizes(400)
    train, val, test = z[:n_train], z[n_train:n_train + n_val], z[n_train + n_val:]
    model, history = fdia.train_autoencoder(train, val, hidden=[16], bottleneck=8, learning_rate=1e-3,
                                            batch_size=32, epochs=20, seed=1)
    assert len(history["train"]) == 20 and not history["diverged"]
    assert model.dims == [grid14.n_z, 16, 8, 16, grid14.n_z]
    path = tmp_path / "model.json"
    model.save(path)
    again = fdia.load_model(path)
    np.testing.assert_array_equal(fdia.reconstruction_errors(again, test), fdia.reconstruction_errors(model, test))

    val_err = list(fdia.reconstruction_errors(model, val))
    normal = list(fdia.reconstruction_errors(model, test))
    attacked = list(fdia.reconstruction_errors(model, test * 1.5))
    rows = fdia.threshold_sweep(val_err, normal, attacked)
    assert [r["alpha"] for r in rows] == [96, 97, 98, 99, 99.5, 100]
    fp, tp, auc = fdia.roc_curve(normal, attacked)
    assert fp[0] == 0 and tp[-1] == 1 and 0.0 <= auc <= 1.0


def test_cli_in_process(tmp_path):
    code, out, err = fdia.cli(["attack", "--case", str(DATA / "case3.case"), "--meas", str(DATA / "case3.meas"),
                               "--target", "flow:1-2", "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "plan.json").exists()
    code, _, err = fdia.cli(["gen-data", "--case", str(tmp_path / "missing.case")])
    assert code == 2 and "missing.case" in err
