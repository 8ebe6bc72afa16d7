import numpy as np
import pytest

from bispectral.data import generate
from bispectral.exceptions import ConfigError, TrainingError
from bispectral.groups import act_on_signal, make_group
from bispectral.network import init_weights
from bispectral.spectral import character_table
from bispectral.training import TrainConfig, equivariance_report, invariance_error, train


def small_config(**kw):
    base = dict(max_epochs=30, plateau_patience=10, anneal_epochs=5, seed=3)
    base.update(kw)
    return TrainConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(min_lr=1e-2, base_lr=1e-3)
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=100, per_class=7)
    with pytest.raises(ConfigError):
        TrainConfig(gamma=-1)
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"learning_rate": 1})
    cfg = TrainConfig(n_init=3)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg


def test_rows_stay_unit_norm():
    ds = generate("4", 10, seed=1)
    norms = []
    train(ds, small_config(), callback=lambda e, W, row: norms.append(np.linalg.norm(W, axis=1)))
    assert np.allclose(norms, 1, atol=1e-12)


def test_training_is_deterministic():
    ds = generate("4,2", 12, seed=2)
    a = train(ds, small_config())
    b = train(ds, small_config())
    assert a.log == b.log
    assert np.array_equal(a.weights, b.weights)


def test_log_columns_and_schedule():
    ds = generate("4", 10, seed=1)
    res = train(ds, small_config())
    assert set(res.log[0]) == {"epoch", "mean_loss", "mean_orbit_term", "mean_recon_term", "lr"}
    assert [r["epoch"] for r in res.log] == list(range(res.n_epochs))
    cfg = small_config()
    assert all(cfg.min_lr <= r["lr"] <= cfg.max_lr for r in res.log)
    assert res.log[-1]["lr"] == cfg.min_lr


def test_constant_orbit_has_zero_orbit_term():
    X = np.ones((8, 4))
    res = train((X, np.zeros(8, dtype=int)), small_config(gamma=0.0, batch_size=8))
    assert res.log[0]["mean_orbit_term"] == 0.0


def test_zero_initial_weights_rejected():
    ds = generate("4", 5, seed=0)
    with pytest.raises(ConfigError):
        train(ds, small_config(gamma=0.0), W0=np.zeros((4, 4)))


def test_initial_weights_are_renormalized():
    ds = generate("4", 5, seed=0)
    seen = []
    train(ds, small_config(max_epochs=1, anneal_epochs=0), W0=3 * np.eye(4),
          callback=lambda e, W, row: seen.append(W))
    assert np.allclose(np.linalg.norm(seen[0], axis=1), 1)


def test_bad_data_rejected():
    with pytest.raises(ConfigError):
        train((np.zeros((0, 4)), np.zeros(0, dtype=int)), small_config())
    with pytest.raises(ConfigError):
        train((np.ones((1, 4)), np.zeros(1, dtype=int)), small_config())


def test_divergence_carries_checkpoint():
    X = np.full((4, 3), 1e200)
    with pytest.raises(TrainingError) as info:
        train((X, np.array([0, 0, 1, 1])), small_config(batch_size=4))
    assert info.value.checkpoint is not None


def test_max_epochs_without_plateau_reports_it():
    ds = generate("4", 10, seed=1)
    res = train(ds, small_config(max_epochs=3, plateau_patience=50))
    assert not res.converged
    assert res.stop_reason == "max_epochs"


def test_restarts_keep_lowest_loss():
    ds = generate("4", 10, seed=1)
    res = train(ds, small_config(n_init=3))
    assert len(res.restart_losses) == 3
    assert res.final_loss == min(res.restart_losses)


def test_invariance_error_analytic_and_random(rng):
    G = make_group([8])
    T = character_table(G)
    xs = rng.standard_normal((20, 8))
    assert max(invariance_error(T.unit_rows(), x, G) for x in xs) <= 1e-9
    W = init_weights(8, rng)
    assert np.median([invariance_error(W, x, G) for x in xs]) > 1e-1


def test_equivariance_report_characters(rng):
    G = make_group("4,2")
    T = character_table(G)
    rep = equivariance_report(T.unit_rows(), rng.standard_normal(8), G)
    assert rep.max_modulus_variation <= 1e-9
    assert rep.max_phase_residual <= 1e-9
    assert np.array_equal(rep.frequency, np.arange(8))
    z = rep.z
    for g in range(8):
        assert np.allclose(z[g], T.matrix[:, g] * z[0])


def test_equivariance_report_random_weights(rng):
    G = make_group([8])
    rep = equivariance_report(init_weights(8, rng), rng.standard_normal(8), G)
    assert rep.max_modulus_variation > 1e-3
