"""Particle-gas oracle: sampling, conservation, cooling, determinism."""

import numpy as np
import pytest

from conftest import UNIT_MASS, fit_cooling_exponent
from kinetics import dsmc
from kinetics.collision_kernel import CollisionBranch, Species
from kinetics.errors import MajorantExceeded

SPECIES = Species(mass=UNIT_MASS, diameter=1.0)


def config_with(**overrides) -> dsmc.DsmcConfig:
    base = dict(dt=0.002, number_density=1.0, epsilon=1.0,
                branch=CollisionBranch.REFLECTIVE, seed=42,
                majorant_relative_speed=1.0)
    base.update(overrides)
    return dsmc.DsmcConfig(**base)


def test_sample_ensemble_zero_temperature_is_exact():
    u = (5.0, -1.0, 2.0)
    ensemble = dsmc.sample_maxwellian_ensemble(100, SPECIES, 1.0, u, 0.0, seed=1)
    np.testing.assert_array_equal(ensemble.velocities,
                                  np.tile(np.asarray(u), (100, 1)))


def test_sample_ensemble_mean_within_clt_bound():
    count = 40_000
    u = np.array([5.0, 0.0, 0.0])
    ensemble = dsmc.sample_maxwellian_ensemble(count, SPECIES, 1.0, u, 1.0, seed=2)
    sigma = 1.0  # thermal speed at T = 1 with mass = k_B
    bound = 5.0 * sigma / np.sqrt(count)
    np.testing.assert_allclose(np.mean(ensemble.velocities, axis=0), u, atol=bound)
    moments = dsmc.ensemble_moments(ensemble)
    assert moments.temperature == pytest.approx(1.0, rel=0.05)
    assert moments.density == pytest.approx(1.0)


def test_sample_ensemble_seed_determinism():
    a = dsmc.sample_maxwellian_ensemble(500, SPECIES, 1.0, (0, 0, 0), 1.0, seed=3)
    b = dsmc.sample_maxwellian_ensemble(500, SPECIES, 1.0, (0, 0, 0), 1.0, seed=3)
    np.testing.assert_array_equal(a.velocities, b.velocities)
    c = dsmc.sample_maxwellian_ensemble(500, SPECIES, 1.0, (0, 0, 0), 1.0, seed=4)
    assert np.any(c.velocities != a.velocities)


def test_step_conserves_momentum_and_elastic_energy():
    ensemble = dsmc.sample_maxwellian_ensemble(4000, SPECIES, 1.0, (0.5, 0, 0),
                                               1.0, seed=5)
    v0 = ensemble.velocities
    p0 = np.sum(v0, axis=0)
    ke0 = float(np.sum(v0 * v0))
    state = ensemble
    for index in range(50):
        state = dsmc.step(state, config_with(dt=0.05), step_index=index)
    vf = state.velocities
    assert np.any(vf != v0)
    p_scale = float(np.sum(np.linalg.norm(v0, axis=1)))
    assert np.max(np.abs(np.sum(vf, axis=0) - p0)) < 1e-12 * p_scale
    assert abs(float(np.sum(vf * vf)) - ke0) < 1e-9 * ke0


def test_inelastic_temperature_decays_monotonically():
    ensemble = dsmc.sample_maxwellian_ensemble(4000, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=6)
    series = dsmc.run(ensemble, config_with(epsilon=0.9, dt=0.05), 200,
                      sample_every=10)
    temperatures = series[:, 5]
    assert np.all(np.diff(temperatures) <= 0.0)
    assert temperatures[-1] < 0.9 * temperatures[0]


def test_run_zero_steps_returns_initial_sample():
    ensemble = dsmc.sample_maxwellian_ensemble(100, SPECIES, 1.0, (1, 2, 3),
                                               1.0, seed=7)
    series = dsmc.run(ensemble, config_with(), 0)
    assert series.shape == (1, 6)
    assert series[0, 0] == 0.0
    assert series[0, 1] == pytest.approx(1.0)


def test_elastic_temperature_flat_over_run():
    ensemble = dsmc.sample_maxwellian_ensemble(4000, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=8)
    series = dsmc.run(ensemble, config_with(dt=0.05), 300, sample_every=50)
    temperatures = series[:, 5]
    assert (temperatures.max() - temperatures.min()) / temperatures[0] < 1e-6


def test_run_is_deterministic():
    ensemble = dsmc.sample_maxwellian_ensemble(1000, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=9)
    a = dsmc.run(ensemble, config_with(epsilon=0.8, dt=0.05), 40, sample_every=5)
    b = dsmc.run(ensemble, config_with(epsilon=0.8, dt=0.05), 40, sample_every=5)
    np.testing.assert_array_equal(a, b)
    first = dsmc.final_ensemble(ensemble, config_with(epsilon=0.8, dt=0.05), 40)
    second = dsmc.final_ensemble(ensemble, config_with(epsilon=0.8, dt=0.05), 40)
    np.testing.assert_array_equal(first.velocities, second.velocities)


def test_step_is_a_pure_function_of_inputs():
    ensemble = dsmc.sample_maxwellian_ensemble(1000, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=13)
    a = dsmc.step(ensemble, config_with(epsilon=0.8, dt=0.05), step_index=4)
    b = dsmc.step(ensemble, config_with(epsilon=0.8, dt=0.05), step_index=4)
    np.testing.assert_array_equal(a.velocities, b.velocities)
    c = dsmc.step(ensemble, config_with(epsilon=0.8, dt=0.05), step_index=5)
    assert np.any(c.velocities != a.velocities)


def test_small_cooling_exponent_is_haff_like():
    ensemble = dsmc.sample_maxwellian_ensemble(10_000, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=10)
    series = dsmc.run(ensemble, config_with(epsilon=0.9, dt=0.02), 800,
                      sample_every=20)
    exponent, _ = fit_cooling_exponent(series[:, 0], series[:, 5])
    assert -2.5 <= exponent <= -1.5


def test_majorant_hard_error_after_bounded_retries(monkeypatch):
    monkeypatch.setattr(dsmc, "_MAJORANT_RETRIES", 0)
    ensemble = dsmc.sample_maxwellian_ensemble(100, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=11)
    with pytest.raises(MajorantExceeded):
        dsmc.step(ensemble, config_with(dt=5.0), step_index=0)


def test_config_and_ensemble_validation():
    with pytest.raises(ValueError):
        config_with(dt=0.0)
    with pytest.raises(ValueError):
        config_with(number_density=-1.0)
    with pytest.raises(ValueError):
        config_with(epsilon=0.0)
    with pytest.raises(ValueError):
        dsmc.sample_maxwellian_ensemble(1, SPECIES, 1.0, (0, 0, 0), 1.0, seed=0)
    with pytest.raises(ValueError):
        dsmc.ParticleEnsemble(velocities=np.zeros((5, 2)), species=SPECIES,
                              statistical_weight=1.0)


def test_timeseries_csv(tmp_path):
    ensemble = dsmc.sample_maxwellian_ensemble(200, SPECIES, 1.0, (0, 0, 0),
                                               1.0, seed=12)
    series = dsmc.run(ensemble, config_with(dt=0.05), 10, sample_every=5)
    path = tmp_path / "timeseries.csv"
    dsmc.write_timeseries(path, series)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,density,px,py,pz,temperature"
    assert len(lines) == 1 + series.shape[0]
    parsed = np.array([[float(cell) for cell in line.split(",")]
                       for line in lines[1:]])
    np.testing.assert_array_equal(parsed, series)
