import numpy as np
import pytest

from qpc.concurrence import pure_concurrence
from qpc.dynamics import (
    SimConfig,
    SimConfigError,
    draw_model,
    evolve_reduced,
    evolve_total,
    initial_total_state,
    random_hermitian,
    run_trajectory,
    total_hamiltonian,
)
from qpc.linops import DimensionError, SpectralPropagator, matrix_exponential_unitary
from qpc.states import bell_state, purity


def _small_config(**overrides):
    values = dict(d1=2, d2=2, d_bath=3, t_end=2.0, t_steps=5, seed=11)
    values.update(overrides)
    return SimConfig(**values)


def test_sim_config_defaults():
    config = SimConfig()
    assert (config.d1, config.d2, config.d_bath) == (3, 5, 8)
    assert (config.alpha_s, config.alpha_sb) == (0.2, 0.02)
    assert len(config.times()) == 200
    assert config.times()[-1] == 30.0


def test_single_time_point_is_t_start():
    assert list(SimConfig(t_start=1.5, t_steps=1).times()) == [1.5]


@pytest.mark.parametrize(
    "overrides",
    [
        {"d1": 0},
        {"d_bath": 2.5},
        {"t_steps": 0},
        {"alpha_s": float("nan")},
        {"t_end": "long"},
        {"seed": -1},
    ],
)
def test_sim_config_rejects(overrides):
    with pytest.raises(SimConfigError):
        SimConfig(**overrides)


def test_sim_config_from_dict():
    config = SimConfig.from_dict({"d1": 2, "seed": 4})
    assert config.d1 == 2 and config.seed == 4
    assert SimConfig.from_dict(config.to_dict()) == config

    with pytest.raises(SimConfigError):
        SimConfig.from_dict({"d3": 2})


def test_random_hermitian(rng):
    h = random_hermitian(6, rng)
    assert np.allclose(h, h.conj().T)


def test_random_hermitian_is_seeded():
    first = random_hermitian(4, np.random.default_rng(5))
    assert np.array_equal(first, random_hermitian(4, np.random.default_rng(5)))


def test_random_hermitian_gue_moments():
    rng = np.random.default_rng(23)
    draws = [random_hermitian(4, rng) for _ in range(1000)]
    diagonal = np.concatenate([np.diagonal(h).real for h in draws])
    off_diagonal = np.array([h[0, 1] for h in draws])

    assert np.mean(diagonal) == pytest.approx(0.0, abs=0.05)
    assert np.var(diagonal) == pytest.approx(1.0, abs=0.08)
    assert np.var(off_diagonal.real) == pytest.approx(0.5, abs=0.08)
    assert np.var(off_diagonal.imag) == pytest.approx(0.5, abs=0.08)


def test_total_hamiltonian(rng):
    hs = random_hermitian(4, rng)
    hsb = random_hermitian(12, rng)
    h = total_hamiltonian(hs, hsb, 0.2, 0.02)

    assert h.shape == (12, 12)
    assert np.allclose(h, 0.2 * np.kron(hs, np.eye(3)) + 0.02 * hsb)

    with pytest.raises(DimensionError):
        total_hamiltonian(hs, random_hermitian(10, rng), 1.0, 1.0)


def test_initial_total_state():
    rho = initial_total_state(bell_state(2), 3)
    assert (rho.d1, rho.d2) == (4, 3)
    assert purity(rho) == pytest.approx(1 / 3)


def test_evolution_preserves_total_purity(rng):
    rho = initial_total_state(bell_state(2), 3)
    propagator = SpectralPropagator.from_hermitian(random_hermitian(12, rng))
    for t in (0.5, 5.0, 50.0):
        evolved = evolve_total(rho, propagator, t)
        assert np.sum(np.abs(evolved) ** 2) == pytest.approx(1 / 3, abs=1e-10)
        assert np.trace(evolved).real == pytest.approx(1.0, abs=1e-10)


def test_evolve_reduced_at_zero_returns_initial_state(rng):
    psi = bell_state(2)
    rho = initial_total_state(psi, 3)
    reduced = evolve_reduced(rho, random_hermitian(12, rng), 0.0, 2, 2)
    assert np.allclose(reduced.matrix, psi.projector(), atol=1e-12)

    with pytest.raises(DimensionError):
        evolve_reduced(rho, random_hermitian(12, rng), 0.0, 2, 3)


def test_draw_model_rejects_mismatched_initial_state():
    with pytest.raises(SimConfigError):
        draw_model(_small_config(d1=3), initial_state=bell_state(2))


def test_run_trajectory_starts_pure():
    config = _small_config()
    model = draw_model(config)
    points = run_trajectory(config)

    assert [p.t for p in points] == list(config.times())
    assert points[0].entropy <= 1e-9
    assert points[0].purity == pytest.approx(1.0, abs=1e-10)
    assert points[0].c_qp == pytest.approx(pure_concurrence(model.initial_state.amplitudes, 2, 2), abs=1e-9)
    for point in points:
        assert 0.0 <= point.purity <= 1.0 + 1e-10
        assert point.dominant_weight > 0.0


def test_uncoupled_system_stays_pure():
    points = run_trajectory(_small_config(alpha_sb=0.0, t_end=10.0))
    assert max(p.entropy for p in points) <= 1e-9


def test_uncoupled_concurrence_follows_pure_evolution():
    config = _small_config(alpha_sb=0.0, t_end=10.0)
    model = draw_model(config)
    points = run_trajectory(config)

    for point in points:
        unitary = matrix_exponential_unitary(config.alpha_s * model.h_system, point.t)
        evolved = unitary @ model.initial_state.amplitudes
        assert point.c_qp == pytest.approx(pure_concurrence(evolved, config.d1, config.d2), abs=1e-9)


def test_coupling_produces_mixing():
    points = run_trajectory(_small_config(alpha_sb=1.0, t_end=5.0))
    assert points[-1].entropy > 1e-3
    # A 4-dimensional state has at most ln 4
    assert points[-1].entropy <= np.log(4.0) + 1e-12


def test_run_trajectory_is_deterministic():
    config = _small_config()
    first = run_trajectory(config)
    assert run_trajectory(config) == first

    threaded = run_trajectory(config, jobs=3)
    assert [p.t for p in threaded] == [p.t for p in first]
    assert np.allclose([p.c_qp for p in threaded], [p.c_qp for p in first], atol=1e-12)


def test_run_trajectory_uses_given_initial_state():
    points = run_trajectory(_small_config(t_steps=1), initial_state=bell_state(2))
    assert points[0].c_qp == pytest.approx(1.0, abs=1e-9)
