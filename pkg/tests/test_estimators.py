import numpy as np
import pytest
from sklearn.base import clone

from mvlab import CriticalNoiseEstimator, MeanFieldSolver, ParticleSimulator, RegimeClassifier, make_grid, periodized_gaussian
from mvlab.errors import InvalidConfigurationError


@pytest.fixture(scope="module")
def small_initial():
    return periodized_gaussian(make_grid(5.0, 128), 0, 0.5).values


def test_solver_params_and_clone():
    est = MeanFieldSolver(sigma=0.7, n_cells=128)
    assert est.get_params()["sigma"] == 0.7
    c = clone(est.set_params(t_final=0.2))
    assert c.get_params()["t_final"] == 0.2


def test_solver_fit_transform(small_initial):
    est = MeanFieldSolver(sigma=1.1, n_cells=128, t_final=0.2).fit(small_initial)
    assert est.final_.shape == (128,)
    assert len(est.ledger_) == 201
    assert 0.58 < est.sigma_sharp_ < 0.61
    out = est.transform(np.vstack([small_initial, small_initial]))
    assert out.shape == (2, 128)
    np.testing.assert_array_equal(out[0], est.final_)


def test_solver_validation(small_initial):
    with pytest.raises(InvalidConfigurationError):
        MeanFieldSolver(n_cells=64).fit(small_initial)
    with pytest.raises(InvalidConfigurationError):
        MeanFieldSolver(n_cells=128).fit(-small_initial)
    with pytest.raises(ValueError):
        MeanFieldSolver(n_cells=128).fit(np.full(128, np.nan))


def test_solver_not_fitted(small_initial):
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        MeanFieldSolver(n_cells=128).transform(small_initial)


def test_regime_classifier():
    t = np.linspace(0, 4, 401)
    F_ent = -(t - 2) ** 2
    F_int = (t - 2) ** 2 - 0.5 * t
    rows = np.column_stack([t, F_ent + F_int, F_ent, F_int, 0 * t, 0 * t, 0 * t])
    clf = RegimeClassifier(min_duration=0.05).fit(rows)
    assert list(clf.predict([0.5, 2.1, 3.5])) == ["Aggregation", "Cooperative", "Diffusion"]
    assert clf.fit_predict(rows).shape == (401,)


def test_kernel_objects_accepted(small_initial):
    from mvlab import HegselmannKrause

    est = MeanFieldSolver(kernel=HegselmannKrause(0.5), sigma=0.485, n_cells=128, t_final=0.05).fit(small_initial)
    assert est.sigma_sharp_ == pytest.approx(0.416, abs=5e-3)
    with pytest.raises(InvalidConfigurationError):
        MeanFieldSolver(kernel=HegselmannKrause(0.5), kernel_params={"R_0": 1}, n_cells=128).fit(small_initial)


def test_particle_simulator(small_initial):
    sim = ParticleSimulator(N=300, n_cells=128, t_final=0.02, record_stride=5, seed=3).fit(small_initial)
    assert sim.final_ensemble_.N == 300
    h = sim.transform(small_initial)
    assert h.shape == (1, 128)
    assert h.sum() * (5.0 / 128) == pytest.approx(1.0)


def test_critical_noise_predict():
    est = CriticalNoiseEstimator()
    est.sigma_c_ = 0.86
    assert list(est.predict([0.8, 0.9])) == ["Clustered", "Homogeneous"]
