import numpy as np
import pytest

from mvlab import DensityField, chemical_potential, dissipation, entropy_energy, flux, free_energy, interaction_energy, periodized_gaussian
from mvlab.kernels import KernelTable


@pytest.fixture
def uniform(grid):
    return DensityField(grid, np.full(512, 0.2))


def test_entropy_uniform(uniform):
    assert entropy_energy(uniform, 1.0) == pytest.approx(0.5 * np.log(0.2), abs=1e-12)
    assert entropy_energy(uniform, 2.0) == pytest.approx(4 * entropy_energy(uniform, 1.0), rel=1e-14)


def test_entropy_gaussian(grid):
    f = periodized_gaussian(grid, 0, 0.5)
    oracle = 0.5 * (-0.5 * np.log(2 * np.pi * np.e * 0.25))
    assert entropy_energy(f, 1.0) == pytest.approx(oracle, abs=2e-3)


def test_entropy_zero_cells(grid):
    v = np.zeros(512)
    v[:256] = 0.4
    assert np.isfinite(entropy_energy(DensityField(grid, v), 1.0))


def test_interaction_uniform(uniform, morse_table):
    assert interaction_energy(uniform, morse_table) == pytest.approx(-0.09, abs=1e-4)


def test_interaction_zero_kernel(grid):
    table = KernelTable.from_values(grid, np.zeros(512))
    assert interaction_energy(periodized_gaussian(grid), table) == 0.0


def test_chemical_potential_uniform(uniform, morse_table):
    mu = chemical_potential(uniform, morse_table, 1.0)
    np.testing.assert_allclose(mu, 0.5 * (1 + np.log(0.2)) - 0.18, atol=2e-4)
    assert np.ptp(mu) < 1e-12


def test_chemical_potential_floor(grid, morse_table):
    v = np.full(512, 1 / 5.0)
    v[0] = 0.0
    v /= v.sum() * grid.dx
    mu = chemical_potential(DensityField(grid, v), morse_table, 1.0)
    assert np.all(np.isfinite(mu))


def test_chemical_potential_is_first_variation(grid, morse_table, rng):
    sigma = 0.8
    f = periodized_gaussian(grid, 0.1, 0.4)
    mu = chemical_potential(f, morse_table, sigma)
    # relative perturbation keeps the perturbed densities positive
    eta = f.values * rng.standard_normal(512)
    eps = 1e-6
    dF = (free_energy(f.with_values(f.values + eps * eta), morse_table, sigma)
          - free_energy(f.with_values(f.values - eps * eta), morse_table, sigma)) / (2 * eps)
    assert dF == pytest.approx(np.sum(mu * eta) * grid.dx, rel=1e-6)


def test_flux_constant_mu(grid):
    f = periodized_gaussian(grid)
    assert np.all(flux(f, np.full(512, 3.0)) == 0)
    assert dissipation(f, np.full(512, 3.0)) == 0


def test_flux_linear_mu(uniform, grid):
    mu = np.arange(512, dtype=float)
    J = flux(uniform, mu)
    np.testing.assert_allclose(J[:-1], -0.2 / grid.dx)


@pytest.mark.parametrize("interface", ["upwind", "arithmetic"])
def test_dissipation_nonnegative(grid, morse_table, interface, rng):
    f = DensityField(grid, rng.random(512) + 0.01)
    mu = chemical_potential(f, morse_table, 0.7)
    assert dissipation(f, mu, interface=interface) >= 0


def test_flux_rejects_unknown_interface(uniform):
    with pytest.raises(ValueError):
        flux(uniform, np.zeros(512), interface="harmonic")
