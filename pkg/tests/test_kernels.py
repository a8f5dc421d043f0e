import numpy as np
import pytest

from mvlab import DEFAULT_MORSE, DensityField, HegselmannKrause, Morse, convolve, make_grid, periodize_on_grid, periodized_gaussian
from mvlab.errors import IncompatibleGridsError, InvalidConfigurationError
from mvlab.kernels import KernelTable, evaluate_free, kernel_gradient_free, morse_fourier_closed_form


def test_morse_values():
    assert evaluate_free(DEFAULT_MORSE, 0.0) == pytest.approx(-3.0)
    assert evaluate_free(DEFAULT_MORSE, 0.125) == pytest.approx(-4 * np.exp(-1) + np.exp(-2.5), abs=1e-12)
    assert evaluate_free(DEFAULT_MORSE, 0.125) == pytest.approx(-1.3895, abs=1e-4)


def test_hk_values():
    hk = HegselmannKrause(0.5)
    assert evaluate_free(hk, 0.0) == pytest.approx(-0.5)
    assert evaluate_free(hk, 0.5) == pytest.approx(-0.375)
    assert evaluate_free(hk, 0.6) == 0.0
    assert kernel_gradient_free(hk, 0.25) == pytest.approx(0.25)
    assert kernel_gradient_free(hk, 0.6) == 0.0


def test_morse_gradient():
    assert kernel_gradient_free(DEFAULT_MORSE, 0.0) == 0.0
    expected = 32 * np.exp(-0.8) - 20 * np.exp(-2)
    assert kernel_gradient_free(DEFAULT_MORSE, 0.1) == pytest.approx(expected, abs=1e-10)
    h = 1e-7
    fd = (evaluate_free(DEFAULT_MORSE, 0.1 + h) - evaluate_free(DEFAULT_MORSE, 0.1 - h)) / (2 * h)
    assert kernel_gradient_free(DEFAULT_MORSE, 0.1) == pytest.approx(fd, rel=1e-6)
    assert kernel_gradient_free(DEFAULT_MORSE, -0.1) == pytest.approx(-expected, abs=1e-10)


def test_morse_rejects_nonpositive():
    with pytest.raises(InvalidConfigurationError):
        Morse(4, 1, 0.0, 0.05)


def test_table_symmetry(morse_table):
    u, du = morse_table.u, morse_table.du
    n = u.size
    j = np.arange(1, n)
    assert np.array_equal(u[j], u[n - j])
    assert np.array_equal(du[j], -du[n - j])
    assert du[0] == 0.0


def test_fourier_matches_closed_form(morse_table):
    k = np.arange(0, 6)
    np.testing.assert_allclose(morse_table.fourier[k], morse_fourier_closed_form(DEFAULT_MORSE, 5, k), atol=2e-3)
    assert morse_table.fourier[1] == pytest.approx(-0.8763, abs=2e-3)
    assert morse_fourier_closed_form(DEFAULT_MORSE, 5, 0) == pytest.approx(-0.9)


def test_hk_outside_radius(hk_table, grid):
    d = hk_table.displacements
    assert hk_table.u[np.argmin(np.abs(d + 2.5))] == 0.0


def test_hk_radius_too_large(grid):
    with pytest.raises(InvalidConfigurationError):
        periodize_on_grid(HegselmannKrause(2.6), grid)


def test_uniform_convolution(morse_table, grid):
    conv = convolve(morse_table, DensityField(grid, np.full(512, 0.2)))
    np.testing.assert_allclose(conv, -0.18, atol=2e-4)
    # the discrete table sum is the exact oracle on the grid
    np.testing.assert_allclose(conv, morse_table.u.sum() * grid.dx * 0.2, atol=1e-12)


def test_delta_convolution(morse_table, grid):
    rho = np.zeros(512)
    rho[100] = 1 / grid.dx
    conv = convolve(morse_table, DensityField(grid, rho))
    np.testing.assert_allclose(conv, np.roll(morse_table.u, 100), atol=1e-12)


@pytest.mark.parametrize("table_name", ["morse_table", "hk_table"])
def test_fft_matches_direct(request, grid, table_name, rng):
    table = request.getfixturevalue(table_name)
    f = DensityField(grid, rng.random(512))
    np.testing.assert_allclose(convolve(table, f), convolve(table, f, method="direct"), atol=1e-10)


@pytest.mark.parametrize("table_name", ["morse_table", "hk_table"])
def test_convolution_commutes_with_reflection_bitwise(request, grid, table_name, rng):
    table = request.getfixturevalue(table_name)
    rho = rng.random(512)
    a = convolve(table, DensityField(grid, rho))
    b = convolve(table, DensityField(grid, rho[::-1].copy()))[::-1]
    assert np.array_equal(a, b)


def test_convolve_grid_mismatch(morse_table):
    other = periodized_gaussian(make_grid(5, 256))
    with pytest.raises(IncompatibleGridsError):
        convolve(morse_table, other)


def test_from_values_rejects_length(grid):
    with pytest.raises(InvalidConfigurationError):
        KernelTable.from_values(grid, np.zeros(10))
