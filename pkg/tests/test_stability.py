import numpy as np
import pytest

from mvlab import DEFAULT_MORSE, DensityField, FinalState, classify_final_state, estimate_sigma_c, make_grid, periodized_gaussian, sigma_sharp
from mvlab.errors import InvalidBracketError, InvalidConfigurationError
from mvlab.kernels import KernelTable, morse_fourier_closed_form
from mvlab.stability import PhaseBracket, ProbeVerdict, unstable_mode


def test_sigma_sharp_morse(morse_table):
    s = sigma_sharp(morse_table)
    assert 0.58 <= s <= 0.61
    # closed-form oracle at k = 1
    oracle = np.sqrt(-2 * morse_fourier_closed_form(DEFAULT_MORSE, 5.0, 1) / 5.0)
    assert s == pytest.approx(oracle, abs=2e-3)
    assert unstable_mode(morse_table) == 1


def test_sigma_sharp_zero_kernel(grid):
    table = KernelTable.from_values(grid, np.zeros(512))
    assert sigma_sharp(table) == 0.0
    assert unstable_mode(table) == 0


def test_sigma_sharp_hk(hk_table):
    assert sigma_sharp(hk_table) == pytest.approx(0.416, abs=2e-3)


def test_k_max_validation(morse_table):
    with pytest.raises(InvalidConfigurationError):
        sigma_sharp(morse_table, k_max=0)
    with pytest.raises(InvalidConfigurationError):
        sigma_sharp(morse_table, k_max=256)


def test_final_state(grid):
    assert classify_final_state(DensityField(grid, np.full(512, 0.2))) is FinalState.HOMOGENEOUS
    assert classify_final_state(periodized_gaussian(grid, 0, 0.5)) is FinalState.CLUSTERED


def test_bracket_monotonicity():
    b = PhaseBracket(0.7, 1.0)
    b.verdicts = [ProbeVerdict(0.7, FinalState.CLUSTERED, 1, 1, "t_final"),
                  ProbeVerdict(1.0, FinalState.HOMOGENEOUS, 0, 1, "t_final")]
    assert b.is_monotone()
    b.verdicts.append(ProbeVerdict(1.1, FinalState.CLUSTERED, 1, 1, "t_final"))
    assert not b.is_monotone()


def test_invalid_bracket_both_homogeneous():
    # coarse grid keeps this quick; both ends lie far above the transition
    grid = make_grid(5.0, 128)
    with pytest.raises(InvalidBracketError):
        estimate_sigma_c(DEFAULT_MORSE, grid, bracket=(0.9, 1.1), t_max=30.0)


def test_bracket_order_validation(grid):
    with pytest.raises(InvalidConfigurationError):
        estimate_sigma_c(DEFAULT_MORSE, grid, bracket=(1.0, 0.7))
