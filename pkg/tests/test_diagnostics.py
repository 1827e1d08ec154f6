import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chinsplit.diagnostics import RunSeries, error_measures, fit_scaling, overlap_wigner
from chinsplit.grid import make_phase_grid
from chinsplit.states import coherent_wavefunction, coherent_wigner


@pytest.fixture(scope="module")
def grid():
    return make_phase_grid(128, 128, 20.0, 30.0)


def test_overlap_of_coherent_states(grid):
    a = coherent_wigner(grid, 1.0, 0.0)
    b = coherent_wigner(grid, -1.0, 0.0)
    # |<a|b>|^2 = exp(-|alpha - beta|^2) with |alpha - beta|^2 = d^2 / (2 hbar)
    assert overlap_wigner(a, b) == pytest.approx(np.exp(-2.0), rel=1e-10)
    assert overlap_wigner(a, a) == pytest.approx(1.0, abs=1e-10)


def test_error_measures_of_identical_states(grid):
    a = coherent_wigner(grid, 1.0, 2.0)
    m = error_measures(a, a)
    assert abs(m.w_overlap) < 1e-10 and m.l2 == 0 and m.max_diff == 0
    assert m.psi_overlap is None


def test_wavefunction_measures_match_wigner_ones(grid):
    ax = grid.x_axis
    a = coherent_wavefunction(ax, 0.5, 0.0)
    b = coherent_wavefunction(ax, 0.7, 0.1)
    m = error_measures(a, b)
    assert m.psi_overlap == pytest.approx(1 - np.exp(-(0.2 ** 2 + 0.1 ** 2) / 2), rel=1e-9)
    # for pure states both overlap defects coincide
    assert m.w_overlap == pytest.approx(m.psi_overlap, rel=1e-8)
    with pytest.raises(TypeError):
        error_measures(a, coherent_wigner(grid, 0, 0))


def test_l2_is_purity_distance(grid):
    a = coherent_wigner(grid, 0.0, 0.0)
    b = coherent_wigner(grid, 3.0, 0.0)
    # orthogonal-ish states: 2 pi hbar int (Wa - Wb)^2 = 2 - 2 overlap
    m = error_measures(a, b)
    assert m.l2 ** 2 == pytest.approx(2 - 2 * overlap_wigner(a, b), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-5, 5), st.floats(1e-4, 1e-2))
def test_fit_recovers_power_law(k, logc, dt0):
    dts = dt0 * 2.0 ** np.arange(5)
    errs = np.exp(logc) * dts ** k
    f = fit_scaling(dts, errs)
    assert f.exponent == pytest.approx(k, rel=1e-9)
    assert f.r_squared == pytest.approx(1.0)
    assert np.allclose(f.predict(dts), errs, rtol=1e-9)


def test_fit_drops_roundoff_points():
    dts = [1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2]
    errs = [1e-14, 2e-4, 4e-4, 8e-4, 1.6e-3]
    f = fit_scaling(dts, errs)
    assert len(f.dts) == 4 and f.exponent == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_scaling(dts[:3], errs[:3])
    with pytest.raises(ValueError):
        fit_scaling([1, 2, -1, 3], [1, 2, 3, 4])


def test_run_series_contract():
    s = RunSeries()
    s.append(0.0, 1.0, 2.0, recurrence=0.0)
    s.append(0.1, 1.0, 2.0, recurrence=0.1)
    with pytest.raises(ValueError):
        s.append(0.1, 1.0, 2.0, recurrence=0.2)
    s.validate()
    assert list(s.columns()) == ["t", "norm", "energy", "recurrence"]
    s.overlaps["recurrence"].pop()
    with pytest.raises(ValueError):
        s.validate()
