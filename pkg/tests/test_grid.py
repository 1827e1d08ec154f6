import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chinsplit.grid import (AxisGrid, GridError, Rep, apply_diagonal, bopp_difference,
                            make_phase_grid, transform, wave_transform)

pow2 = st.sampled_from([8, 16, 32, 64])


@pytest.fixture
def grid():
    return make_phase_grid(64, 64, 16.0, 20.0)


def test_axis_requires_power_of_two():
    with pytest.raises(GridError):
        AxisGrid.centered(100, 10.0)
    with pytest.raises(GridError):
        AxisGrid.centered(64, -1.0)


def test_centered_axis_has_origin_at_middle():
    ax = AxisGrid.centered(32, 8.0)
    assert ax.points[16] == 0.0
    assert ax.is_centered
    assert ax.conjugate_points[16] == 0.0
    assert ax.conjugate_step == pytest.approx(2 * np.pi / 8.0)


@settings(max_examples=30, deadline=None)
@given(pow2, pow2, st.integers(0, 2 ** 31 - 1))
def test_transform_round_trips(nx, nt, seed):
    g = make_phase_grid(nx, nt, 10.0, 12.0)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    for a, b in [(Rep.XP, Rep.XTHETA), (Rep.XTHETA, Rep.LAMBDAP), (Rep.XP, Rep.LAMBDAP)]:
        back = transform(transform(f, g, a, b), g, b, a)
        assert np.allclose(back, f, atol=1e-12)


def test_transforms_compose(grid):
    rng = np.random.default_rng(1)
    f = rng.standard_normal(grid.shape)
    direct = transform(f, grid, Rep.XP, Rep.LAMBDAP)
    via = transform(transform(f, grid, Rep.XP, Rep.XTHETA), grid, Rep.XTHETA, Rep.LAMBDAP)
    assert np.allclose(direct, via, atol=1e-12)


def test_gaussian_theta_transform_is_analytic(grid):
    # W(x, p) = exp(-p^2)/sqrt(pi)  ->  W(x, theta) = exp(-theta^2/4)
    x, p = grid.mesh(Rep.XP)
    w = np.exp(-p ** 2) / np.sqrt(np.pi) * np.ones_like(x)
    wt = transform(w, grid, Rep.XP, Rep.XTHETA)
    _, th = grid.mesh(Rep.XTHETA)
    assert np.allclose(wt, np.exp(-th ** 2 / 4), atol=1e-10)


def test_derivative_convention(grid):
    # -i d/dx -> lambda: a shifted Gaussian picks up exp(-i lambda a)
    x, p = grid.mesh(Rep.XP)
    a = 0.7
    f = np.exp(-(x - a) ** 2) * np.exp(-p ** 2)
    g = np.exp(-x ** 2) * np.exp(-p ** 2)
    lam, _ = grid.mesh(Rep.LAMBDAP)
    F = transform(f, grid, Rep.XP, Rep.LAMBDAP)
    G = transform(g, grid, Rep.XP, Rep.LAMBDAP)
    assert np.allclose(F, G * np.exp(-1j * lam * a), atol=1e-10)


def test_wave_transform_unitary():
    ax = AxisGrid.centered(128, 20.0)
    rng = np.random.default_rng(3)
    psi = np.exp(-ax.points ** 2) * (1 + 0.1 * rng.standard_normal(128))
    for hbar in (1.0, 0.3):
        ph = wave_transform(psi, ax, hbar, True)
        n_x = (abs(psi) ** 2).sum() * ax.step
        n_p = (abs(ph) ** 2).sum() * hbar * ax.conjugate_step
        assert n_p == pytest.approx(n_x, rel=1e-12)
        assert np.allclose(wave_transform(ph, ax, hbar, False), psi, atol=1e-12)


def test_wave_transform_momentum_sign():
    ax = AxisGrid.centered(256, 40.0)
    x = ax.points
    psi = np.exp(-x ** 2 / 2 + 2j * x)
    ph = wave_transform(psi, ax, 1.0, True)
    k = ax.conjugate_points
    assert k[np.argmax(abs(ph))] == pytest.approx(2.0, abs=ax.conjugate_step)


def test_apply_diagonal_raises_on_overflow():
    data = np.ones(4, dtype=complex)
    with pytest.raises(FloatingPointError):
        apply_diagonal(data, np.array([1e6, 0, 0, 0]), 1.0)
    with pytest.raises(FloatingPointError), np.errstate(invalid="ignore"):
        apply_diagonal(data, np.array([np.inf, 0, 0, 0]), 1j)
    assert np.allclose(apply_diagonal(data, np.zeros(4), 5.0), data)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=6),
       st.floats(-3, 3), st.floats(-3, 3), st.floats(0.01, 2))
def test_bopp_difference_matches_direct(coeffs, u, v, hbar):
    f = np.polynomial.Polynomial(coeffs)
    direct = (f(u - hbar * v / 2) - f(u + hbar * v / 2)) / hbar
    assert bopp_difference(coeffs, u, v, hbar) == pytest.approx(direct, abs=1e-9 * (1 + abs(direct)))


def test_bopp_difference_classical_limit():
    # f = x^4: -v f'(u) at hbar = 0
    u, v = 1.3, -0.4
    assert bopp_difference([0, 0, 0, 0, 1], u, v, 0.0) == pytest.approx(-v * 4 * u ** 3)
