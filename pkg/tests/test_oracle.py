import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from chinsplit.grid import AxisGrid, make_phase_grid
from chinsplit.moyal import parse_polynomial
from chinsplit.oracle import (evolve_exact_kerr, exact_kerr_wigner, fock_expand, hermite_functions,
                              interior, kerr_energy, matrix_rep, position_momentum, psi_on_grid)
from chinsplit.states import coherent_wavefunction, coherent_wigner


@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4))
def test_fock_expansion_normalised(x0, p0):
    c = fock_expand(x0, p0)
    assert c.populations.sum() == pytest.approx(1.0, abs=1e-13)
    assert c.mean_number() == pytest.approx((x0 ** 2 + p0 ** 2) / 2, rel=1e-10, abs=1e-12)


def test_fock_state_matches_coherent_wavefunction():
    ax = AxisGrid.centered(256, 24.0)
    for hbar in (1.0, 0.5):
        psi = psi_on_grid(fock_expand(2.0, 1.0, hbar), ax, hbar)
        ref = coherent_wavefunction(ax, 2.0, 1.0, hbar)
        ov = ref.overlap(psi)
        assert abs(abs(ov) - 1) < 1e-12
        # equal up to the global phase exp(-i x0 p0 / 2 hbar)
        assert np.allclose(psi.position, ov * ref.position, atol=1e-10)
        assert np.angle(ov) == pytest.approx(-2.0 * 1.0 / (2 * hbar), abs=1e-9)


def test_hermite_functions_orthonormal():
    ax = AxisGrid.centered(512, 40.0)
    phi = hermite_functions(40, ax.points)
    gram = phi @ phi.T * ax.step
    assert np.allclose(gram, np.eye(41), atol=1e-12)


def test_kerr_revival_and_energy():
    c = fock_expand(1.0, 2.0)
    # E_n = (n + 1/2)^2 = n^2 + n + 1/4: n^2 + n is even, so t = pi revives up to a global phase
    back = evolve_exact_kerr(c, np.pi)
    assert abs(abs(np.vdot(c.coefficients, back.coefficients)) - 1) < 1e-12
    assert kerr_energy(back) == pytest.approx(kerr_energy(c))


def test_exact_wigner_at_zero_is_coherent():
    g = make_phase_grid(128, 128, 20.0, 30.0)
    w = exact_kerr_wigner(g, 2.0, 0.0, 0.0)
    assert np.abs(w.xp - coherent_wigner(g, 2.0, 0.0).xp).max() < 1e-10


def test_kerr_matrix_is_oscillator_squared():
    dim = 40
    h = matrix_rep(parse_polynomial("(x^2 + p^2)^2/4 - hbar^2/4"), dim).matrix
    n = np.arange(dim)
    assert np.allclose(h, np.diag((n + 0.5) ** 2), atol=1e-9)


def test_weyl_ordering_of_xp():
    x, p = position_momentum(30)
    xp = matrix_rep(parse_polynomial("x p"), 20).matrix
    assert np.allclose(xp, ((x @ p + p @ x) / 2)[:20, :20], atol=1e-12)
    assert matrix_rep(parse_polynomial("x^3 p^2"), 20).hermiticity_error() < 1e-9


def test_canonical_commutator_in_interior():
    x, p = position_momentum(30, 0.5)
    comm = x @ p - p @ x
    s = interior(30)
    assert np.allclose(comm[s, s], 0.5j * np.eye(30)[s, s])


def test_exact_propagator_matches_matrix_exponential():
    dim, t = 60, 0.3
    c = fock_expand(1.0, 0.5)
    v = np.zeros(dim, dtype=complex)
    v[:c.cutoff + 1] = c.coefficients
    h = matrix_rep(parse_polynomial("(x^2 + p^2)^2/4 - hbar^2/4"), dim).matrix
    ref = expm(-1j * t * h) @ v
    got = evolve_exact_kerr(c, t).coefficients
    assert np.allclose(ref[:c.cutoff + 1], got, atol=1e-10)
