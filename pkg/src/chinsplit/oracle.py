"""Exact Kerr dynamics in the number basis and truncated operator matrices.

Nothing here shares code with the split-operator propagators; these are the
independent references the propagators are checked against.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import gammaln

from .grid import AxisGrid
from .moyal import PolynomialXP
from .states import WaveFunction, wigner_of_wavefunction

__all__ = [
    "FockExpansion", "TruncatedOperator", "fock_expand", "evolve_exact_kerr",
    "psi_on_grid", "matrix_rep", "ladder", "position_momentum", "interior",
    "kerr_energy", "exact_kerr_wigner",
]


@dataclass(frozen=True)
class FockExpansion:
    coefficients: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.coefficients) - 1

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def mean_number(self) -> float:
        return float((np.arange(len(self.coefficients)) * self.populations).sum())


@dataclass(frozen=True)
class TruncatedOperator:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


def fock_expand(x0: float, p0: float, hbar: float = 1.0, tol: float = 1e-24) -> FockExpansion:
    """Coherent state ``|alpha>`` with ``alpha = (x0 + i p0)/sqrt(2 hbar)``.

    The cutoff is the smallest N whose discarded Poisson tail is below ``tol``.
    """
    alpha = (x0 + 1j * p0) / np.sqrt(2 * hbar)
    mean = abs(alpha) ** 2
    nmax = int(mean + 20 * np.sqrt(mean + 1) + 40)
    n = np.arange(nmax + 1)
    if mean == 0:
        return FockExpansion(np.array([1.0 + 0j]))
    logmag = -mean / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    c = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    pops = np.abs(c) ** 2
    tail = np.cumsum(pops[::-1])[::-1]  # tail[k] = sum over n >= k
    keep = int(np.argmax(tail < tol))
    return FockExpansion(c[:keep])


def evolve_exact_kerr(state: FockExpansion, t: float, hbar: float = 1.0) -> FockExpansion:
    """Kerr evolution: E_n = ((n + 1/2) hbar)^2."""
    n = np.arange(len(state.coefficients))
    energy = ((n + 0.5) * hbar) ** 2
    return FockExpansion(state.coefficients * np.exp(-1j * energy * t / hbar))


def kerr_energy(state: FockExpansion, hbar: float = 1.0) -> float:
    n = np.arange(len(state.coefficients))
    return float((state.populations * ((n + 0.5) * hbar) ** 2).sum())


def hermite_functions(nmax: int, x: np.ndarray, hbar: float = 1.0) -> np.ndarray:
    """Normalised oscillator eigenfunctions, rows n = 0..nmax (scaled recurrence)."""
    xi = np.asarray(x) / np.sqrt(hbar)
    out = np.empty((nmax + 1, len(xi)))
    out[0] = np.pi ** -0.25 * np.exp(-xi ** 2 / 2) / hbar ** 0.25
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for k in range(1, nmax):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * xi * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def psi_on_grid(state: FockExpansion, axis: AxisGrid, hbar: float = 1.0) -> WaveFunction:
    phi = hermite_functions(state.cutoff, axis.points, hbar)
    return WaveFunction(axis, state.coefficients @ phi, hbar)


def exact_kerr_wigner(grid, x0: float, p0: float, t: float):
    """Exact Kerr-evolved Wigner function of a coherent state on ``grid``."""
    c = fock_expand(x0, p0, grid.hbar)
    psi = psi_on_grid(evolve_exact_kerr(c, t, grid.hbar), grid.x_axis, grid.hbar)
    return wigner_of_wavefunction(psi, grid)


def ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def position_momentum(dim: int, hbar: float = 1.0):
    a = ladder(dim)
    ad = a.conj().T
    x = np.sqrt(hbar / 2) * (a + ad)
    p = 1j * np.sqrt(hbar / 2) * (ad - a)
    return x, p


def interior(dim: int, fraction: float = 0.75) -> slice:
    """Index range kept in operator-identity norms (top quarter dropped)."""
    return slice(0, int(dim * fraction))


def matrix_rep(symbol: PolynomialXP, dim: int, hbar: float = 1.0) -> TruncatedOperator:
    """Weyl-ordered operator of a polynomial symbol in the truncated number basis.

    Weyl(x^a p^b) = 2^-a sum_k C(a, k) x^k p^b x^(a-k).  Products are formed in
    a basis padded by the total degree and then cropped, so every returned
    entry is exact.
    """
    pad = symbol.total_degree + 2
    big = dim + pad
    x, p = position_momentum(big, hbar)
    xpow = [np.eye(big, dtype=complex)]
    ppow = [np.eye(big, dtype=complex)]
    dx, dp = symbol.degrees()
    for _ in range(dx):
        xpow.append(xpow[-1] @ x)
    for _ in range(dp):
        ppow.append(ppow[-1] @ p)
    out = np.zeros((big, big), dtype=complex)
    for (i, j, k), c in symbol.items():
        mono = np.zeros((big, big), dtype=complex)
        for m in range(i + 1):
            mono += comb(i, m) * (xpow[m] @ ppow[j] @ xpow[i - m])
        out += float(c) * hbar ** k * mono / 2 ** i
    return TruncatedOperator(out[:dim, :dim])
