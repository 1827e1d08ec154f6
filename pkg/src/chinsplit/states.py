"""Wigner distributions and wavefunctions on uniform grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import AxisGrid, GridError, PhaseGrid, Rep, transform, wave_transform
from .moyal import PolynomialXP

__all__ = [
    "WignerState", "WaveFunction", "BoundaryError", "coherent_wigner",
    "coherent_wavefunction", "wigner_of_wavefunction", "expectation",
]

EDGE_WIDTH = 4


class BoundaryError(RuntimeError):
    """State carries non-negligible weight at the edge of its grid."""


def _edge_sum(a: np.ndarray, width: int = EDGE_WIDTH) -> float:
    a = np.abs(a)
    inner = a[width:-width, width:-width].sum() if a.ndim == 2 else a[width:-width].sum()
    return float(a.sum() - inner)


@dataclass
class WignerState:
    grid: PhaseGrid
    data: np.ndarray
    rep: Rep = Rep.XP

    def __post_init__(self):
        if self.rep not in (Rep.XTHETA, Rep.LAMBDAP, Rep.XP):
            raise GridError(f"{self.rep} is not a phase-space representation")
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != self.grid.shape:
            raise GridError(f"data shape {self.data.shape} != grid shape {self.grid.shape}")

    def to(self, rep: Rep) -> "WignerState":
        if rep is self.rep:
            return self
        return WignerState(self.grid, transform(self.data, self.grid, self.rep, rep), rep)

    def copy(self) -> "WignerState":
        return WignerState(self.grid, self.data.copy(), self.rep)

    @property
    def xp(self) -> np.ndarray:
        """Real W(x, p) in monotone axis order."""
        return self.to(Rep.XP).data.real

    def imag_residual(self) -> float:
        return float(np.abs(self.to(Rep.XP).data.imag).max())

    def norm(self) -> float:
        """Integral of W over phase space."""
        if self.rep is Rep.XTHETA:
            # int W dx dp = int W(x, theta = 0) dx
            return float(self.data[:, self.grid.theta_axis.n // 2].real.sum() * self.grid.dx)
        return float(self.xp.sum() * self.grid.cell)

    def purity(self) -> float:
        w = self.xp
        return float(2 * np.pi * self.grid.hbar * (w * w).sum() * self.grid.cell)

    def boundary_mass(self) -> float:
        return _edge_sum(self.xp) * self.grid.cell

    def edge_max(self) -> float:
        w = np.abs(self.xp)
        return float(max(w[0].max(), w[-1].max(), w[:, 0].max(), w[:, -1].max()))

    def mean(self) -> tuple:
        x, p = self.grid.mesh(Rep.XP)
        w = self.xp
        return (float((x * w).sum() * self.grid.cell), float((p * w).sum() * self.grid.cell))


@dataclass
class WaveFunction:
    axis: AxisGrid
    data: np.ndarray
    hbar: float = 1.0
    rep: Rep = Rep.POSITION

    def __post_init__(self):
        if self.rep not in (Rep.POSITION, Rep.MOMENTUM):
            raise GridError(f"{self.rep} is not a wavefunction representation")
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (self.axis.n,):
            raise GridError("wavefunction length does not match axis")

    @property
    def momentum_points(self) -> np.ndarray:
        return self.hbar * self.axis.conjugate_points

    def to(self, rep: Rep) -> "WaveFunction":
        if rep is self.rep:
            return self
        if rep not in (Rep.POSITION, Rep.MOMENTUM):
            raise GridError(f"cannot convert wavefunction to {rep}")
        data = wave_transform(self.data, self.axis, self.hbar, to_momentum=rep is Rep.MOMENTUM)
        return WaveFunction(self.axis, data, self.hbar, rep)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.axis, self.data.copy(), self.hbar, self.rep)

    @property
    def position(self) -> np.ndarray:
        return self.to(Rep.POSITION).data

    def norm(self) -> float:
        if self.rep is Rep.POSITION:
            return float((np.abs(self.data) ** 2).sum() * self.axis.step)
        return float((np.abs(self.data) ** 2).sum() * self.hbar * self.axis.conjugate_step)

    def overlap(self, other: "WaveFunction") -> complex:
        return complex(np.vdot(self.position, other.position) * self.axis.step)

    def boundary_mass(self) -> float:
        return _edge_sum(np.abs(self.position) ** 2) * self.axis.step


def coherent_wigner(grid: PhaseGrid, x0: float, p0: float, tol: float = 1e-10) -> WignerState:
    """Gaussian coherent state ``exp(-((x-x0)^2 + (p-p0)^2)/hbar) / (pi hbar)``."""
    h = grid.hbar
    x, p = grid.mesh(Rep.XP)
    w = np.exp(-((x - x0) ** 2 + (p - p0) ** 2) / h) / (np.pi * h)
    state = WignerState(grid, w, Rep.XP)
    if state.boundary_mass() > tol:
        raise BoundaryError(f"coherent state at ({x0}, {p0}) too close to the grid edge")
    state.data = state.data / state.norm()
    return state


def coherent_wavefunction(axis: AxisGrid, x0: float, p0: float, hbar: float = 1.0,
                          tol: float = 1e-10) -> WaveFunction:
    x = axis.points
    psi = (np.pi * hbar) ** -0.25 * np.exp(-(x - x0) ** 2 / (2 * hbar) + 1j * p0 * x / hbar)
    wf = WaveFunction(axis, psi, hbar)
    if wf.boundary_mass() > tol:
        raise BoundaryError(f"coherent state at ({x0}, {p0}) too close to the grid edge")
    wf.data = wf.data / np.sqrt(wf.norm())
    return wf


def shifted_samples(psi: np.ndarray, axis: AxisGrid, shifts: np.ndarray) -> np.ndarray:
    """Band-limited samples ``psi(x_m + s)`` for each shift, shape (len(shifts), n)."""
    k = 2 * np.pi * sfft.fftfreq(axis.n, axis.step)
    spec = sfft.fft(psi)
    return sfft.ifft(spec[None, :] * np.exp(1j * np.outer(shifts, k)), axis=1, workers=-1)


def wigner_of_wavefunction(psi: WaveFunction, grid: PhaseGrid) -> WignerState:
    """Wigner transform of a pure state.

    Uses ``W(x, theta) = psi(x - hbar theta/2) conj(psi(x + hbar theta/2))``
    and then the theta -> p transform of the grid; off-grid samples come from
    band-limited interpolation on a zero-padded copy of the x axis.
    """
    ax = grid.x_axis
    if psi.axis != ax:
        raise GridError("wavefunction axis must equal the phase grid's x axis")
    if abs(psi.hbar - grid.hbar) > 1e-15 * max(1.0, grid.hbar):
        raise GridError("hbar of wavefunction and grid differ")
    s = 0.5 * grid.hbar * grid.theta_axis.points
    # zero-pad so shifted samples never wrap around the periodic box
    pad = int(np.ceil(np.abs(s).max() / ax.step)) + 1
    n_big = 1 << int(np.ceil(np.log2(ax.n + 2 * pad)))
    lo = (n_big - ax.n) // 2
    big = AxisGrid(n_big, ax.min - lo * ax.step, ax.step)
    f = np.zeros(n_big, dtype=complex)
    f[lo:lo + ax.n] = psi.position
    minus = shifted_samples(f, big, -s)[:, lo:lo + ax.n]  # (ntheta, nx)
    plus = shifted_samples(f, big, s)[:, lo:lo + ax.n]
    w_xtheta = (minus * plus.conj()).T
    return WignerState(grid, w_xtheta, Rep.XTHETA).to(Rep.XP)


def expectation(state: WignerState, symbol: PolynomialXP, tol: float = 1e-8) -> float:
    """Phase-space average of a polynomial Weyl symbol."""
    grid = state.grid
    x, p = grid.mesh(Rep.XP)
    vals = symbol(x, p, grid.hbar)
    w = state.xp
    if _edge_sum(vals * w) * grid.cell > tol:
        raise BoundaryError("symbol weight at the grid edge exceeds tolerance")
    return float((vals * w).sum() * grid.cell)
