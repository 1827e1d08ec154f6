"""Uniform grids, Fourier conventions and diagonal operators.

Phase-space arrays have shape ``(nx, ntheta)``.  Axis 0 carries x (or its
conjugate lambda), axis 1 carries theta (or its conjugate p).  Conventions:

* x -> lambda uses the kernel ``exp(-i lambda x)``, so ``-i d/dx`` becomes
  multiplication by lambda;
* theta -> p uses ``exp(+i p theta)``, so ``i d/dtheta`` becomes
  multiplication by p.  Equivalently ``W(x, theta) = int W(x, p) exp(-i p theta) dp``.

Every axis is centred: points ``min + i*step`` with ``min = -n*step/2``, so the
origin sits at index ``n//2`` and conjugate axes are stored in monotone
(fft-shifted) order.  ``natural`` arrays are the ``ifftshift``-ed layout used
internally by the propagators.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.fft as sfft

__all__ = [
    "AxisGrid", "PhaseGrid", "Rep", "make_phase_grid", "transform",
    "apply_diagonal", "bopp_difference", "wave_transform", "GridError",
]

TWO_PI = 2.0 * np.pi


class GridError(ValueError):
    pass


class Rep(enum.Enum):
    XTHETA = "x-theta"
    LAMBDAP = "lambda-p"
    XP = "x-p"
    POSITION = "position"
    MOMENTUM = "momentum"


PHASE_SPACE_REPS = (Rep.XTHETA, Rep.LAMBDAP, Rep.XP)
WAVE_REPS = (Rep.POSITION, Rep.MOMENTUM)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class AxisGrid:
    n: int
    min: float
    step: float

    def __post_init__(self):
        if not _is_pow2(int(self.n)):
            raise GridError(f"axis size must be a power of two, got {self.n}")
        if not self.step > 0:
            raise GridError(f"axis step must be positive, got {self.step}")

    @classmethod
    def centered(cls, n: int, extent: float) -> "AxisGrid":
        if not extent > 0:
            raise GridError(f"extent must be positive, got {extent}")
        if not _is_pow2(int(n)):
            raise GridError(f"axis size must be a power of two, got {n}")
        step = extent / n
        return cls(int(n), -0.5 * n * step, step)

    @property
    def conjugate_step(self) -> float:
        return TWO_PI / (self.n * self.step)

    @property
    def extent(self) -> float:
        return self.n * self.step

    @property
    def points(self) -> np.ndarray:
        return self.min + self.step * np.arange(self.n)

    @property
    def conjugate_points(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.conjugate_step

    def conjugate(self) -> "AxisGrid":
        dk = self.conjugate_step
        return AxisGrid(self.n, -(self.n // 2) * dk, dk)

    @property
    def is_centered(self) -> bool:
        return abs(self.min + 0.5 * self.n * self.step) <= 1e-12 * self.extent

    @property
    def natural_points(self) -> np.ndarray:
        return np.fft.ifftshift(self.points)


@dataclass(frozen=True)
class PhaseGrid:
    x_axis: AxisGrid
    theta_axis: AxisGrid
    hbar: float = 1.0
    p_axis: AxisGrid = field(init=False)
    lambda_axis: AxisGrid = field(init=False)

    def __post_init__(self):
        if not self.hbar > 0:
            raise GridError("hbar must be positive")
        object.__setattr__(self, "p_axis", self.theta_axis.conjugate())
        object.__setattr__(self, "lambda_axis", self.x_axis.conjugate())

    @property
    def shape(self):
        return (self.x_axis.n, self.theta_axis.n)

    @property
    def dx(self):
        return self.x_axis.step

    @property
    def dp(self):
        return self.p_axis.step

    @property
    def cell(self) -> float:
        """Phase-space cell area dx*dp used by all quadratures."""
        return self.x_axis.step * self.p_axis.step

    def axes(self, rep: Rep):
        """(axis-0, axis-1) coordinate vectors of a representation."""
        if rep is Rep.XTHETA:
            return self.x_axis.points, self.theta_axis.points
        if rep is Rep.LAMBDAP:
            return self.lambda_axis.points, self.p_axis.points
        if rep is Rep.XP:
            return self.x_axis.points, self.p_axis.points
        raise GridError(f"{rep} is not a phase-space representation")

    def mesh(self, rep: Rep):
        a, b = self.axes(rep)
        return np.meshgrid(a, b, indexing="ij")

    def natural_mesh(self, rep: Rep):
        a, b = self.axes(rep)
        return np.meshgrid(np.fft.ifftshift(a), np.fft.ifftshift(b), indexing="ij")

    @property
    def bopp_x_range(self) -> float:
        """Largest |x +- hbar*theta/2| sampled by position-sector symbols."""
        return max(abs(self.x_axis.points).max() + 0.5 * self.hbar * abs(self.theta_axis.points).max(), 0.0)

    @property
    def bopp_p_range(self) -> float:
        """Largest |p +- hbar*lambda/2| sampled by momentum-sector symbols."""
        return abs(self.p_axis.points).max() + 0.5 * self.hbar * abs(self.lambda_axis.points).max()

    def wave_axis(self) -> AxisGrid:
        return self.x_axis


def make_phase_grid(nx: int, ntheta: int, x_extent: float, theta_extent: float,
                    hbar: float = 1.0) -> PhaseGrid:
    return PhaseGrid(AxisGrid.centered(nx, x_extent), AxisGrid.centered(ntheta, theta_extent), hbar)


# -- one-dimensional transforms -------------------------------------------

def _dft(f: np.ndarray, axis_grid: AxisGrid, axis: int, sign: int) -> np.ndarray:
    """sum_m f(u_m) exp(sign*i*k_j*u_m) * step, k on the conjugate axis."""
    n = axis_grid.n
    shape = [1] * f.ndim
    shape[axis] = n
    alt = ((-1.0) ** np.arange(n)).reshape(shape)
    k = axis_grid.conjugate_points.reshape(shape)
    g = f * alt
    if sign < 0:
        out = sfft.fft(g, axis=axis, workers=-1)
    else:
        out = sfft.ifft(g, axis=axis, norm="forward", workers=-1)
    return out * (axis_grid.step * np.exp(sign * 1j * k * axis_grid.min))


def _idft(F: np.ndarray, axis_grid: AxisGrid, axis: int, sign: int) -> np.ndarray:
    """Inverse of ``_dft`` with the same ``sign``."""
    n = axis_grid.n
    shape = [1] * F.ndim
    shape[axis] = n
    alt = ((-1.0) ** np.arange(n)).reshape(shape)
    k = axis_grid.conjugate_points.reshape(shape)
    G = F * np.exp(-sign * 1j * k * axis_grid.min)
    if sign < 0:
        out = sfft.ifft(G, axis=axis, workers=-1)
    else:
        out = sfft.fft(G, axis=axis, norm="backward", workers=-1) / n
    return out * alt / axis_grid.step


_ROUTES = {
    # (from, to): list of (axis, grid attribute, sign, forward?)
    (Rep.XTHETA, Rep.XP): [(1, "theta_axis", +1, True)],
    (Rep.XP, Rep.XTHETA): [(1, "theta_axis", +1, False)],
    (Rep.XTHETA, Rep.LAMBDAP): [(0, "x_axis", -1, True), (1, "theta_axis", +1, True)],
    (Rep.LAMBDAP, Rep.XTHETA): [(0, "x_axis", -1, False), (1, "theta_axis", +1, False)],
    (Rep.XP, Rep.LAMBDAP): [(0, "x_axis", -1, True)],
    (Rep.LAMBDAP, Rep.XP): [(0, "x_axis", -1, False)],
}


def transform(data: np.ndarray, grid: PhaseGrid, src: Rep, dst: Rep) -> np.ndarray:
    """Change the representation of a phase-space field.

    The theta <-> p leg carries the 1/(2 pi) so that ``W(x, p)`` is a
    normalised quasi-probability density when ``W(x, theta=0)`` integrates to 1.
    """
    if src is dst:
        return np.array(data, dtype=complex, copy=True)
    try:
        route = _ROUTES[(src, dst)]
    except KeyError:
        raise GridError(f"no transform from {src} to {dst}") from None
    out = np.asarray(data, dtype=complex)
    if out.shape != grid.shape:
        raise GridError(f"field shape {out.shape} does not match grid {grid.shape}")
    for axis, attr, sign, forward in route:
        ag = getattr(grid, attr)
        if forward:
            out = _dft(out, ag, axis, sign)
            if attr == "theta_axis":
                out = out / TWO_PI
        else:
            if attr == "theta_axis":
                out = out * TWO_PI
            out = _idft(out, ag, axis, sign)
    return out


def wave_transform(psi: np.ndarray, axis: AxisGrid, hbar: float, to_momentum: bool) -> np.ndarray:
    """Unitary position <-> momentum map with p = hbar*k."""
    norm = np.sqrt(TWO_PI * hbar)
    if to_momentum:
        # psi(p) = (2 pi hbar)^-1/2 int psi(x) exp(-i p x / hbar) dx, sampled in k = p/hbar
        return _dft(np.asarray(psi, dtype=complex), axis, 0, -1) / norm
    return _idft(np.asarray(psi, dtype=complex) * norm, axis, 0, -1)


def apply_diagonal(data: np.ndarray, symbol: np.ndarray, factor: complex) -> np.ndarray:
    """Multiply pointwise by ``exp(factor * symbol)``.

    Raises ``FloatingPointError`` when the exponent is not finite or the
    multiplier overflows; nothing is clamped.
    """
    if factor == 0:
        return np.array(data, copy=True)
    expo = factor * np.asarray(symbol)
    if not np.all(np.isfinite(expo)):
        raise FloatingPointError("non-finite exponent in diagonal factor")
    with np.errstate(over="raise"):
        try:
            mult = np.exp(expo)
        except FloatingPointError as exc:
            raise FloatingPointError("overflow in diagonal factor") from exc
    return data * mult


def bopp_difference(coeffs, u: np.ndarray, v: np.ndarray, hbar: float) -> np.ndarray:
    """``(f(u - hbar v/2) - f(u + hbar v/2)) / hbar`` for a polynomial f.

    ``coeffs`` are ascending power-series coefficients.  Expanded analytically
    so that ``hbar = 0`` gives the Liouville limit ``-v f'(u)`` without
    cancellation error.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.zeros(np.broadcast(u, v).shape)
    for k, c in enumerate(coeffs):
        if c == 0 or k == 0:
            continue
        for j in range(1, k + 1, 2):
            scale = c * comb(k, j) * 2.0 ** (1 - j) * (hbar ** (j - 1) if j > 1 else 1.0)
            out = out - scale * u ** (k - j) * v ** j
    return out
