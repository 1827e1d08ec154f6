"""Error measures against an exact reference and log-log scaling fits."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy import stats

from .grid import AxisGrid, PhaseGrid
from .states import WaveFunction, WignerState, wigner_of_wavefunction

__all__ = [
    "RunSeries", "ScalingFit", "ErrorMeasures", "overlap_wigner",
    "error_measures", "fit_scaling", "ROUNDOFF_FLOOR",
]

ROUNDOFF_FLOOR = 1e-12


@dataclass
class RunSeries:
    times: List[float] = field(default_factory=list)
    norm: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    overlaps: Dict[str, List[float]] = field(default_factory=dict)
    fft_count: int = 0

    def append(self, t: float, norm: float, energy: float, **measures):
        if self.times and not t > self.times[-1]:
            raise ValueError("times must be strictly increasing")
        self.times.append(float(t))
        self.norm.append(float(norm))
        self.energy.append(float(energy))
        for k, v in measures.items():
            self.overlaps.setdefault(k, []).append(float(v))

    def __len__(self):
        return len(self.times)

    def validate(self):
        n = len(self.times)
        if len(self.norm) != n or len(self.energy) != n or any(len(v) != n for v in self.overlaps.values()):
            raise ValueError("run series columns differ in length")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def columns(self) -> Dict[str, List[float]]:
        out = {"t": self.times, "norm": self.norm, "energy": self.energy}
        out.update(self.overlaps)
        return out


@dataclass(frozen=True)
class ScalingFit:
    dts: np.ndarray
    errors: np.ndarray
    exponent: float
    intercept: float
    r_squared: float

    def predict(self, dt):
        return np.exp(self.intercept) * np.asarray(dt) ** self.exponent


@dataclass(frozen=True)
class ErrorMeasures:
    w_overlap: float
    l2: float
    max_diff: float
    psi_overlap: Optional[float] = None

    def as_dict(self) -> Dict[str, float]:
        d = {"w_overlap": self.w_overlap, "l2": self.l2, "max_diff": self.max_diff}
        if self.psi_overlap is not None:
            d["psi_overlap"] = self.psi_overlap
        return d


def _same_grid(a: WignerState, b: WignerState):
    if a.grid != b.grid:
        raise ValueError("states live on different grids")


def overlap_wigner(a: WignerState, b: WignerState) -> float:
    """2 pi hbar * int a b dx dp; equals |<psi_a|psi_b>|^2 for pure states."""
    _same_grid(a, b)
    return float(2 * np.pi * a.grid.hbar * (a.xp * b.xp).sum() * a.grid.cell)


def error_measures(numeric, exact) -> ErrorMeasures:
    """W-overlap defect, L2 distance, max difference, and the psi defect when available.

    Wavefunctions are compared through their Wigner functions on ``grid`` built
    from the wavefunction axis, so all measures share one definition.
    """
    psi_def = None
    if isinstance(numeric, WaveFunction) and isinstance(exact, WaveFunction):
        psi_def = max(0.0, 1.0 - abs(exact.overlap(numeric)) ** 2)
        ax = numeric.axis
        theta = AxisGrid.centered(ax.n, 1.5 * ax.extent)
        grid = PhaseGrid(ax, theta, numeric.hbar)
        numeric = wigner_of_wavefunction(numeric, grid)
        exact = wigner_of_wavefunction(exact, grid)
    elif isinstance(numeric, WaveFunction) or isinstance(exact, WaveFunction):
        raise TypeError("compare like with like: two Wigner states or two wavefunctions")
    _same_grid(numeric, exact)
    d = exact.xp - numeric.xp
    w_def = 1.0 - overlap_wigner(exact, numeric)
    l2 = float(np.sqrt(2 * np.pi * exact.grid.hbar * (d * d).sum() * exact.grid.cell))
    return ErrorMeasures(w_def, l2, float(np.abs(d).max()), psi_def)


def fit_scaling(dts, errors, floor: float = ROUNDOFF_FLOOR) -> ScalingFit:
    """Least-squares slope of log(error) against log(dt).

    Points at or below ``floor`` are round-off dominated and dropped; at least
    four must remain.
    """
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if dts.shape != errors.shape:
        raise ValueError("dts and errors differ in length")
    if np.any(dts <= 0):
        raise ValueError("time steps must be positive")
    keep = errors > floor
    if keep.sum() < 4:
        raise ValueError(f"need at least 4 points above {floor:g}, have {int(keep.sum())}")
    res = stats.linregress(np.log(dts[keep]), np.log(errors[keep]))
    if not np.isfinite(res.slope):
        raise ValueError("non-finite fitted exponent")
    return ScalingFit(dts[keep], errors[keep], float(res.slope), float(res.intercept), float(res.rvalue ** 2))
