"""Splitting coefficients, Chin blocks and the Kerr propagators.

A *schedule* is a list of blocks.  Each block expands, for a given time step,
into stages ``(variable, polynomial, zeta)``; a stage stands for the unitary
``exp(zeta/hbar * f(op))`` on wavefunctions and for ``exp(zeta * G[f])`` on
Wigner functions, where ``G[f]`` is the hbar-scaled Bopp difference

    G[V](x, theta)  = (V(x - hbar theta/2) - V(x + hbar theta/2)) / hbar
    G[T](lambda, p) = (T(p + hbar lambda/2) - T(p - hbar lambda/2)) / hbar

Both forms are the same map ``rho -> U rho U^+`` and share all coefficients,
which is why the two pictures agree to grid accuracy.  Sending the hbar that
enters ``G`` to zero gives the Liouville (classical) propagator.

A Chin block with outer generator A (t-weights) and inner generator B
(v-weights) realises ``exp(-i dt c {{A, {{A, B}}}})`` to first order, with the
Moyal bracket taken in the Weyl picture.  Its stages use
``zeta = weight * (-i) * cbrt(c dt)``; the real cube root keeps every stage
unitary for either sign of ``c``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft as sfft

from .grid import PhaseGrid, Rep, bopp_difference
from .moyal import HBAR, P, X, PolynomialXP, kerr_generator_pair, moyal_bracket
from .states import BoundaryError, WaveFunction, WignerState

__all__ = [
    "SplitScheme", "GeneratorPair", "UnitarityError", "u9_coefficients",
    "u7_coefficients", "strang_coefficients", "scheme_by_name", "DEFAULT_T2",
    "effective_epsilon", "third_order_coefficients", "SeparableBlock",
    "ChinBlock", "PhaseBlock", "Stage", "kerr_schedule", "WignerPropagator",
    "SchrodingerPropagator", "kerr_step_wigner", "kerr_step_schrodinger",
    "generic_step", "harmonic_rotation_schedule", "KERR_HAMILTONIAN",
]

DEFAULT_T2 = -(6.0 ** (1.0 / 3.0))

KERR_HAMILTONIAN = (P ** 2 / 2 + X ** 2 / 2) ** 2 - HBAR ** 2 / 4


class UnitarityError(ValueError):
    """No purely imaginary effective step realises the requested term."""


@dataclass(frozen=True)
class SplitScheme:
    """Palindromic list of ``(slot, weight)`` with slot ``"T"`` or ``"V"``."""

    name: str
    factors: Tuple[Tuple[str, float], ...]
    order_generated: int
    t2: Optional[float] = None

    def weights(self, slot: str) -> List[float]:
        return [w for s, w in self.factors if s == slot]

    @property
    def is_palindromic(self) -> bool:
        return self.factors == tuple(reversed(self.factors))

    def __len__(self):
        return len(self.factors)

    @property
    def compensated(self) -> bool:
        return self.name == "u7"


def u9_coefficients(t2: float = DEFAULT_T2) -> SplitScheme:
    if t2 == 0:
        raise ValueError("t2 must be non-zero")
    t1 = -t2
    v1 = 1.0 / t2 ** 2
    v2 = -v1 / 2
    v0 = -2 * (v1 + v2)
    f = (("V", v2), ("T", t2), ("V", v1), ("T", t1), ("V", v0),
         ("T", t1), ("V", v1), ("T", t2), ("V", v2))
    return SplitScheme("u9", f, 3, t2)


def u7_coefficients(t2: float = DEFAULT_T2) -> SplitScheme:
    if t2 == 0:
        raise ValueError("t2 must be non-zero")
    t1 = -t2
    v1 = 1.0 / t2 ** 2
    v0 = -2 * v1
    f = (("T", t2), ("V", v1), ("T", t1), ("V", v0), ("T", t1), ("V", v1), ("T", t2))
    return SplitScheme("u7", f, 3, t2)


def strang_coefficients() -> SplitScheme:
    return SplitScheme("strang", (("V", 0.5), ("T", 1.0), ("V", 0.5)), 1)


def scheme_by_name(name: str, t2: float = DEFAULT_T2) -> SplitScheme:
    name = name.lower()
    if name == "u9":
        return u9_coefficients(t2)
    if name == "u7":
        return u7_coefficients(t2)
    if name == "strang":
        return strang_coefficients()
    raise ValueError(f"unknown scheme {name!r}")


def third_order_coefficients(kind: str):
    """Exact BCH data of a Chin scheme as sympy expressions in ``t2``.

    Expands the product of exponentials in the free algebra on T, V up to
    words of length three and returns ``(c_TTV, c_VVT)`` such that the scheme
    equals ``exp(eps^3 (c_TTV [T,[T,V]] + c_VVT [V,[V,T]]) + O(eps^4))``.
    Raises if the first- or second-order parts fail to vanish.
    """
    import sympy as sp
    t2 = sp.Symbol("t2", nonzero=True, real=True)
    t1 = -t2
    v1 = 1 / t2 ** 2
    if kind == "u9":
        v2 = -v1 / 2
        v0 = -2 * (v1 + v2)
        f = [("V", v2), ("T", t2), ("V", v1), ("T", t1), ("V", v0),
             ("T", t1), ("V", v1), ("T", t2), ("V", v2)]
    elif kind == "u7":
        v0 = -2 * v1
        f = [("T", t2), ("V", v1), ("T", t1), ("V", v0), ("T", t1), ("V", v1), ("T", t2)]
    else:
        raise ValueError(kind)
    # words as tuples; series of exp(w A) truncated at length 3
    prod = {(): sp.Integer(1)}
    for slot, w in f:
        term = {(): sp.Integer(1), (slot,): w, (slot, slot): w ** 2 / 2, (slot, slot, slot): w ** 3 / 6}
        new = {}
        for a, ca in prod.items():
            for b, cb in term.items():
                if len(a) + len(b) > 3:
                    continue
                new[a + b] = new.get(a + b, 0) + ca * cb
        prod = new
    prod = {k: sp.simplify(v) for k, v in prod.items()}
    for word, c in prod.items():
        if 0 < len(word) < 3 and c != 0:
            raise ArithmeticError(f"order-{len(word)} term {word} does not vanish")
    c_ttv = prod.get(("T", "T", "V"), 0)
    c_vvt = prod.get(("V", "V", "T"), 0)
    expect = {
        ("T", "T", "V"): c_ttv, ("T", "V", "T"): -2 * c_ttv, ("V", "T", "T"): c_ttv,
        ("V", "V", "T"): c_vvt, ("V", "T", "V"): -2 * c_vvt, ("T", "V", "V"): c_vvt,
    }
    for word, c in expect.items():
        if sp.simplify(prod.get(word, 0) - c) != 0:
            raise ArithmeticError(f"third-order word {word} is not a double commutator")
    return sp.simplify(c_ttv), sp.simplify(c_vvt), t2


def effective_epsilon(dt: float, hbar: float, prefactor: complex = None) -> complex:
    """Purely imaginary step ``e`` with ``e**3 = eps * prefactor``, ``eps = -i dt/hbar``.

    ``prefactor`` multiplies ``[T^, [T^, V^]]`` in the generator the block must
    realise; the default ``-1/hbar**2`` is the Kerr anticommutator block.
    """
    if prefactor is None:
        prefactor = -1.0 / hbar ** 2
    prefactor = complex(prefactor)
    if abs(prefactor.imag) > 1e-14 * max(1.0, abs(prefactor)):
        raise UnitarityError("complex prefactor: no purely imaginary effective step")
    # eps * prefactor = i * y with y real; (-i cbrt(y))**3 = i y
    y = -dt * prefactor.real / hbar
    return -1j * np.cbrt(y)


# -- schedule blocks -------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    var: str  # "x" or "p"
    symbol: PolynomialXP
    zeta: complex


def _variable(sym: PolynomialXP) -> str:
    if sym.depends_on_x() and sym.depends_on_p():
        raise ValueError(f"generator {sym} is not separable")
    return "p" if sym.depends_on_p() else "x"


@dataclass(frozen=True)
class SeparableBlock:
    """``exp(-i dt * weight * H)`` for a single-variable symbol H."""

    symbol: PolynomialXP
    weight: float = 1.0

    def stages(self, dt: float) -> List[Stage]:
        if not self.symbol or self.symbol.is_constant:
            return []
        return [Stage(_variable(self.symbol), self.symbol, -1j * dt * self.weight)]

    def describe(self) -> dict:
        return {"type": "separable", "symbol": str(self.symbol), "weight": self.weight}


@dataclass(frozen=True)
class PhaseBlock:
    """Constant Hamiltonian term; a global phase on wavefunctions only."""

    constant: PolynomialXP

    def stages(self, dt: float) -> List[Stage]:
        return []

    def phase(self, dt: float, hbar: float) -> complex:
        c0 = float(self.constant(0.0, 0.0, hbar))
        return complex(np.exp(-1j * dt * c0 / hbar))

    def describe(self) -> dict:
        return {"type": "phase", "constant": str(self.constant)}


@dataclass(frozen=True)
class GeneratorPair:
    """T depends on p only, V on x only; ``swapped`` puts V in the T slots."""

    T_symbol: PolynomialXP
    V_symbol: PolynomialXP
    swapped: bool = False

    def __post_init__(self):
        if self.T_symbol.depends_on_x() or self.V_symbol.depends_on_p():
            raise ValueError("T must depend on p only and V on x only")

    @property
    def outer(self) -> PolynomialXP:
        return self.V_symbol if self.swapped else self.T_symbol

    @property
    def inner(self) -> PolynomialXP:
        return self.T_symbol if self.swapped else self.V_symbol


@dataclass(frozen=True)
class ChinBlock:
    """Realises ``exp(-i dt * coeff * {{A, {{A, B}}}})`` with a Chin composition.

    ``outer`` (A) fills the T slots, ``inner`` (B) the V slots.  For the u7
    scheme the separable by-product ``-coeff/t2^3 {{B, {{B, A}}}}`` is removed
    by an extra stage, which must therefore depend on one variable only.
    """

    outer: PolynomialXP
    inner: PolynomialXP
    coeff: float = 1.0
    scheme: SplitScheme = field(default_factory=u9_coefficients)

    def target(self) -> PolynomialXP:
        return moyal_bracket(self.outer, moyal_bracket(self.outer, self.inner))

    def compensation(self) -> Optional[PolynomialXP]:
        """Hamiltonian term added to cancel the u7 defect (None for u9)."""
        if not self.scheme.compensated:
            return None
        byproduct = moyal_bracket(self.inner, moyal_bracket(self.inner, self.outer))
        return byproduct

    def stages(self, dt: float) -> List[Stage]:
        if self.coeff == 0:
            return []
        zeta0 = -1j * np.cbrt(self.coeff * dt)
        out = []
        for slot, w in self.scheme.factors:
            sym = self.outer if slot == "T" else self.inner
            out.append(Stage(_variable(sym), sym, w * zeta0))
        comp = self.compensation()
        if comp:
            # defect Hamiltonian is -coeff/t2^3 * comp; apply its negative
            weight = self.coeff / self.scheme.t2 ** 3
            out.append(Stage(_variable(comp), comp, -1j * dt * weight))
        return out

    def describe(self) -> dict:
        return {"type": "chin", "scheme": self.scheme.name, "t2": self.scheme.t2,
                "outer": str(self.outer), "inner": str(self.inner), "coeff": self.coeff}


def kerr_schedule(scheme: str = "u9", t2: float = DEFAULT_T2, pair: GeneratorPair | None = None) -> list:
    """p^4/4, the anticommutator block, x^4/4 (application order) plus phase."""
    sch = scheme_by_name(scheme, t2)
    if sch.name == "strang":
        raise ValueError("the Kerr anticommutator needs a Chin scheme (u9 or u7)")
    if pair is None:
        t, v = kerr_generator_pair()
        pair = GeneratorPair(t, v)
    block = ChinBlock(pair.outer, pair.inner, 1.0, sch)
    return [
        SeparableBlock(P ** 4 / 4),
        block,
        SeparableBlock(X ** 4 / 4),
        PhaseBlock(PolynomialXP.constant(0) - HBAR ** 2 / 4),
    ]


def harmonic_rotation_schedule(dt: float) -> list:
    """Strang palindrome V-T-V for H = (x^2 + p^2)/2 with shear weights.

    Weights tan(dt/2)/dt and sin(dt)/dt make the three linear shears compose
    to an exact rotation by dt (plain Strang has weights 1/2, 1, 1/2).
    """
    a = np.tan(dt / 2) / dt
    b = np.sin(dt) / dt
    v = X ** 2 / 2
    t = P ** 2 / 2
    return [SeparableBlock(v, a), SeparableBlock(t, b), SeparableBlock(v, a)]


def expand(schedule: Sequence, dt: float) -> List[Stage]:
    stages = []
    for blk in schedule:
        stages.extend(blk.stages(dt))
    return stages


def _merge(stages: List[Stage]) -> List[List[Stage]]:
    groups: List[List[Stage]] = []
    for st in stages:
        if groups and groups[-1][0].var == st.var:
            groups[-1].append(st)
        else:
            groups.append([st])
    return groups


# -- propagators -----------------------------------------------------------

class _Propagator:
    """Shared machinery: precomputed multipliers applied in natural FFT layout."""

    def __init__(self, schedule: Sequence, dt: float, hbar: float):
        self.schedule = list(schedule)
        self.dt = float(dt)
        self.hbar = hbar
        stages = expand(self.schedule, abs(self.dt))
        if self.dt < 0:
            # exact inverse of the forward step: reversed order, negated exponents
            stages = [Stage(s.var, s.symbol, -s.zeta) for s in reversed(stages)]
        self.groups = _merge(stages)
        self.fft_per_step = 2 * len(self.groups) if self.groups else 0
        self.phase = 1.0 + 0j
        for blk in self.schedule:
            if isinstance(blk, PhaseBlock):
                self.phase *= blk.phase(self.dt, hbar)
        self.multipliers = [self._multiplier(g) for g in self.groups]

    def _multiplier(self, group: List[Stage]) -> np.ndarray:
        expo = 0.0
        for st in group:
            expo = expo + st.zeta * self._symbol(st)
        if not np.all(np.isfinite(expo)):
            raise FloatingPointError("non-finite exponent in stage multiplier")
        return np.exp(expo)


class WignerPropagator(_Propagator):
    """Wigner-function stepper in the Bopp (x, theta) / (lambda, p) planes.

    ``classical=True`` evaluates the Bopp differences at hbar = 0, i.e. the
    Liouville generator, while everything else is unchanged.
    """

    def __init__(self, grid: PhaseGrid, schedule: Sequence, dt: float, classical: bool = False):
        if not (grid.x_axis.is_centered and grid.theta_axis.is_centered):
            raise ValueError("propagators require centred axes")
        self.grid = grid
        self.classical = classical
        self._h = 0.0 if classical else grid.hbar
        self._xt = grid.natural_mesh(Rep.XTHETA)
        self._lp = grid.natural_mesh(Rep.LAMBDAP)
        super().__init__(schedule, dt, grid.hbar)

    def _symbol(self, st: Stage) -> np.ndarray:
        coeffs = st.symbol.coefficients_1d(st.var, 0.0 if self.classical else self.grid.hbar)
        if st.var == "x":
            x, th = self._xt
            return bopp_difference(coeffs, x, th, self._h)
        lam, p = self._lp
        return -bopp_difference(coeffs, p, lam, self._h)

    def _to_lp(self, a):
        a = sfft.fft(a, axis=0, overwrite_x=True, workers=-1)
        return sfft.ifft(a, axis=1, overwrite_x=True, workers=-1)

    def _to_xt(self, a):
        a = sfft.ifft(a, axis=0, overwrite_x=True, workers=-1)
        return sfft.fft(a, axis=1, overwrite_x=True, workers=-1)

    def run(self, state: WignerState, nsteps: int, check_every: int = 0,
            callback=None, callback_every: int = 0) -> WignerState:
        """Advance ``nsteps`` steps.

        ``callback(step_index, state)`` is called every ``callback_every``
        steps with a state in the (x, theta) representation.
        """
        a = np.fft.ifftshift(state.to(Rep.XTHETA).data).copy()
        rep = "xt"
        for n in range(1, nsteps + 1):
            for grp, mult in zip(self.groups, self.multipliers):
                want = "xt" if grp[0].var == "x" else "lp"
                if want != rep:
                    a = self._to_xt(a) if want == "xt" else self._to_lp(a)
                    rep = want
                a *= mult
            need_cb = callback is not None and callback_every and n % callback_every == 0
            need_chk = check_every and n % check_every == 0
            if need_cb or need_chk:
                if rep != "xt":
                    a = self._to_xt(a)
                    rep = "xt"
                cur = WignerState(self.grid, np.fft.fftshift(a), Rep.XTHETA)
                if need_chk:
                    _check_boundary(cur)
                if need_cb:
                    callback(n, cur)
        if rep != "xt":
            a = self._to_xt(a)
        return WignerState(self.grid, np.fft.fftshift(a), Rep.XTHETA)

    def step(self, state: WignerState) -> WignerState:
        return self.run(state, 1)


def _check_boundary(state: WignerState, tol: float = 1e-8):
    if state.edge_max() > tol:
        raise BoundaryError(f"|W| = {state.edge_max():.3g} at the grid edge exceeds {tol}")


class SchrodingerPropagator(_Propagator):
    def __init__(self, axis, schedule: Sequence, dt: float, hbar: float = 1.0):
        if not axis.is_centered:
            raise ValueError("propagators require centred axes")
        self.axis = axis
        self._x = axis.natural_points
        self._p = hbar * 2 * np.pi * np.fft.fftfreq(axis.n, axis.step)
        super().__init__(schedule, dt, hbar)

    def _symbol(self, st: Stage) -> np.ndarray:
        coeffs = st.symbol.coefficients_1d(st.var, self.hbar)
        u = self._x if st.var == "x" else self._p
        return np.polynomial.polynomial.polyval(u, coeffs) / self.hbar

    def run(self, psi: WaveFunction, nsteps: int, callback=None, callback_every: int = 0) -> WaveFunction:
        a = np.fft.ifftshift(psi.position).copy()
        rep = "x"
        for n in range(1, nsteps + 1):
            for grp, mult in zip(self.groups, self.multipliers):
                want = grp[0].var
                if want != rep:
                    a = sfft.ifft(a, workers=-1) if want == "x" else sfft.fft(a, workers=-1)
                    rep = want
                a *= mult
            if self.phase != 1:
                a *= self.phase
            if callback is not None and callback_every and n % callback_every == 0:
                if rep != "x":
                    a = sfft.ifft(a)
                    rep = "x"
                callback(n, WaveFunction(self.axis, np.fft.fftshift(a), self.hbar))
        if rep != "x":
            a = sfft.ifft(a)
        return WaveFunction(self.axis, np.fft.fftshift(a), self.hbar)

    def step(self, psi: WaveFunction) -> WaveFunction:
        return self.run(psi, 1)


def kerr_step_wigner(state: WignerState, dt: float, scheme_kind: str = "u9",
                     t2: float = DEFAULT_T2, nsteps: int = 1) -> WignerState:
    prop = WignerPropagator(state.grid, kerr_schedule(scheme_kind, t2), dt)
    return prop.run(state, nsteps)


def kerr_step_schrodinger(psi: WaveFunction, dt: float, scheme_kind: str = "u9",
                          t2: float = DEFAULT_T2, nsteps: int = 1) -> WaveFunction:
    prop = SchrodingerPropagator(psi.axis, kerr_schedule(scheme_kind, t2), dt, psi.hbar)
    return prop.run(psi, nsteps)


def generic_step(state, schedule: Sequence, dt: float, nsteps: int = 1, classical: bool = False):
    """Run an arbitrary schedule (e.g. from the decomposer) on either picture."""
    if isinstance(state, WignerState):
        return WignerPropagator(state.grid, schedule, dt, classical).run(state, nsteps)
    if classical:
        raise ValueError("the classical switch applies to Wigner states only")
    return SchrodingerPropagator(state.axis, schedule, dt, state.hbar).run(state, nsteps)


def chin_matrix_product(scheme: SplitScheme, T: np.ndarray, V: np.ndarray, eps: complex) -> np.ndarray:
    """Dense product of the scheme's exponentials (left to right)."""
    from scipy.linalg import expm
    U = np.eye(T.shape[0], dtype=complex)
    for slot, w in scheme.factors:
        U = U @ expm(eps * w * (T if slot == "T" else V))
    return U


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
