"""Split-operator propagation of nonseparable Hamiltonians via Chin compositions.

Wigner-picture (Bopp operator) and Schrodinger-picture propagators for
polynomial Hamiltonians, exact Moyal algebra over Q(sqrt2), a double-bracket
decomposer, exact Kerr references and scaling diagnostics.
"""
from .grid import AxisGrid, PhaseGrid, Rep, make_phase_grid, transform
from .moyal import (HBAR, ONE, P, X, PolynomialXP, Surd, moyal_bracket,
                    parse_polynomial, poisson_bracket, star_product)
from .states import (BoundaryError, WaveFunction, WignerState,
                     coherent_wavefunction, coherent_wigner,
                     wigner_of_wavefunction)
from .schemes import (DEFAULT_T2, KERR_HAMILTONIAN, ChinBlock, SchrodingerPropagator,
                      SplitScheme, WignerPropagator, effective_epsilon,
                      kerr_schedule, kerr_step_schrodinger, kerr_step_wigner,
                      u7_coefficients, u9_coefficients)
from .decompose import build_basis, decompose, schedule_from_decomposition
from .oracle import evolve_exact_kerr, fock_expand, matrix_rep
from .diagnostics import error_measures, fit_scaling, overlap_wigner

__version__ = "0.1.0"
