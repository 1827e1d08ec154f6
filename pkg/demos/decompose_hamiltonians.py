"""Split nonseparable Hamiltonians into double-bracket Chin blocks.

The Kerr Hamiltonian's mixed part x^2 p^2 / 2 decomposes into one block with
generators p^2/(2 sqrt2) and x^4/12; that schedule then runs against the
exact Fock-basis solution.  A term like x p has no decomposition, which the
solver reports instead of guessing.
"""
import numpy as np

from chinsplit.decompose import decompose, hamiltonian_schedule, split_separable
from chinsplit.grid import make_phase_grid
from chinsplit.moyal import parse_polynomial
from chinsplit.oracle import exact_kerr_wigner
from chinsplit.schemes import KERR_HAMILTONIAN, generic_step
from chinsplit.states import coherent_wigner

t, mixed, v, const = split_separable(KERR_HAMILTONIAN)
print("T(p) =", t, "  V(x) =", v, "  mixed =", mixed, "  constant =", const)
print(decompose(mixed).report())
print()

sched = hamiltonian_schedule(KERR_HAMILTONIAN)
for b in sched:
    print(b.describe())

grid = make_phase_grid(128, 128, 20.0, 30.0)
w = coherent_wigner(grid, 2.0, 0.0)
dt, n = 1e-3, 500
num = generic_step(w, sched, dt, n)
ref = exact_kerr_wigner(grid, 2.0, 0.0, n * dt)
print(f"\nafter t = {n * dt}: max |W - W_exact| = {np.abs(num.xp - ref.xp).max():.2e}")

print()
for text in ("x^4 p^2 + hbar^2 x^2", "x p", "x^3 p^3 + x^2 p^2"):
    res = decompose(parse_polynomial(text))
    print(f"{text:22s} spanned: {res.ok}   residual: {res.residual}")
