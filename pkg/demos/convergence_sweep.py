"""Step-size sweep for the Kerr oscillator over one recurrence period.

For each dt the Wigner and Schrodinger runs are compared with the exact Fock
solution at t = pi; the log-log slopes are the measured convergence orders.

    python3 demos/convergence_sweep.py [u9|u7] [jobs]
"""
import os
import sys

from chinsplit.io import parse_config
from chinsplit.runner import fit_sweep, sweep

scheme = sys.argv[1] if len(sys.argv) > 1 else "u9"
jobs = int(sys.argv[2]) if len(sys.argv) > 2 else min(4, os.cpu_count() or 1)

a = 3 / 2 ** 0.5
cfg = parse_config(f"x0 = {a!r}\np0 = {a!r}\ndt = 1e-3\nt_final = 3.141592653589793\nscheme = {scheme}\n")
dts = [1e-3, 2e-3, 4e-3, 8e-3]
points = sweep(cfg, dts, jobs=jobs)

names = list(points[0].measures)
print(f"{'dt':>8} " + " ".join(f"{n:>11}" for n in names))
for p in points:
    print(f"{p.dt:8.0e} " + " ".join(f"{p.measures[n]:11.3e}" for n in names))
print()
for name, fit in fit_sweep(points).items():
    print(f"{name:12s} slope {fit.exponent:6.3f}   r^2 {fit.r_squared:.4f}")
