"""Command-line front end: propagate, scaling, decompose, render.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical alarm
(boundary mass, overflow, no unitary step), 4 I/O failure, 5 target not
spanned by the double-bracket basis.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .decompose import decompose, schedule_from_decomposition
from .io import (ConfigError, SnapshotError, load_config, output_root,
                 read_snapshot, write_schedule)
from .moyal import PolynomialSyntaxError, parse_polynomial
from .schemes import UnitarityError
from .states import BoundaryError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO, EXIT_UNSPANNED = 0, 2, 3, 4, 5


def _overrides(args) -> dict:
    return {"scheme": getattr(args, "scheme", None), "t2": getattr(args, "t2", None),
            "dt": getattr(args, "dt", None), "t_final": getattr(args, "t_final", None),
            "picture": getattr(args, "picture", None),
            "classical_limit": True if getattr(args, "classical", False) else None,
            "output_dir": getattr(args, "out", None)}


def cmd_propagate(args) -> int:
    from .runner import run
    cfg = load_config(args.config).with_overrides(**_overrides(args))
    if cfg.scheme == "strang" and args.hamiltonian == "kerr":
        raise ConfigError("the Kerr anticommutator needs a Chin scheme (u9 or u7)")
    out = cfg.resolved_output()
    res = run(cfg, out, hamiltonian=args.hamiltonian)
    print(f"steps: {cfg.nsteps}  fft/step: {res.series.fft_count}  wall: {res.wall_time:.2f}s")
    for k, v in res.final.items():
        print(f"{k}: {v:.6g}")
    for p in res.snapshots:
        print(f"snapshot: {p}")
    print(f"manifest: {res.manifest}")
    if args.render or cfg.render:
        if res.snapshots and cfg.picture == "wigner":
            for p in render_series(res.snapshots, out):
                print(f"image: {p}")
    return EXIT_OK


def cmd_scaling(args) -> int:
    from .runner import fit_sweep, sweep
    cfg = load_config(args.config).with_overrides(**_overrides(args))
    dts = [float(s) for s in args.dts.split(",")]
    if len(dts) < 4:
        raise ConfigError("a scaling fit needs at least 4 step sizes")
    if any(d <= 0 for d in dts):
        raise ConfigError("step sizes must be positive")
    out = cfg.resolved_output()
    points = sweep(cfg, dts, jobs=args.jobs, alarm=args.alarm)
    fits = fit_sweep(points, out)
    print(f"{'dt':>10} " + " ".join(f"{k:>12}" for k in points[0].measures))
    for p in points:
        print(f"{p.dt:10.3g} " + " ".join(f"{v:12.4g}" for v in p.measures.values()))
    for name, f in fits.items():
        print(f"{name:12s} exponent {f.exponent:.3f}  r^2 {f.r_squared:.3f}")
    print(f"written: {out / 'sweep.csv'} {out / 'fits.csv'}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    try:
        target = parse_polynomial(args.polynomial)
    except PolynomialSyntaxError as exc:
        raise ConfigError(str(exc)) from None
    res = decompose(target, args.bracket)
    print(res.report())
    if not res.ok:
        print("target is not spanned; no schedule written", file=sys.stderr)
        return EXIT_UNSPANNED
    if args.out:
        blocks = schedule_from_decomposition(res, args.hbar, args.scheme, args.t2)
        path = Path(args.out)
        if not path.is_absolute():
            path = output_root() / path
        write_schedule(path, blocks)
        print(f"schedule: {path} ({len(blocks)} blocks)")
    return EXIT_OK


def render_series(paths, out_dir, vmax=None):
    """One PNG per snapshot; a single symmetric colour scale for the series."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    snaps = [read_snapshot(p) for p in paths]
    for p, s in zip(paths, snaps):
        if s.header["kind"] != "wigner-xp":
            raise SnapshotError(f"{p}: only Wigner snapshots can be rendered")
    if vmax is None:
        vmax = max(float(np.abs(s.data).max()) for s in snaps) or 1.0
    # one viewing window for the whole series: where any frame exceeds 1e-3 vmax
    occupied = np.zeros_like(np.abs(snaps[0].data), dtype=bool)
    for s in snaps:
        if s.data.shape == occupied.shape:
            occupied |= np.abs(s.data) > 1e-3 * vmax
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for p, s in zip(paths, snaps):
        st = s.state()
        x, pp = st.grid.x_axis.points, st.grid.p_axis.points
        fig, ax = plt.subplots(figsize=(5, 4.2))
        im = ax.imshow(s.data.T, origin="lower", cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                       extent=(x[0], x[-1], pp[0], pp[-1]), aspect="auto", interpolation="nearest")
        ax.set_xlabel("x")
        ax.set_ylabel("p")
        ax.set_title(f"t = {s.header['time']:.3f}")
        if occupied.any() and occupied.shape == s.data.shape:
            ix = np.flatnonzero(occupied.any(axis=1))
            ip = np.flatnonzero(occupied.any(axis=0))
            mx = 0.1 * (x[ix[-1]] - x[ix[0]]) + 0.5
            mp = 0.1 * (pp[ip[-1]] - pp[ip[0]]) + 0.5
            ax.set_xlim(max(x[0], x[ix[0]] - mx), min(x[-1], x[ix[-1]] + mx))
            ax.set_ylim(max(pp[0], pp[ip[0]] - mp), min(pp[-1], pp[ip[-1]] + mp))
        fig.colorbar(im, ax=ax, label="W(x, p)")
        fig.tight_layout()
        target = out_dir / (Path(p).stem + ".png")
        fig.savefig(target, dpi=110)
        plt.close(fig)
        written.append(target)
    return written


def cmd_render(args) -> int:
    out = Path(args.out) if args.out else Path(args.snapshots[0]).parent
    for p in render_series(args.snapshots, out, args.vmax):
        print(f"image: {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chinsplit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def scheme_flags(p):
        p.add_argument("--scheme", choices=("u9", "u7", "strang"), help="splitting scheme")
        p.add_argument("--t2", type=float, help="free Chin parameter (default -6^(1/3))")

    p = sub.add_parser("propagate", help="run one configured propagation")
    p.add_argument("config", help="key = value run configuration file")
    scheme_flags(p)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--picture", choices=("wigner", "schrodinger"))
    p.add_argument("--classical", action="store_true", help="hbar -> 0 in the Bopp generators")
    p.add_argument("--hamiltonian", choices=("kerr", "harmonic"), default="kerr")
    p.add_argument("--out", help="output directory (relative to $CHINSPLIT_OUTPUT_ROOT)")
    p.add_argument("--render", action="store_true", help="also write PNG heatmaps")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("scaling", help="dt sweep and scaling exponents")
    p.add_argument("config")
    scheme_flags(p)
    p.add_argument("--dts", default="1e-3,2e-3,4e-3,8e-3", help="comma-separated step sizes")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p.add_argument("--alarm", action="store_true", help="abort on the edge alarm instead of reporting edge_max")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("decompose", help="double-bracket decomposition of a polynomial")
    p.add_argument("polynomial", help="e.g. 'x^2 p^2' or '1/2 x^2 p^2 - hbar^2/4'")
    p.add_argument("--bracket", choices=("moyal", "poisson"), default="moyal")
    p.add_argument("--out", help="write a schedule file here")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--scheme", choices=("u9", "u7"), default="u9")
    p.add_argument("--t2", type=float, default=None)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("render", help="heatmaps of Wigner snapshots")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--out", help="image directory (default: next to the first snapshot)")
    p.add_argument("--vmax", type=float, help="colour scale half-width (default: series max)")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "decompose" and args.t2 is None:
        from .schemes import DEFAULT_T2
        args.t2 = DEFAULT_T2
    try:
        return args.func(args)
    except (ConfigError, PolynomialSyntaxError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundaryError, FloatingPointError, UnitarityError) as exc:
        print(f"numerical alarm: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SnapshotError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
