"""Run configuration, snapshot files, schedule files and run manifests.

Config files are UTF-8 ``key = value`` lines with ``#`` comments.  Every key
is validated; unknown keys are errors.

Snapshot layout (all integers little-endian)::

    bytes 0-7    magic b"CHSNAP\\x00\\x01" (last byte = format version)
    bytes 8-15   uint64 header length H
    bytes 16..   H bytes of UTF-8 JSON header
    then         payload, float64 little-endian, row-major

The header declares ``kind`` ("wigner-xp": real W(x, p), shape (nx, np);
"psi-x": complex psi(x) stored as interleaved re/im pairs), ``shape``,
``dtype`` ("<f8"), the grid, time, scheme and provenance.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import struct
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .grid import AxisGrid, PhaseGrid, Rep
from .moyal import parse_polynomial
from .schemes import (DEFAULT_T2, ChinBlock, PhaseBlock, SeparableBlock,
                      scheme_by_name)
from .states import WaveFunction, WignerState

__all__ = [
    "ConfigError", "SnapshotError", "RunConfig", "parse_config", "load_config",
    "write_snapshot", "read_snapshot", "Snapshot", "write_manifest",
    "write_schedule", "read_schedule", "write_fit_table", "output_root", "OUTPUT_ROOT_ENV",
    "FORMAT_VERSION", "CODE_VERSION",
]

FORMAT_VERSION = 1
MAGIC = b"CHSNAP\x00" + bytes([FORMAT_VERSION])
CODE_VERSION = "0.1.0"
OUTPUT_ROOT_ENV = "CHINSPLIT_OUTPUT_ROOT"


class ConfigError(ValueError):
    pass


class SnapshotError(IOError):
    pass


@dataclass(frozen=True)
class RunConfig:
    x0: float
    p0: float
    dt: float
    t_final: float
    nx: int = 256
    ntheta: int = 256
    x_extent: float = 20.0
    theta_extent: float = 30.0
    hbar: float = 1.0
    scheme: str = "u9"
    t2: float = DEFAULT_T2
    snapshot_times: tuple = ()
    output_dir: str = "run"
    picture: str = "wigner"
    classical_limit: bool = False
    check_every: int = 100
    render: bool = False

    @property
    def nsteps(self) -> int:
        return int(round(self.t_final / self.dt))

    def snapshot_steps(self) -> List[int]:
        return sorted({int(round(t / self.dt)) for t in self.snapshot_times})

    def grid(self) -> PhaseGrid:
        return PhaseGrid(AxisGrid.centered(self.nx, self.x_extent),
                         AxisGrid.centered(self.ntheta, self.theta_extent), self.hbar)

    def with_overrides(self, **kw) -> "RunConfig":
        d = asdict(self)
        for k, v in kw.items():
            if v is not None:
                d[k] = v
        return _validated(d)

    def digest(self) -> str:
        """Hash of everything that affects the numbers (not where they are written)."""
        d = asdict(self)
        for k in ("output_dir", "render"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def resolved_output(self) -> Path:
        p = Path(self.output_dir)
        return p if p.is_absolute() else output_root() / p


MANDATORY = ("x0", "p0", "dt", "t_final")
_FIELDS = {f.name: f for f in fields(RunConfig)}


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "."))


def _as_bool(key, text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _as_number(key, text, kind):
    try:
        if kind is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {text!r}") from None


def _convert(key: str, text: str):
    text = text.strip()
    if key in ("nx", "ntheta", "check_every"):
        return _as_number(key, text, int)
    if key in ("classical_limit", "render"):
        return _as_bool(key, text)
    if key == "snapshot_times":
        if not text:
            return ()
        return tuple(_as_number(key, t, float) for t in text.replace(",", " ").split())
    if key in ("scheme", "picture", "output_dir"):
        return text
    return _as_number(key, text, float)


def _validated(d: Dict) -> RunConfig:
    for key in ("dt", "x_extent", "theta_extent", "hbar"):
        if not d[key] > 0:
            raise ConfigError(f"{key} must be positive, got {d[key]}")
    if not d["t_final"] >= 0:
        raise ConfigError(f"t_final must be non-negative, got {d['t_final']}")
    for key in ("nx", "ntheta"):
        n = d[key]
        if n < 4 or n & (n - 1):
            raise ConfigError(f"{key} must be a power of two >= 4, got {n}")
    if d["check_every"] < 0:
        raise ConfigError("check_every must be non-negative")
    d["scheme"] = d["scheme"].lower()
    if d["scheme"] not in ("u9", "u7", "strang"):
        raise ConfigError(f"scheme must be u9, u7 or strang, got {d['scheme']!r}")
    if d["t2"] == 0:
        raise ConfigError("t2 must be nonzero")
    d["picture"] = d["picture"].lower()
    if d["picture"] not in ("wigner", "schrodinger"):
        raise ConfigError(f"picture must be wigner or schrodinger, got {d['picture']!r}")
    if d["classical_limit"] and d["picture"] != "wigner":
        raise ConfigError("classical_limit requires the wigner picture")
    times = tuple(float(t) for t in d["snapshot_times"])
    for t in times:
        if t < 0 or t > d["t_final"] + 1e-12:
            raise ConfigError(f"snapshot time {t} outside [0, t_final]")
    d["snapshot_times"] = times
    return RunConfig(**d)


def parse_config(text: str) -> RunConfig:
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, val)
    missing = [k for k in MANDATORY if k not in values]
    if missing:
        raise ConfigError(f"missing mandatory keys: {', '.join(missing)}")
    d = {f.name: f.default for f in fields(RunConfig) if f.name not in MANDATORY}
    d.update(values)
    return _validated(d)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not valid UTF-8") from exc
    return parse_config(text)


# -- snapshots -------------------------------------------------------------

@dataclass
class Snapshot:
    header: dict
    data: np.ndarray

    def state(self):
        """Rebuild the WignerState or WaveFunction stored in the file."""
        h = self.header
        g = h["grid"]
        xa = AxisGrid(g["nx"], g["x_min"], g["dx"])
        if h["kind"] == "psi-x":
            return WaveFunction(xa, self.data, g["hbar"])
        grid = PhaseGrid(xa, AxisGrid(g["ntheta"], g["theta_min"], g["dtheta"]), g["hbar"])
        return WignerState(grid, self.data, Rep.XP)


def _grid_header(axis: AxisGrid, theta: Optional[AxisGrid], hbar: float) -> dict:
    d = {"nx": axis.n, "x_min": axis.min, "dx": axis.step, "hbar": hbar}
    if theta is not None:
        d.update({"ntheta": theta.n, "theta_min": theta.min, "dtheta": theta.step})
    return d


def write_snapshot(path, state, time: float = 0.0, scheme: str = "", provenance: Optional[dict] = None) -> Path:
    path = Path(path)
    if isinstance(state, WignerState):
        arr = np.ascontiguousarray(state.xp, dtype="<f8")
        kind = "wigner-xp"
        grid = _grid_header(state.grid.x_axis, state.grid.theta_axis, state.grid.hbar)
    elif isinstance(state, WaveFunction):
        z = np.ascontiguousarray(state.position, dtype=complex)
        arr = np.ascontiguousarray(np.stack([z.real, z.imag], axis=-1), dtype="<f8")
        kind = "psi-x"
        grid = _grid_header(state.axis, None, state.hbar)
    else:
        raise TypeError(f"cannot snapshot {type(state).__name__}")
    header = {
        "format_version": FORMAT_VERSION, "kind": kind, "shape": list(arr.shape),
        "dtype": "<f8", "endianness": "little", "order": "C", "grid": grid,
        "time": float(time), "scheme": scheme, "code_version": CODE_VERSION,
        "provenance": provenance or {},
    }
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(hb)))
        fh.write(hb)
        fh.write(arr.tobytes(order="C"))
    return path


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    size = len(raw)
    if size < 16:
        raise SnapshotError(f"{path}: truncated; bytes {size}-15 of the fixed preamble are missing")
    if raw[:7] != MAGIC[:7]:
        raise SnapshotError(f"{path}: not a snapshot file (bad magic)")
    if raw[7] != FORMAT_VERSION:
        raise SnapshotError(f"{path}: unsupported format version {raw[7]}")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    hend = 16 + hlen
    if size < hend:
        raise SnapshotError(f"{path}: truncated; header bytes {size}-{hend - 1} are missing")
    try:
        header = json.loads(raw[16:hend].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"{path}: corrupt header ({exc})") from None
    if header.get("dtype") != "<f8" or header.get("endianness") != "little":
        raise SnapshotError(f"{path}: unsupported element type {header.get('dtype')}")
    shape = tuple(int(s) for s in header["shape"])
    nbytes = int(np.prod(shape)) * 8
    end = hend + nbytes
    if size < end:
        raise SnapshotError(f"{path}: truncated; payload bytes {size}-{end - 1} are missing")
    if size > end:
        raise SnapshotError(f"{path}: {size - end} unexpected trailing bytes")
    data = np.frombuffer(raw[hend:end], dtype="<f8").reshape(shape).astype(float)
    if header["kind"] == "psi-x":
        data = data[:, 0] + 1j * data[:, 1]
    elif header["kind"] != "wigner-xp":
        raise SnapshotError(f"{path}: unknown snapshot kind {header['kind']!r}")
    return Snapshot(header, data)


# -- manifests -------------------------------------------------------------

def write_manifest(path, series, config: Optional[RunConfig] = None, timing: Optional[dict] = None,
                   final: Optional[dict] = None) -> Path:
    """Summary block of ``# key = value`` lines followed by the CSV table.

    Everything except the ``wall_time`` line is a function of the config alone.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    series.validate()
    cols = series.columns()
    summary = {"code_version": CODE_VERSION, "rows": len(series), "fft_per_step": series.fft_count}
    if config is not None:
        summary["config_digest"] = config.digest()
        summary["scheme"] = config.scheme
        summary["dt"] = config.dt
    for k, v in (final or {}).items():
        summary[f"final_{k}"] = v
    for k, v in (timing or {}).items():
        summary[k] = v
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k, v in summary.items():
            fh.write(f"# {k} = {_fmt(v)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_fit_table(path, fits: Dict[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["measure", "exponent", "intercept", "r_squared", "points"])
        for name, fit in fits.items():
            w.writerow([name, repr(fit.exponent), repr(fit.intercept), repr(fit.r_squared), len(fit.dts)])
    return path


# -- schedule files --------------------------------------------------------

def write_schedule(path, blocks: Sequence) -> Path:
    """JSON list of block records; polynomials are stored in parser syntax."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    recs = [b.describe() for b in blocks]
    path.write_text(json.dumps({"format_version": FORMAT_VERSION, "blocks": recs}, indent=2) + "\n",
                    encoding="utf-8")
    return path


def read_schedule(path) -> list:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: corrupt schedule file ({exc})") from None
    out = []
    for rec in doc.get("blocks", []):
        t = rec.get("type")
        if t == "separable":
            out.append(SeparableBlock(parse_polynomial(rec["symbol"]), float(rec["weight"])))
        elif t == "phase":
            out.append(PhaseBlock(parse_polynomial(rec["constant"])))
        elif t == "chin":
            sch = scheme_by_name(rec["scheme"], float(rec["t2"]))
            out.append(ChinBlock(parse_polynomial(rec["outer"]), parse_polynomial(rec["inner"]),
                                 float(rec["coeff"]), sch))
        else:
            raise ConfigError(f"{path}: unknown block type {t!r}")
    return out
