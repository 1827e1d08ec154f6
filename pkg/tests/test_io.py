import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chinsplit.diagnostics import RunSeries
from chinsplit.grid import make_phase_grid
from chinsplit.io import (ConfigError, RunConfig, SnapshotError, parse_config, read_schedule,
                          read_snapshot, write_manifest, write_schedule, write_snapshot)
from chinsplit.schemes import kerr_schedule
from chinsplit.states import coherent_wavefunction, coherent_wigner

BASE = "x0 = 1\np0 = 0.5\ndt = 1e-3\nt_final = 0.1\n"


def test_parse_defaults_and_comments():
    cfg = parse_config("# a run\n" + BASE + "scheme = U7  # trailing comment\n")
    assert cfg.scheme == "u7" and cfg.nx == 256 and cfg.picture == "wigner"
    assert cfg.nsteps == 100


@pytest.mark.parametrize("extra, msg", [
    ("colour = red\n", "unknown key"),
    ("dt = 2e-3\n", "duplicate"),
    ("nx = 100\n", "power of two"),
    ("scheme = rk4\n", "scheme"),
    ("snapshot_times = 0.5\n", "outside"),
    ("picture = schrodinger\nclassical_limit = true\n", "classical"),
    ("hbar = 0\n", "positive"),
    ("just text\n", "key = value"),
])
def test_config_errors(extra, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(BASE + extra)


def test_missing_mandatory_key():
    with pytest.raises(ConfigError, match="t_final"):
        parse_config("x0 = 1\np0 = 0\ndt = 1e-3\n")


def test_overrides_revalidate_and_digest_changes():
    cfg = parse_config(BASE)
    assert cfg.with_overrides(dt=None) == cfg
    other = cfg.with_overrides(dt=2e-3)
    assert other.digest() != cfg.digest() and other.nsteps == 50
    with pytest.raises(ConfigError):
        cfg.with_overrides(scheme="bogus")


def test_snapshot_steps_round_to_nearest():
    cfg = parse_config(BASE + "snapshot_times = 0, 0.05, 0.1\n")
    assert cfg.snapshot_steps() == [0, 50, 100]


@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 10))
def test_wigner_snapshot_round_trip(tmp_path_factory, x0, p0, t):
    g = make_phase_grid(32, 32, 16.0, 16.0)
    w = coherent_wigner(g, x0, p0, tol=1.0)
    path = write_snapshot(tmp_path_factory.mktemp("s") / "w.bin", w, t, "u9", {"k": 1})
    snap = read_snapshot(path)
    assert snap.header["time"] == t and snap.header["provenance"] == {"k": 1}
    assert np.array_equal(snap.data, w.xp)
    assert snap.state().grid == g


def test_wavefunction_snapshot_round_trip(tmp_path):
    g = make_phase_grid(64, 64, 16.0, 16.0)
    psi = coherent_wavefunction(g.x_axis, 1.0, 2.0)
    snap = read_snapshot(write_snapshot(tmp_path / "p.bin", psi))
    assert snap.header["kind"] == "psi-x"
    assert np.array_equal(snap.state().position, psi.position)


def test_snapshot_byte_layout(tmp_path):
    g = make_phase_grid(8, 8, 8.0, 8.0)
    path = write_snapshot(tmp_path / "w.bin", coherent_wigner(g, 0, 0, tol=np.inf))
    raw = path.read_bytes()
    assert raw[:8] == b"CHSNAP\x00\x01"
    hlen = int.from_bytes(raw[8:16], "little")
    assert len(raw) == 16 + hlen + 64 * 8


def test_truncated_and_padded_snapshots(tmp_path):
    g = make_phase_grid(8, 8, 8.0, 8.0)
    path = write_snapshot(tmp_path / "w.bin", coherent_wigner(g, 0, 0, tol=np.inf))
    raw = path.read_bytes()
    bad = tmp_path / "bad.bin"
    bad.write_bytes(raw[:-5])
    with pytest.raises(SnapshotError, match="payload bytes"):
        read_snapshot(bad)
    bad.write_bytes(raw[:12])
    with pytest.raises(SnapshotError, match="preamble"):
        read_snapshot(bad)
    bad.write_bytes(raw + b"\0")
    with pytest.raises(SnapshotError, match="trailing"):
        read_snapshot(bad)
    bad.write_bytes(b"NOTSNAP!" + raw[8:])
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(bad)


def test_manifest_is_deterministic_apart_from_wall_time(tmp_path):
    cfg = parse_config(BASE)
    s = RunSeries(fft_count=20)
    s.append(0.0, 1.0, 3.0, recurrence=0.0)
    s.append(0.1, 1.0, 3.0, recurrence=1e-3)
    a = write_manifest(tmp_path / "a.csv", s, cfg, {"wall_time": 1.0}).read_text().splitlines()
    b = write_manifest(tmp_path / "b.csv", s, cfg, {"wall_time": 2.0}).read_text().splitlines()
    diff = [x for x, y in zip(a, b) if x != y]
    assert diff == ["# wall_time = 1.0"]
    assert "t,norm,energy,recurrence" in a


def test_schedule_file_round_trip(tmp_path):
    for kind in ("u9", "u7"):
        blocks = kerr_schedule(kind)
        back = read_schedule(write_schedule(tmp_path / f"{kind}.json", blocks))
        assert [b.describe() for b in back] == [b.describe() for b in blocks]
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        read_schedule(tmp_path / "bad.json")
