import csv
import math
import os
import socket
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("RVE_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="RVE_CLI not set")

REF = ["--ref-lat", "28.6", "--ref-lon", "-81.2", "--ref-h", "30"]


def rve(*args, cwd=None, check=True):
    proc = subprocess.run([CLI, *map(str, args)], cwd=cwd, capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"rve {' '.join(map(str, args))} exited {proc.returncode}:\n{proc.stderr}")
    return proc


def rows(path):
    with open(path, newline="") as f:
        return [r for r in csv.reader(f) if r and not r[0].startswith("#")]


def wgs84_ecef(lat, lon, h):
    a, f = 6378137.0, 1 / 298.257223563
    e2 = f * (2 - f)
    la, lo = math.radians(lat), math.radians(lon)
    n = a / math.sqrt(1 - e2 * math.sin(la) ** 2)
    return ((n + h) * math.cos(la) * math.cos(lo), (n + h) * math.cos(la) * math.sin(lo),
            (n * (1 - e2) + h) * math.sin(la))


@pytest.fixture(scope="module")
def grid100(tmp_path_factory):
    out = tmp_path_factory.mktemp("grid100")
    rve("gen", "grid", "--nodes", 100, "--spacing", 5, "--out", out)
    return out


# gen -------------------------------------------------------------------------

def test_gen_grid_writes_one_file_per_node(grid100):
    files = sorted(grid100.glob("node_*.csv"))
    assert len(files) == 100
    assert {f.name for f in files} == {f"node_{i}.csv" for i in range(100)}


def test_gen_disc_is_deterministic(tmp_path):
    for d in ("a", "b"):
        rve("gen", "disc", "--nodes", 50, "--radius", 150, "--seed", 7, "--out", tmp_path / d)
    a = sorted((tmp_path / "a").iterdir())
    assert len(a) == 50
    for f in a:
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_gen_grid_reports_footprint(tmp_path):
    out = rve("gen", "grid", "--nodes", 500, "--spacing", 2, "--out", tmp_path).stdout
    assert "footprint 60 x 34 m" in out


# convert ---------------------------------------------------------------------

def write_local(path, body):
    path.write_text("node_id,t,e,n,u,speed,heading\n" + body)
    return path


def test_convert_origin_echoes_reference(tmp_path):
    src = write_local(tmp_path / "local.csv", "0,0,0,0,0,0,90\n")
    out = rows_from_text(rve("convert", src, *REF).stdout)
    assert out[0] == ["node_id", "t", "lat", "lon", "height", "speed", "heading"]
    assert [float(x) for x in out[1][2:5]] == [28.6, -81.2, 30.0]


def rows_from_text(text):
    return list(csv.reader(text.splitlines()))


def test_convert_matches_ecef_oracle(tmp_path):
    src = write_local(tmp_path / "local.csv", "3,1.5,100,200,10,4,45\n")
    out = rows_from_text(rve("convert", src, *REF).stdout)
    lat, lon, h = (float(x) for x in out[1][2:5])
    # ECEF of ENU (100, 200, 10) about the reference, 50-digit arithmetic.
    want = (857452.12094764636518, -5538150.0812857012825, 3035246.7293704068948)
    got = wgs84_ecef(lat, lon, h)
    assert max(abs(g - w) for g, w in zip(got, want)) < 1e-3
    assert out[1][:2] == ["3", "1.5"]


def test_convert_round_trip(tmp_path):
    body = "".join(f"{i},{0.1 * i:g},{e},{n},{u},1,90\n"
                   for i, (e, n, u) in enumerate([(0, 0, 0), (-350.5, 12, 3), (1200, -800, -20), (5, 5, 90)]))
    src = write_local(tmp_path / "local.csv", body)
    geo = tmp_path / "geo.csv"
    rve("convert", src, "-o", geo, *REF)
    back = rows_from_text(rve("convert", geo, "--inverse", *REF).stdout)
    orig = rows_from_text(src.read_text())
    assert len(back) == len(orig)
    for a, b in zip(orig[1:], back[1:]):
        assert a[:2] == b[:2]
        for x, y in zip(a[2:5], b[2:5]):
            assert abs(float(x) - float(y)) < 1e-6


def test_convert_without_reference_is_usage_error(tmp_path):
    src = write_local(tmp_path / "local.csv", "0,0,0,0,0,0,90\n")
    assert rve("convert", src, check=False).returncode == 2


# split -----------------------------------------------------------------------

def test_split_geodetic_csv(tmp_path, grid100):
    merged = tmp_path / "merged.csv"
    lines = ["node_id,t,lat,lon,height,speed,heading"]
    for i in (0, 7, 42):
        lines += (grid100 / f"node_{i}.csv").read_text().splitlines()[1:3]
    merged.write_text("\n".join(lines) + "\n")
    out = tmp_path / "split"
    assert "3 files written" in rve("split", merged, "--out", out).stdout
    assert sorted(p.name for p in out.iterdir()) == ["node_0.csv", "node_42.csv", "node_7.csv"]


# sim -------------------------------------------------------------------------

def test_sim_defaults_give_400_windows(tmp_path, grid100):
    csv_path = tmp_path / "t.csv"
    rve("sim", "--scenario", grid100, "--csv", csv_path)
    data = rows(csv_path)
    assert data[0] == ["t_ms", "cbr", "per"]
    assert len(data) - 1 == 400
    assert float(data[1][0]) == 0 and float(data[-1][0]) == 39900


def test_sim_same_seed_same_bytes(tmp_path, grid100):
    for name in ("a.csv", "b.csv"):
        rve("sim", "--scenario", grid100, "--set", "SEED=11", "--set", "DURATION_S=5", "--csv", tmp_path / name)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sim_config_file_and_overrides(tmp_path, grid100):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# comment\nSCENARIO={grid100}\nDURATION_S=2\nSEED=3\n")
    printed = rve("sim", "-c", cfg, "--set", "SEED=4", "--print-config").stdout
    assert "SEED=4" in printed and "DURATION_S=2" in printed
    rve("sim", "-c", cfg, "--csv", tmp_path / "t.csv")
    assert len(rows(tmp_path / "t.csv")) - 1 == 20


@pytest.mark.parametrize("setting", ["SLOT_US=0", "JITTER_MODE=sometimes", "BOGUS=1", "TX_RATE_HZ=x"])
def test_sim_bad_config_exits_2(tmp_path, grid100, setting):
    proc = rve("sim", "--scenario", grid100, "--set", setting, "--csv", tmp_path / "t.csv", check=False)
    assert proc.returncode == 2
    assert proc.stderr.strip()


def test_sim_bad_config_file_line_exits_2(tmp_path, grid100):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("NODES=10\nthis line has no equals sign\n")
    proc = rve("sim", "-c", cfg, "--scenario", grid100, check=False)
    assert proc.returncode == 2
    assert "2" in proc.stderr


def test_sim_missing_scenario_exits_2(tmp_path):
    proc = rve("sim", "--scenario", tmp_path / "nowhere", "--csv", tmp_path / "t.csv", check=False)
    assert proc.returncode == 2
    assert "nowhere" in proc.stderr


def test_sim_writes_event_log(tmp_path, grid100):
    log = tmp_path / "events.txt"
    rve("sim", "--scenario", grid100, "--set", "DURATION_S=0.3", "--csv", tmp_path / "t.csv", "--log", log)
    text = log.read_text()
    assert text.startswith("CSMA/CA Communication Simulator\n")
    assert "(info) 100 log files loaded." in text


def parse_stream(text):
    out = []
    for line in text.splitlines():
        start, dur, status, ids = line.split(",")
        out.append((float(start), float(dur), status, [int(i) for i in ids.split(";")]))
    return out


def test_sim_realtime_stream(tmp_path, grid100):
    proc = rve("sim", "--scenario", grid100, "--set", "DURATION_S=1", "--realtime", "--speed", 4,
               "--csv", tmp_path / "rt.csv")
    recs = parse_stream(proc.stdout)
    assert recs
    assert all(s in ("success", "damaged", "captured") for _, _, s, _ in recs)
    assert all(s == "success" or len(ids) > 1 for _, _, s, ids in recs)
    assert [r[0] for r in recs] == sorted(r[0] for r in recs)
    # Streaming does not change the result.
    rve("sim", "--scenario", grid100, "--set", "DURATION_S=1", "--csv", tmp_path / "v.csv")
    assert (tmp_path / "rt.csv").read_bytes() == (tmp_path / "v.csv").read_bytes()


def test_sim_realtime_datagrams(tmp_path, grid100):
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.bind(("127.0.0.1", 0))
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, 1 << 22)
    sock.settimeout(5)
    port = sock.getsockname()[1]
    proc = rve("sim", "--scenario", grid100, "--set", "DURATION_S=0.5", "--realtime", "--speed", 5,
               "--udp", f"127.0.0.1:{port}", "--csv", tmp_path / "t.csv")
    lines = proc.stdout.splitlines(keepends=True)
    got = [sock.recv(4096).decode() for _ in lines]
    sock.close()
    assert got == lines


def test_sim_udp_requires_realtime(tmp_path, grid100):
    proc = rve("sim", "--scenario", grid100, "--udp", "127.0.0.1:9", "--csv", tmp_path / "t.csv", check=False)
    assert proc.returncode == 2


# plot ------------------------------------------------------------------------

def test_plot_single_csv_gives_two_svgs(tmp_path, grid100):
    rve("sim", "--scenario", grid100, "--set", "DURATION_S=3", "--csv", tmp_path / "t.csv")
    out = rve("plot", tmp_path / "t.csv", "--out", tmp_path / "fig").stdout.split()
    assert sorted(Path(p).name for p in out) == ["cbr.svg", "per.svg"]
    for name in ("cbr.svg", "per.svg"):
        svg = (tmp_path / "fig" / name).read_text()
        assert svg.startswith("<svg") or svg.startswith("<?xml")
        assert "time (s)" in svg


def test_plot_empty_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t_ms,cbr,per\n")
    assert rve("plot", empty, "--out", tmp_path, check=False).returncode == 0
    assert (tmp_path / "cbr.svg").exists() and (tmp_path / "per.svg").exists()


def test_plot_malformed_csv_names_row(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_ms,cbr,per\n0,0.1,0\n100,zz,0\n")
    proc = rve("plot", bad, "--out", tmp_path, check=False)
    assert proc.returncode == 1
    assert "3" in proc.stderr


def test_loss_model_lowers_per(tmp_path):
    scen = tmp_path / "scen"
    rve("gen", "grid", "--nodes", 300, "--spacing", 10, "--row-length", 20, "--duration", 10, "--out", scen)
    per = {}
    for model in ("off", "freespace"):
        path = tmp_path / f"{model}.csv"
        rve("sim", "--scenario", scen, "--set", "SEED=5", "--set", "DURATION_S=10",
            "--set", f"LOSS_MODEL={model}", "--csv", path)
        per[model] = [float(r[2]) for r in rows(path)[1:]]
    assert len(per["off"]) == len(per["freespace"]) == 100
    assert all(on <= off for on, off in zip(per["freespace"], per["off"]))
    assert sum(per["freespace"]) < sum(per["off"])
    svgs = rve("plot", tmp_path / "off.csv", tmp_path / "freespace.csv", "--out", tmp_path).stdout.split()
    assert len(svgs) == 2
    assert "freespace" in (tmp_path / "per.svg").read_text()


def test_cli_matches_library(tmp_path, grid100):
    core = pytest.importorskip("rve")
    rve("sim", "--scenario", grid100, "--set", "SEED=21", "--set", "DURATION_S=4", "--set", "LOSS_MODEL=freespace",
        "--csv", tmp_path / "cli.csv")
    cfg = core.EngineConfig()
    for key, value in (("SEED", "21"), ("DURATION_S", "4"), ("LOSS_MODEL", "freespace")):
        cfg.set(key, value)
    res, _ = core.run(cfg, core.load_trace_dir(str(grid100)))
    assert (tmp_path / "cli.csv").read_text() == res.csv_text()
