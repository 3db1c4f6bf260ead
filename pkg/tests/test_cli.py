import json
import time

import numpy as np
import pytest

from wetplan.cli import EXIT_CONFIG, EXIT_OK, main
from wetplan.core import default_scenario
from wetplan.eh_channel import path_gain
from wetplan.power_alloc import required_incident_power
from wetplan.sweep import CSV_COLUMNS, read_csv


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "scenario.cfg"
    p.write_text("num_devices = 64\nnum_beacons = 10\nseed = 3\n")
    return p


def write_batteries(path, values):
    path.write_text("battery_J\n" + "".join(f"{v!r}\n" for v in values))
    return path


def test_deploy_structure(cfg, tmp_path):
    out = tmp_path / "dep.json"
    assert main(["deploy", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert len(data["devices"]) == 64
    for tag in ("kmeans-mean", "k-chebyshev"):
        dep = data["deployments"][tag]
        assert len(dep["beacons"]) == 10 and len(dep["assignment"]) == 64


def test_deploy_prints_radius_table(cfg, tmp_path, capsys):
    main(["deploy", "--config", str(cfg), "--out", str(tmp_path / "d.json")])
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split() == ["cluster", "size", "r_mean_m", "r_cheb_m"]
    rows = [list(map(float, line.split())) for line in lines[1:]]
    assert len(rows) == 10
    assert all(r[3] <= r[2] + 1e-9 for r in rows)


def test_deploy_one_beacon_per_device(cfg, tmp_path):
    out = tmp_path / "dep.json"
    assert main(["deploy", "--config", str(cfg), "--num-beacons", "64", "--deployer", "chebyshev",
                 "--out", str(out)]) == EXIT_OK
    dep = json.loads(out.read_text())["deployments"]["k-chebyshev"]
    assert np.allclose(dep["radii"], 0.0)


def test_missing_config(tmp_path, capsys):
    assert main(["deploy", "--config", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG
    assert "config not found" in capsys.readouterr().err


def test_malformed_config_is_line_anchored(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("num_devices = 64\np_max = 4 J\n")
    assert main(["validate-config", "--config", str(p)]) == EXIT_CONFIG
    assert f"{p}:2:" in capsys.readouterr().err


def run_allocate(tmp_path, cfg, batteries, extra=()):
    dep = tmp_path / "dep.json"
    main(["deploy", "--config", str(cfg), "--out", str(dep)])
    bat = write_batteries(tmp_path / "bat.csv", batteries)
    out = tmp_path / "alloc.json"
    code = main(["allocate", "--config", str(cfg), "--deployment", str(dep), "--batteries", str(bat),
                 "--out", str(out), *extra])
    return code, (json.loads(out.read_text()) if code == EXIT_OK else None)


def test_allocate_full_batteries(tmp_path, cfg):
    code, out = run_allocate(tmp_path, cfg, [1.0] * 64)
    assert code == EXIT_OK
    for kind in ("lp", "approx"):
        assert out[kind]["powers_W"] == [0.0] * 10 and out[kind]["feasible"]


def test_allocate_single_device_closed_form(tmp_path):
    cfg = tmp_path / "one.cfg"
    cfg.write_text("devices = 2 2\nnum_beacons = 1\narea_width = 5 m\narea_height = 5 m\n")
    code, out = run_allocate(tmp_path, cfg, [0.1], ["--allocator", "lp"])
    assert code == EXIT_OK
    s = default_scenario(1, 1)
    # the single beacon sits on the device, so the gain is the d_min floor value
    expected = required_incident_power(0.1, s.e_th, s.slot_duration, s.eh) / path_gain(0.0, s.radio)
    assert out["lp"]["powers_W"][0] == pytest.approx(expected, rel=1e-12)


def test_allocate_unreachable_demand(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("num_devices = 20\nnum_beacons = 2\ncombined_gain = 1e-6\n")
    code, out = run_allocate(tmp_path, cfg, [0.0] * 20)
    assert code == EXIT_OK
    for kind in ("lp", "approx"):
        assert not out[kind]["feasible"]
        assert min(out[kind]["shortfall_J"]) > 0


def test_allocate_dimension_mismatch(tmp_path, cfg, capsys):
    code, _ = run_allocate(tmp_path, cfg, [0.5] * 63)
    assert code != EXIT_OK
    assert "63 rows" in capsys.readouterr().err


def write_sweep(tmp_path, text, name="sweep.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_sweep_row_count(tmp_path):
    spec = write_sweep(tmp_path, "swept_parameter = e_th\n"
                                 "values = 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45 J\n"
                                 "trials = 1\nslots = 2\n")
    out = tmp_path / "r.csv"
    assert main(["sweep", str(spec), "--out", str(out)]) == EXIT_OK
    rows = read_csv(out.read_text())
    assert len(rows) == 2 * 2 * 9
    assert out.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert json.loads(out.with_suffix(".json").read_text())["sweep"]["trials"] == 1


def test_sweep_power_ceiling(tmp_path):
    spec = write_sweep(tmp_path, "swept_parameter = num_beacons\nvalues = 2, 4, 6, 10, 15, 20\n"
                                 "trials = 3\nslots = 6\nallocators = lp\ne_th = 0.25 J\n")
    out = tmp_path / "r.csv"
    assert main(["sweep", "--config", str(spec), "--out", str(out)]) == EXIT_OK
    for r in read_csv(out):
        assert r["mean_sum_power_W"] <= r["swept_value"] * 4 + 1e-9


def test_sweep_smoke_under_a_second(tmp_path):
    spec = write_sweep(tmp_path, "swept_parameter = e_th\nvalues = 0.25\ntrials = 1\n"
                                 "allocators = lp\ndeployers = chebyshev\n")
    t0 = time.perf_counter()
    assert main(["sweep", str(spec), "--out", str(tmp_path / "r.csv")]) == EXIT_OK
    assert time.perf_counter() - t0 < 1.0


def test_sweep_csv_roundtrip_and_reproducible(tmp_path):
    spec = write_sweep(tmp_path, "swept_parameter = e_th\nvalues = 0.15, 0.35\ntrials = 2\nslots = 4\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", str(spec), "--out", str(a), "--seed", "4"])
    main(["sweep", str(spec), "--out", str(b), "--seed", "4"])
    assert a.read_bytes() == b.read_bytes()
    rows = read_csv(a)
    from wetplan.sweep import rows_to_csv
    assert rows_to_csv(rows) == a.read_text()


def test_sweep_overrides(tmp_path):
    spec = write_sweep(tmp_path, "swept_parameter = e_th\nvalues = 0.2, 0.3\ntrials = 5\n")
    out = tmp_path / "r.csv"
    main(["sweep", str(spec), "--trials", "1", "--slots", "2", "--allocator", "approx",
          "--deployer", "mean", "--out", str(out)])
    rows = read_csv(out)
    assert {(r["allocator"], r["deployer"], r["trials"]) for r in rows} == {("approx", "kmeans-mean", 1)}


@pytest.mark.parametrize(
    "text",
    [
        "swept_parameter = e_th\nvalues = 0.3, 0.2\n",
        "swept_parameter = p_max\nvalues = 1, 2\n",
        "swept_parameter = e_th\nvalues = 0.2\nallocators = greedy\n",
        "values = 0.2\n",
        "swept_parameter = e_th\nvalues = 0.2\ntrials = lots\n",
    ],
)
def test_invalid_sweep(tmp_path, text):
    spec = write_sweep(tmp_path, text)
    assert main(["sweep", str(spec)]) == EXIT_CONFIG
    assert main(["validate-config", "--spec", str(spec)]) == EXIT_CONFIG


def test_validate_config_ok(tmp_path, cfg, capsys):
    spec = write_sweep(tmp_path, f"swept_parameter = num_beacons\nvalues = 2, 4\nscenario = {cfg.name}\n")
    assert main(["validate-config", "--config", str(cfg), "--spec", str(spec)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "64 devices" in out and "num_beacons over 2 values" in out
