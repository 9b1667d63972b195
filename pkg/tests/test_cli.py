import json
import math

import numpy as np
import pytest

from capregion.cli import main
from capregion.fileio import (
    load_placement,
    load_unicast,
    save_multicast,
    save_placement,
    save_unicast,
)
from capregion.network import grid_placement
from capregion.traffic import MulticastTraffic, UnicastTraffic


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out.strip().startswith("{") else out.out
    return code, report, out.err


@pytest.fixture
def workdir(tmp_path):
    placement = tmp_path / "placement.json"
    save_placement(grid_placement(16), placement)
    uc = tmp_path / "uc.json"
    save_unicast(
        UnicastTraffic.from_entries(16, [(u, (u + 1) % 16, 0.5) for u in range(16)]), uc
    )
    mc = tmp_path / "mc.json"
    save_multicast(MulticastTraffic(16, [(0, (1, 2, 3), 0.5), (4, (0, 5), 0.25)]), mc)
    return tmp_path


def test_place_grid_roundtrip(tmp_path, capsys):
    out = tmp_path / "p.json"
    code, report, _ = run_cli(capsys, "place", "--kind", "grid", "--n", "9", "--out", str(out))
    assert code == 0
    assert report["n"] == 9 and report["r_min"] == pytest.approx(1.0)
    assert load_placement(out).n == 9


def test_place_uniform_requires_seed(tmp_path, capsys):
    out = tmp_path / "p.json"
    code, _, err = run_cli(capsys, "place", "--kind", "uniform", "--n", "10", "--out", str(out))
    assert code == 2 and "seed" in err
    code, report, _ = run_cli(
        capsys, "place", "--kind", "uniform", "--n", "10", "--seed", "3", "--out", str(out)
    )
    assert code == 0
    a = load_placement(out).nodes
    run_cli(capsys, "place", "--kind", "uniform", "--n", "10", "--seed", "3", "--out", str(out))
    assert np.array_equal(a, load_placement(out).nodes)


def test_check_member(workdir, capsys):
    code, report, _ = run_cli(
        capsys, "check", "--placement", str(workdir / "placement.json"),
        "--traffic", str(workdir / "uc.json"), "--kind", "uc",
    )
    assert code == 0
    assert report["member"] is True
    assert report["rho_hat_star"] == pytest.approx(2.0)


def test_check_single_sink_example(workdir, capsys):
    # every node sends 1/(n-1) to a common sink: on the region boundary
    n = 16
    path = workdir / "sink.json"
    save_unicast(
        UnicastTraffic.from_entries(n, [(u, 3, 1 / (n - 1)) for u in range(n) if u != 3]),
        path,
    )
    code, report, _ = run_cli(
        capsys, "check", "--placement", str(workdir / "placement.json"),
        "--traffic", str(path), "--kind", "uc",
    )
    assert code == 0 and report["member"] is True
    assert report["rho_hat_star"] == pytest.approx(1.0)
    assert report["binding_cut"] == {"kind": "destination", "node": 3}


def test_check_infeasible_exits_one(workdir, capsys):
    path = workdir / "big.json"
    save_unicast(UnicastTraffic.from_entries(16, [(0, 1, 3.0)]), path)
    code, report, err = run_cli(
        capsys, "check", "--placement", str(workdir / "placement.json"),
        "--traffic", str(path), "--kind", "uc",
    )
    assert code == 1
    assert report["member"] is False and "not feasible" in err


def test_check_multicast(workdir, capsys):
    code, report, _ = run_cli(
        capsys, "check", "--placement", str(workdir / "placement.json"),
        "--traffic", str(workdir / "mc.json"), "--kind", "mc",
    )
    assert code == 0 and report["member"] is True


def test_check_zero_traffic_unbounded(workdir, capsys):
    path = workdir / "zero.json"
    save_unicast(UnicastTraffic(np.zeros((16, 16))), path)
    code, report, _ = run_cli(
        capsys, "check", "--placement", str(workdir / "placement.json"),
        "--traffic", str(path), "--kind", "uc",
    )
    assert code == 0 and report["rho_hat_star"] == "unbounded"


def test_bounds_report(workdir, capsys):
    code, report, _ = run_cli(
        capsys, "bounds", "--placement", str(workdir / "placement.json"),
        "--traffic", str(workdir / "uc.json"), "--alpha", "2", "--kind", "uc",
    )
    assert code == 0
    assert report["inner_factor"] == 0.5
    assert report["outer_factor"] == pytest.approx(math.log2(16**3))
    assert report["rho_interval"][0] == pytest.approx(1.0)
    assert len(report["cutset_values"]) == 16
    assert max(report["cutset_values"]) <= report["outer_factor"]


def test_bounds_hypothesis_violation_exits_two(tmp_path, capsys):
    placement = tmp_path / "small.json"
    save_placement(grid_placement(4), placement)
    traffic = tmp_path / "t.json"
    save_unicast(UnicastTraffic.from_entries(4, [(0, 1, 0.5)]), traffic)
    code, _, err = run_cli(
        capsys, "bounds", "--placement", str(placement),
        "--traffic", str(traffic), "--alpha", "2", "--kind", "uc",
    )
    assert code == 2 and "n >= 9" in err


def test_decompose_substochastic(workdir, capsys):
    code, report, _ = run_cli(capsys, "decompose", "--traffic", str(workdir / "uc.json"))
    assert code == 0
    weights = np.array(report["weights"])
    assert weights.sum() == pytest.approx(1.0)
    recon = np.zeros((16, 16))
    for perm, w in zip(report["schedules"], weights):
        recon[np.arange(16), perm] += w
    target = load_unicast(workdir / "uc.json").matrix
    assert (recon + 1e-9 >= target).all()


def test_decompose_scale_to_region(workdir, capsys):
    code, report, _ = run_cli(
        capsys, "decompose", "--traffic", str(workdir / "uc.json"), "--scale-to-region"
    )
    assert code == 0 and report["scaled_by"] == pytest.approx(2.0)


def test_decompose_oversubscribed_exits_one(workdir, capsys):
    path = workdir / "big.json"
    save_unicast(UnicastTraffic.from_entries(16, [(0, 1, 3.0)]), path)
    code, _, err = run_cli(capsys, "decompose", "--traffic", str(path))
    assert code == 1 and "infeasible" in err


def test_route_mc(workdir, capsys):
    code, report, _ = run_cli(
        capsys, "route-mc", "--placement", str(workdir / "placement.json"),
        "--traffic", str(workdir / "mc.json"), "--alpha", "4",
    )
    assert code == 0
    assert report["achieved_multiple"] >= report["inner_floor"] == 0.125
    assert report["uplink_load"][0] == pytest.approx(0.5)
    assert report["downlink_load"][1] == pytest.approx(0.5)


def test_route_mc_infeasible(workdir, capsys):
    path = workdir / "hot.json"
    save_multicast(MulticastTraffic(16, [(0, (1,), 2.0)]), path)
    code, _, err = run_cli(
        capsys, "route-mc", "--placement", str(workdir / "placement.json"),
        "--traffic", str(path), "--alpha", "2",
    )
    assert code == 1 and "binding cut" in err


def test_ia_demo(capsys):
    code, report, _ = run_cli(
        capsys, "ia-demo", "--n-pairs", "2", "--quantization", "4",
        "--seed", "7", "--horizon", "4000",
    )
    assert code == 0
    assert report["slot_pair"] is not None
    t1, t2 = report["slot_pair"]
    assert 0 <= t1 < t2 < 4000
    assert max(report["residual_interference"]) < 1e-12
    assert len(report["rates"]) == 2
    # the reported rate is (1/2) log2(1 + SNR) of the reported effective SNR
    for rate, snr in zip(report["rates"], report["effective_snr"]):
        assert snr == pytest.approx(2 ** (2 * rate) - 1, rel=1e-9)


def test_rayleigh_commands(workdir, capsys):
    code, report, _ = run_cli(
        capsys, "rayleigh", "--placement", str(workdir / "placement.json"),
        "--alpha", "2", "--slots", "30", "--seed", "5",
    )
    assert code == 0
    assert 0.0 <= report["idle_fraction"] <= 1.0
    assert report["slot_rate_floor"] == pytest.approx(
        0.5 * math.log2(1 + 0.5 * math.log(16))
    )
    code, report, _ = run_cli(
        capsys, "rayleigh-outer", "--n", "100", "--alpha", "4", "--rmin", "1.0"
    )
    assert code == 0
    assert report["g0"] >= 1 / (4 * 99)
    assert report["expected_power"] == pytest.approx(99, abs=1e-6)


def test_table_command(capsys):
    code, report, _ = run_cli(capsys, "table1", "--alpha", "4")
    assert code == 0
    assert report["row"] == "0.042 0.035 0.030 0.027"
    assert report["n"] == [100, 1000, 10000, 100000]


def test_table_pretty(capsys):
    code = main(["table1", "--alpha", "4", "--pretty"])
    out = capsys.readouterr().out
    assert code == 0
    assert "0.042 0.035 0.030 0.027" in out


def test_reports_deterministic_given_seed(workdir, capsys):
    def run_twice(*argv):
        main(list(argv))
        first = capsys.readouterr().out
        main(list(argv))
        return first, capsys.readouterr().out

    a, b = run_twice(
        "rayleigh", "--placement", str(workdir / "placement.json"),
        "--alpha", "2", "--slots", "10", "--seed", "21",
    )
    assert a == b
    a, b = run_twice(
        "ia-demo", "--n-pairs", "1", "--quantization", "4", "--seed", "2", "--horizon", "200"
    )
    assert a == b


def test_missing_file_exits_two(capsys):
    code, _, err = run_cli(
        capsys, "check", "--placement", "/nonexistent.json",
        "--traffic", "/also-missing.json", "--kind", "uc",
    )
    assert code == 2 and "not found" in err


def test_parse_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_cli(
        capsys, "check", "--placement", str(bad), "--traffic", str(bad), "--kind", "uc"
    )
    assert code == 2 and "JSON" in err


def test_mismatched_n_exits_two(workdir, tmp_path, capsys):
    small = tmp_path / "small_traffic.json"
    save_unicast(UnicastTraffic.from_entries(4, [(0, 1, 0.5)]), small)
    code, _, err = run_cli(
        capsys, "check", "--placement", str(workdir / "placement.json"),
        "--traffic", str(small), "--kind", "uc",
    )
    assert code == 2 and "n=16" in err
