"""End-to-end drivers: quench, verification battery, scans, compile dump."""

import json
import os

import numpy as np
import pytest

from zngauge.algebra import make_link_algebra
from zngauge.config import SimulationConfig
from zngauge.drivers import (
    CheckResult,
    flux_sector_probabilities,
    measure_configuration,
    run_compile,
    run_optical_scan,
    run_quench,
    run_trotter_scan,
    run_verification_suite,
    write_csv,
)
from zngauge.lattice import apply_gate, build_global_singlet

EXPECTED_CHECKS = [
    "algebra_closure",
    "stator_eigenoperator",
    "gauging_equivalence",
    "gauge_matter_conjugation",
    "per_substep_gauge_invariance",
    "ancilla_restoration",
    "collision_calibration",
    "trotter_slope_order1",
    "trotter_slope_order2",
    "bound_dominance",
    "optical_orthogonality",
]


@pytest.fixture(scope="module")
def verify_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify")
    all_pass, checks = run_verification_suite(SimulationConfig(), str(out))
    return out, all_pass, checks


def test_flux_probabilities_on_singlet(layout22):
    st = build_global_singlet(layout22)
    dist = flux_sector_probabilities(st)[(0, 0)]
    np.testing.assert_allclose(dist, [1.0, 0.0, 0.0], atol=1e-12)
    # raising one positively oriented link moves the whole weight to label 1
    alg = make_link_algebra(3)
    raised = apply_gate(st, alg.q, [layout22.link_index(((0, 0), 1))])
    dist1 = flux_sector_probabilities(raised)[(0, 0)]
    np.testing.assert_allclose(dist1, [0.0, 1.0, 0.0], atol=1e-12)


def test_measure_configuration_dirac_sea(layout22):
    st = build_global_singlet(layout22)
    sample = measure_configuration(st, seed=5, shots=40)
    assert sample["occupation"].shape == (40, 4)
    assert sample["flux"].shape == (40, 4)
    assert sample["vertices"] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    # the singlet is a product state in the measured basis
    assert np.all(sample["occupation"] == np.array([0, 1, 1, 0]))
    assert np.all(sample["flux"] == 0)
    again = measure_configuration(st, seed=5, shots=40)
    assert np.array_equal(sample["occupation"], again["occupation"])


def test_quench_row_contents(tmp_path):
    cfg = SimulationConfig(n_steps=3, T=0.3)
    out = tmp_path / "q"
    rows = run_quench(cfg, str(out), shots=25)
    assert len(rows) == 3
    row = rows[-1]
    assert row["step"] == 3
    assert row["time"] == pytest.approx(0.3)
    assert row["gauss_max_deviation"] < 1e-10
    assert row["fermion_number"] == pytest.approx(2.0, abs=1e-9)
    assert row["ancilla_restoration"] == pytest.approx(1.0, abs=1e-10)
    assert 0.9 < row["fidelity_exact"] <= 1.0 + 1e-12
    assert row["gauss_re_0_0"] == pytest.approx(1.0, abs=1e-10)
    assert sum(row[f"flux_0_0_m{m}"] for m in range(3)) == pytest.approx(1.0, abs=1e-9)

    traj = (out / "trajectory.csv").read_text().strip().split("\n")
    assert len(traj) == 4
    header = traj[0].split(",")
    assert header[:5] == ["step", "time", "gauss_max_deviation",
                          "fermion_number", "ancilla_restoration"]
    meas = (out / "measurements.csv").read_text().strip().split("\n")
    assert len(meas) == 26
    assert meas[0] == ("occ_0_0,occ_0_1,occ_1_0,occ_1_1,"
                       "link_0_0_1,link_0_0_2,link_0_1_1,link_1_0_2")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["driver"] == "quench"
    assert manifest["shots"] == 25
    assert manifest["config"]["n_steps"] == 3


def test_quench_default_config_frozen_fidelity():
    rows = run_quench(SimulationConfig())
    assert rows[-1]["fidelity_exact"] == pytest.approx(0.995049223, abs=1e-6)


def test_quench_with_interactions_off():
    cfg = SimulationConfig(lambda_e=0.0, lambda_b=0.0, lambda_gm=0.0,
                           mass=0.0, n_steps=2)
    rows = run_quench(cfg)
    for row in rows:
        assert row["gauss_max_deviation"] < 1e-12
        assert row["fidelity_exact"] > 1 - 1e-12


def test_csv_float_formatting(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(str(path), ["a", "b"], [[1.0 / 3.0, 7], [1.23456789012345e-17, "s"]])
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "a,b"
    token = lines[1].split(",")[0]
    assert token == "%.12g" % (1.0 / 3.0)
    assert float(token) == pytest.approx(1.0 / 3.0, rel=1e-11)
    assert lines[2] == "1.23456789012e-17,s"


def test_check_result_line():
    line = CheckResult("algebra_closure", True, 3.2e-15, 1e-12).line()
    assert line == "[PASS] algebra_closure: residual 3.200e-15 (tol 1.0e-12)"
    assert CheckResult("x", False, 1.0, 0.5).line().startswith("[FAIL]")


def test_verification_suite_all_green(verify_run):
    _, all_pass, checks = verify_run
    assert [c.name for c in checks] == EXPECTED_CHECKS
    failures = [c.line() for c in checks if not c.passed]
    assert all_pass, failures
    for c in checks:
        assert c.residual < c.threshold


def test_verification_suite_files(verify_run):
    out, _, checks = verify_run
    text = (out / "verification.txt").read_text()
    assert text.count("[PASS]") == len(checks)
    assert text.strip().endswith("overall: PASS")
    slopes = (out / "trotter_slopes.csv").read_text().strip().split("\n")
    assert slopes[0].startswith("order,slope,err_M4")
    assert len(slopes) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["driver"] == "verify"
    assert manifest["version"]


def test_trotter_scan_rows(tmp_path):
    cfg = SimulationConfig(mode="direct")
    out = tmp_path / "scan"
    rows = run_trotter_scan(cfg, str(out))
    assert [r["n_steps"] for r in rows] == [4, 8, 16, 32, 64]
    dists = [r["distance"] for r in rows]
    assert all(d2 < d1 for d1, d2 in zip(dists, dists[1:]))
    for r in rows:
        assert r["distance"] <= r["bound"]
        assert r["gate_count"] == 29
        assert r["bound_valid"] in (0, 1)
    assert rows[-1]["bound_valid"] == 1
    scan = (out / "trotter_scan.csv").read_text().strip().split("\n")
    assert scan[0] == "n_steps,tau,distance,bound,bound_valid,gate_count"
    assert len(scan) == 6


def test_optical_scan_outputs(tmp_path):
    out = tmp_path / "opt"
    rows = run_optical_scan(SimulationConfig(), str(out))
    assert len(rows) == 15
    for r in rows:
        assert r["valid"] == 1
        assert r["max_cross_dot"] < 1e-8
        assert r["max_transversal_dot"] < 1e-8
    minima = (out / "standard_minima.csv").read_text().strip().split("\n")
    assert len(minima) == 5  # header plus the four lattice sites
    for step in ("eh", "oh", "ev", "ov"):
        assert (out / f"shaping_{step}.csv").exists()
    assert (out / "polarization_scan.csv").exists()


def test_run_compile_dump(tmp_path):
    cfg = SimulationConfig()
    text = run_compile(cfg)
    assert text == run_compile(cfg)
    lines = text.strip().split("\n")
    assert len(lines) == 98
    out = tmp_path / "c"
    run_compile(cfg, str(out))
    assert (out / "schedule.txt").read_text() == text
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["gate_count"] == 89
    assert manifest["gate_count_with_idles"] == 98
