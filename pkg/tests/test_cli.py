import json
import subprocess
import sys

import numpy as np
import pytest

from hkreduce import cli, coords

REPORT_KEYS = ["potential", "system", "tolerance", "per_point", "sup_norm", "pass", "detected_scale"]


def run(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = cli.main(list(args) + ["--out", str(out)])
    doc = json.loads(out.read_text()) if out.exists() else None
    return code, doc


def write_points(tmp_path, coords_tag, points, name="pts.json", **extra):
    p = tmp_path / name
    p.write_text(json.dumps({"coords": coords_tag, "points": points, **extra}))
    return str(p)


def test_verify_flat_H_default_grid(tmp_path):
    code, doc = run(tmp_path, "verify", "--potential", "flat-H", "--system", "reduced")
    assert code == 0
    assert list(doc) == REPORT_KEYS
    assert len(doc["per_point"]) == 1000
    assert doc["sup_norm"] <= 1e-13 and doc["pass"] is True
    assert list(doc["per_point"][0]["residuals"]) == ["r1", "r2", "r3", "r4", "r5", "r6"]


def test_verify_calabi_full(tmp_path):
    code, doc = run(tmp_path, "verify", "--potential", "calabi-omega", "--system", "full")
    assert code == 0
    assert doc["sup_norm"] <= 1e-8 or doc["detected_scale"] is not None


def test_verify_forced_failure(tmp_path):
    code, doc = run(tmp_path, "verify", "--potential", "flat-H", "--system", "reduced", "--tol", "1e-20")
    assert code == 1 and doc["pass"] is False


@pytest.mark.parametrize("potential,system", [
    ("flat-omega", "full"), ("flat-omega-prime", "full"), ("flat-H", "full"),
    ("calabi-H", "reduced"), ("calabi-omega", "forms"), ("flat-omega", "forms"),
])
def test_verify_matrix_passes(tmp_path, potential, system):
    code, doc = run(tmp_path, "verify", "--potential", potential, "--system", system)
    assert code == 0 and doc["pass"]


def test_verify_points_file(tmp_path):
    pts = write_points(tmp_path, "reduced", [[[1, 0], [0, 2], 1, 0], [[0.1, 0.2], [0.3, -0.1], -0.5, 0.2]])
    code, doc = run(tmp_path, "verify", "--potential", "flat-H", "--system", "reduced", "--points", pts)
    assert code == 0
    assert doc["per_point"][0]["point"] == [[1.0, 0.0], [0.0, 2.0], 1.0, 0.0]
    assert all(isinstance(v, list) and len(v) == 2 for v in doc["per_point"][0]["residuals"].values())


@pytest.mark.parametrize("payload", [
    "{",                                                        # malformed JSON
    json.dumps({"coords": "polar", "points": [[1, 2]]}),        # unknown chart
    json.dumps({"coords": "reduced", "points": [[1, 2, 3]]}),   # wrong arity
    json.dumps({"coords": "full", "points": [[[0, 0], [0, 0], [1, 0], [0, 0]]]}),  # wrong chart
    json.dumps({"coords": "reduced", "points": []}),
])
def test_verify_bad_input(tmp_path, payload):
    p = tmp_path / "bad.json"
    p.write_text(payload)
    code, doc = run(tmp_path, "verify", "--potential", "flat-H", "--system", "reduced", "--points", str(p))
    assert code == 2 and doc is None


def test_domain_error_names_point(tmp_path, capsys):
    pts = write_points(tmp_path, "full", [[[0, 0], [0, 0], [1, 0], [0, 0]],
                                          [[0, 0], [0, 0], [0, 0], [1, 0]]])
    code, _ = run(tmp_path, "verify", "--potential", "flat-H", "--system", "full", "--points", pts)
    assert code == 2
    assert "point 1" in capsys.readouterr().err


def test_unknown_potential_and_system(tmp_path):
    assert run(tmp_path, "verify", "--potential", "nope", "--system", "reduced")[0] == 2
    assert run(tmp_path, "verify", "--potential", "flat-H", "--system", "nope")[0] == 2
    # a full potential has no reduced system
    assert run(tmp_path, "verify", "--potential", "flat-omega", "--system", "reduced")[0] == 2


@pytest.mark.parametrize("seed", [0, 17])
def test_scan_flat_H(tmp_path, seed):
    code, doc = run(tmp_path, "scan", "--potential", "flat-H", "--system", "reduced",
                    "--n", "1000", "--seed", str(seed))
    assert code == 0
    assert list(doc)[:7] == REPORT_KEYS
    assert set(doc["max_location"]) == {"r1", "r2", "r3", "r4", "r5", "r6"}


def test_scan_box_override(tmp_path):
    code, doc = run(tmp_path, "scan", "--potential", "flat-omega", "--system", "full",
                    "--box", "v=-2:2,rho=-1:1", "--n", "20")
    assert code == 0
    assert doc["box"]["v"] == [-2.0, 2.0]


def test_scan_calabi_outside_safe_box(tmp_path):
    code, _ = run(tmp_path, "scan", "--potential", "calabi-H", "--system", "reduced",
                  "--box", "rho=10:10", "--n", "5")
    assert code == 2


@pytest.mark.parametrize("args", [["--n", "0"], ["--box", "v=2"], ["--box", "w=0:1"]])
def test_scan_bad_arguments(tmp_path, args):
    assert run(tmp_path, "scan", "--potential", "flat-H", "--system", "reduced", *args)[0] == 2


def test_jacobi(tmp_path):
    code, doc = run(tmp_path, "jacobi", "--trials", "100", "--seed", "1")
    assert code == 0
    assert doc["max_defect"] <= 1e-10
    assert run(tmp_path, "jacobi", "--trials", "0")[0] == 2


def test_transform_example(tmp_path):
    pts = write_points(tmp_path, "full", [[[0.5, 0.5], [1, 0], [1, 0], [0, 2]]])
    code, doc = run(tmp_path, "transform", "--points", pts, "--direction", "full-to-reduced")
    assert code == 0
    assert doc["coords"] == "reduced"
    np.testing.assert_allclose(np.hstack([np.ravel(c) for c in doc["points"][0]]),
                               [1, 0, 0, 2, 1, 0], atol=1e-15)
    np.testing.assert_allclose(doc["fiber"][0], [1, 0], atol=1e-15)


def test_transform_round_trip(tmp_path):
    x = coords.default_full_grid(10, 4)
    pts = write_points(tmp_path, "full", [cli.encode_point(row, coords.FULL) for row in x])
    run(tmp_path, "transform", "--points", pts, "--direction", "full-to-reduced", name="red.json")
    code, doc = run(tmp_path, "transform", "--points", str(tmp_path / "red.json"),
                    "--direction", "reduced-to-full")
    assert code == 0
    back = np.array([cli.decode_point(p, coords.FULL, i) for i, p in enumerate(doc["points"])])
    np.testing.assert_allclose(back, x, atol=1e-12)


def test_transform_to_calabi(tmp_path):
    pts = write_points(tmp_path, "full", [[[0, 0], [0, 0], [1, 0], [1, 0]]])
    code, doc = run(tmp_path, "transform", "--points", pts, "--direction", "darboux-to-calabi")
    assert code == 0
    np.testing.assert_allclose(np.ravel(doc["points"][0]), [1, 0, 1, 0, 0, 0, 0, -1], atol=1e-15)


def test_transform_errors(tmp_path):
    pts = write_points(tmp_path, "full", [[[0, 0], [0, 0], [0, 0], [1, 0]]])
    assert run(tmp_path, "transform", "--points", pts, "--direction", "full-to-reduced")[0] == 2
    assert run(tmp_path, "transform", "--points", pts, "--direction", "reduced-to-full")[0] == 2
    assert run(tmp_path, "transform", "--points", pts, "--direction", "sideways")[0] == 2


def test_solve_flat_recovery(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"degree": 3, "start": {"noise": 0.01, "seed": 0},
                               "points": {"n": 400, "seed": 0}}))
    code, doc = run(tmp_path, "solve", "--config", str(cfg))
    assert code == 0
    assert doc["converged"] is True
    assert doc["fresh_sup"] <= 1e-7
    assert len(doc["coefficients"]) == len(doc["monomials"]) == 84


@pytest.mark.parametrize("payload", ["[1]", "{", json.dumps({"bogus": 1}), json.dumps({"tol": -1}),
                                     json.dumps({"start": "sideways"})])
def test_solve_bad_config(tmp_path, payload):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(payload)
    assert run(tmp_path, "solve", "--config", str(cfg))[0] == 2


def test_missing_subcommand():
    assert cli.main([]) == 2


MATRIX = [
    ["verify", "--potential", "flat-H", "--system", "reduced"],
    ["verify", "--potential", "calabi-omega", "--system", "full"],
    ["verify", "--potential", "calabi-omega", "--system", "forms"],
    ["scan", "--potential", "calabi-H", "--system", "reduced", "--box", "v=-1:1", "--n", "30", "--seed", "4"],
    ["jacobi", "--trials", "10", "--seed", "3"],
    ["solve"],
]


@pytest.mark.parametrize("args", MATRIX, ids=lambda a: "-".join(a[:3]))
def test_byte_identical_reruns(tmp_path, args):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(args + ["--out", str(a)])
    cli.main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hkreduce", "jacobi", "--trials", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"] is True
