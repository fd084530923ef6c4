import csv
import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from livsic.cli import main
from livsic.functions import TrigPolynomial
from livsic.interval_maps import make_beta_map
from livsic.io import (
    MalformedInput,
    dumps,
    function_from_dict,
    map_from_dict,
    map_to_dict,
    read_json,
)

GOLDEN = (1 + 5**0.5) / 2


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "golden": write(tmp_path / "beta_golden.json", {"type": "beta", "beta": GOLDEN}),
        "beta2": write(tmp_path / "beta2.json", {"type": "beta", "beta": 2}),
        "ce": write(tmp_path / "ce.json", {"type": "counterexample", "c": "1/8"}),
        "cob": write(tmp_path / "cob_cos.json",
                     {"type": "coboundary", "chi0": {"type": "trig", "cos": [0, 0.5], "sin": [0, 0.2]}}),
        "linear": write(tmp_path / "linear.json", {"type": "poly", "coeffs": [0, 1]}),
        "tmp": tmp_path,
    }


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_density_golden_plateaus(files):
    out = files["tmp"] / "h.csv"
    assert main(["density", "--map", files["golden"], "--grid", "4096", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["x", "value"]
    x, h = data[:, 0], data[:, 1]
    assert h[x < 1 / GOLDEN - 1e-3].mean() == pytest.approx(1.17082, abs=1e-2)
    assert h[x > 1 / GOLDEN + 1e-3].mean() == pytest.approx(0.72361, abs=1e-2)


def test_solve_coboundary(files):
    out = files["tmp"] / "chi.csv"
    assert main(["solve", "--map", files["beta2"], "--cocycle", files["cob"], "--out", str(out)]) == 0
    diag = read_json(out.with_suffix(".json"))
    assert abs(diag["a"] - 1) <= 1e-6
    assert diag["is_coboundary"] is True
    header, data = read_csv(out)
    chi0 = TrigPolynomial([0, 0.5], [0, 0.2])
    assert np.ptp(data[:, 1] - chi0(data[:, 0])) / 2 <= 1e-4


def test_solve_non_coboundary_exit_1(files):
    out = files["tmp"] / "chi.csv"
    assert main(["solve", "--map", files["beta2"], "--cocycle", files["linear"], "--out", str(out)]) == 1
    assert read_json(out.with_suffix(".json"))["is_coboundary"] is False


def test_qpartition_golden(files):
    out = files["tmp"] / "q.json"
    assert main(["qpartition", "--map", files["golden"], "-m", "6", "--out", str(out)]) == 0
    assert read_json(out)["elements"] == [[0, 1]]


def test_qpartition_counterexample(files):
    out = files["tmp"] / "q.json"
    assert main(["qpartition", "--map", files["ce"], "--out", str(out)]) == 0
    d = read_json(out)
    assert d["elements"] == [[0, 0.5], [0.5, 1]]
    assert d["delta"] == 0.375


def test_eigendata_and_csv(files):
    out, side = files["tmp"] / "e.json", files["tmp"] / "e.csv"
    assert main(["eigendata", "--map", files["beta2"], "--cocycle", files["cob"], "--grid", "1024",
                 "--out", str(out), "--csv", str(side)]) == 0
    assert abs(read_json(out)["a"] - 1) <= 1e-6
    header, data = read_csv(side)
    assert header == ["x", "w", "nu", "h"] and data.shape == (1024, 4)


def test_series(files):
    out = files["tmp"] / "s.json"
    assert main(["series", "--map", files["beta2"], "--cocycle", files["cob"], "--points", "0.2", "0.7",
                 "--out", str(out)]) == 0
    chi0 = TrigPolynomial([0, 0.5], [0, 0.2])
    rows = read_json(out)["results"]
    assert [r["value"] for r in rows] == pytest.approx([chi0.derivative(0.2), chi0.derivative(0.7)], abs=1e-9)
    assert main(["series", "--map", files["beta2"], "--cocycle", files["cob"], "--points", "1.5"]) == 2


def test_series_higher_order(files):
    out = files["tmp"] / "s2.json"
    assert main(["series", "--map", files["golden"], "--cocycle", files["cob"], "--points", "0.9",
                 "--order", "2", "--policy", "max-weight", "--out", str(out)]) == 0
    chi0 = TrigPolynomial([0, 0.5], [0, 0.2])
    assert read_json(out)["results"][0]["value"] == pytest.approx(chi0.derivative(0.9, 2), abs=1e-8)


def test_counterexample_outputs(files):
    out = files["tmp"] / "ce"
    assert main(["counterexample", "--out-dir", str(out), "--samples", "101"]) == 0
    header, data = read_csv(out / "samples.csv")
    assert header == ["x", "T", "chi", "chi_T", "phi"] and data.shape == (101, 5)
    assert np.max(np.abs(data[:, 3] - data[:, 2] - data[:, 4])) <= 1e-12
    cert = read_json(out / "certification.json")
    assert cert["phi"]["passed"] and cert["chi_single_jump_at_half"] and cert["markov"]
    assert len(read_json(out / "map.json")["branches"]) == 3


def test_verify(files):
    chi = write(files["tmp"] / "chi.json", {"type": "trig", "cos": [0, 0.5], "sin": [0, 0.2]})
    wrong = write(files["tmp"] / "wrong.json", {"type": "trig", "cos": [0, 0.4]})
    assert main(["verify", "--map", files["beta2"], "--cocycle", files["cob"], "--chi", chi]) == 0
    out = files["tmp"] / "v.json"
    assert main(["verify", "--map", files["beta2"], "--cocycle", files["cob"], "--chi", wrong,
                 "--out", str(out)]) == 1
    assert read_json(out)["pass"] is False


def test_verify_with_grid_chi(files):
    out = files["tmp"] / "chi.csv"
    main(["solve", "--map", files["beta2"], "--cocycle", files["cob"], "--grid", "8192", "--out", str(out)])
    assert main(["verify", "--map", files["beta2"], "--cocycle", files["cob"], "--chi", str(out),
                 "--check-tol", "1e-3"]) == 0


def test_malformed_inputs_exit_2(files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["density", "--map", str(bad)]) == 2
    assert main(["density", "--map", str(tmp_path / "missing.json")]) == 2
    assert main(["density", "--map", files["golden"], "--grid", "-4"]) == 2
    leaky = write(tmp_path / "leaky.json", {"branches": [{"domain": [0, 1], "coeffs": [0, 3]}]})
    assert main(["density", "--map", leaky]) == 2
    assert main(["solve", "--map", files["beta2"], "--cocycle", write(tmp_path / "c.json", {"type": "nope"})]) == 2
    assert main(["nonsense"]) == 2


def test_error_json_written_to_output_path(files, tmp_path):
    bad = write(tmp_path / "bad_map.json", {"type": "beta", "beta": 0.5})
    out = tmp_path / "q.json"
    assert main(["qpartition", "--map", bad, "--out", str(out)]) == 2
    err = read_json(out)
    assert err["exit_status"] == 2 and err["message"]


def test_outputs_are_deterministic(files):
    a, b = files["tmp"] / "a.json", files["tmp"] / "b.json"
    for p in (a, b):
        main(["eigendata", "--map", files["golden"], "--cocycle", files["cob"], "--grid", "512", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()
    c, d = files["tmp"] / "c.csv", files["tmp"] / "d.csv"
    for p in (c, d):
        main(["density", "--map", files["golden"], "--grid", "512", "--out", str(p)])
    assert c.read_bytes() == d.read_bytes()


def test_suite_subset(files, capsys):
    out = files["tmp"] / "suite.json"
    assert main(["suite", "--only", "1", "8", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)
    assert [c["criterion"] for c in read_json(out)["criteria"]] == [1, 8]


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "livsic", "qpartition", "--map", files["golden"], "-m", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["elements"] == [[0, 1]]


def test_map_dict_round_trip():
    t = make_beta_map(2.5, 0.3)
    back = map_from_dict(map_to_dict(t))
    assert [b.coeffs for b in back.branches] == pytest.approx([tuple(map(float, b.coeffs)) for b in t.branches])
    exact = map_from_dict({"type": "beta", "beta": "5/2", "alpha": "3/10"})
    assert exact.branches[0].coeffs[1] == Fraction(5, 2)


@pytest.mark.parametrize("d", [
    [],
    {"type": "beta"},
    {"type": "beta", "beta": "x/2"},
    {"type": "beta", "beta": True},
    {"branches": [{"domain": [0], "coeffs": [0, 2]}]},
    {"branches": [{"domain": [0, 1], "coeffs": [0, 2, 0, 0, 0, 0, 0]}]},
    {"type": "spiral"},
])
def test_map_from_dict_rejects(d):
    with pytest.raises(MalformedInput):
        map_from_dict(d)


def test_function_from_dict():
    f = function_from_dict({"type": "poly", "coeffs": [1, 2]})
    assert f(0.5) == 2.0
    with pytest.raises(MalformedInput):
        function_from_dict({"type": "coboundary", "chi0": {"type": "poly", "coeffs": [1]}})
    with pytest.raises(MalformedInput):
        function_from_dict({"type": "trig", "cos": [float("nan")]})


def test_dumps_precision_and_nan():
    text = dumps({"a": 0.1, "b": [1 / 3, float("nan")], "c": np.float64(2.5)})
    d = json.loads(text)
    assert d["a"] == 0.1 and d["b"][0] == 1 / 3 and d["b"][1] is None
    assert "0.10000000000000001" in text
