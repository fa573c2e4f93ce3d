import json
import math
from pathlib import Path

import numpy as np
import pytest

from resizedboot import CsvParseError, fit_mle
from resizedboot.cli import export_dataset_csv, main, parse_dataset_csv

FIXTURE = Path(__file__).parent / "fixtures" / "logistic_n200_p5.csv"


def _read(path: Path) -> bytes:
    return path.read_bytes()


def _intervals_rows(path: Path) -> list[dict]:
    return json.loads((path / "intervals.json").read_text())["intervals"]


# ----------------------------------------------------------------- parsing

def test_parse_fixture_maps_binary_to_pm_one():
    data = parse_dataset_csv(FIXTURE, "logistic", has_intercept=False)
    assert (data.n, data.p) == (200, 5)
    assert set(np.unique(data.y)) == {-1.0, 1.0}


def test_parse_intercept_prepends_ones():
    data = parse_dataset_csv(FIXTURE, "logistic", has_intercept=True)
    assert data.p == 6
    np.testing.assert_array_equal(data.X[:, 0], 1.0)


def test_parse_rejects_negative_poisson_named_line(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("y,x0\n1.0,0.2\n-1.0,0.3\n2.0,0.4\n")
    with pytest.raises(CsvParseError, match="line 3"):
        parse_dataset_csv(f, "poisson-log")


def test_parse_rejects_non_finite_with_position(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("y,x0,x1\n1.0,0.2,0.1\n0.0,nan,0.5\n1.0,0.1,0.2\n")
    with pytest.raises(CsvParseError, match="line 3.*x0"):
        parse_dataset_csv(f, "logistic")


def test_parse_rejects_wide_files(tmp_path):
    f = tmp_path / "wide.csv"
    f.write_text("y,x0,x1,x2\n1.0,1,2,3\n0.0,4,5,6\n1.0,7,8,9\n")
    with pytest.raises(CsvParseError, match="n >= p\\+1"):
        parse_dataset_csv(f, "logistic")


def test_parse_rejects_missing_header_and_fields(tmp_path):
    f = tmp_path / "noheader.csv"
    f.write_text("a,b\n1.0,0.2\n")
    with pytest.raises(CsvParseError, match="first column must be named 'y'"):
        parse_dataset_csv(f, "logistic")
    g = tmp_path / "ragged.csv"
    g.write_text("y,x0,x1\n1.0,0.2\n")
    with pytest.raises(CsvParseError, match="expected 3 fields"):
        parse_dataset_csv(g, "logistic")


def test_parse_rejects_non_numeric_cell(tmp_path):
    f = tmp_path / "text.csv"
    f.write_text("y,x0\n1.0,0.2\n0.0,oops\n")
    with pytest.raises(CsvParseError, match="line 3.*oops"):
        parse_dataset_csv(f, "logistic")


def test_export_then_parse_round_trips_fit_bitwise(tmp_path):
    data = parse_dataset_csv(FIXTURE, "logistic")
    out = tmp_path / "copy.csv"
    export_dataset_csv(out, data)
    again = parse_dataset_csv(out, "logistic")
    np.testing.assert_array_equal(data.X, again.X)
    np.testing.assert_array_equal(data.y, again.y)
    a, b = fit_mle(data), fit_mle(again)
    np.testing.assert_array_equal(a.beta_hat, b.beta_hat)


# ---------------------------------------------------------------- commands

def test_fit_command_writes_artifacts(tmp_path):
    rc = main(["fit", "--data", str(FIXTURE), "--family", "logistic",
               "--out", str(tmp_path), "--seed", "1"])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "converged"
    assert len(summary["beta_hat"]) == 5
    assert (tmp_path / "intervals.csv").exists()


def test_infer_shapes_summary_keys_and_nesting(tmp_path):
    rc = main([
        "infer", "--data", str(FIXTURE), "--family", "logistic",
        "--out", str(tmp_path), "--seed", "3", "--B", "240",
        "--level", "0.95", "--level", "0.8",
        "--method", "classical", "--method", "boot-g",
    ])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary) == {
        "beta_hat", "alpha_hat", "sigma_hat", "gamma_hat", "eta_tilde",
        "scale_s", "n_failed", "seed", "schema_version",
    }
    assert 0.0 < summary["scale_s"] <= 1.0
    assert summary["alpha_hat"] > 0
    rows = _intervals_rows(tmp_path)
    # 5 coordinates x 2 methods x 2 levels
    assert len(rows) == 20
    by_key = {(r["coordinate"], r["method"], r["level"]): r for r in rows}
    for j in range(5):
        for m in ("classical", "boot-g"):
            narrow = by_key[(j, m, 0.8)]
            wide = by_key[(j, m, 0.95)]
            assert wide["lo"] <= narrow["lo"] <= narrow["hi"] <= wide["hi"]


def test_infer_known_gamma_and_boot_dump(tmp_path):
    rc = main([
        "infer", "--data", str(FIXTURE), "--family", "logistic",
        "--out", str(tmp_path), "--seed", "0", "--B", "50",
        "--known-gamma", "1.3", "--method", "boot-g", "--dump-boot",
    ])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["gamma_hat"] == 1.3
    dump = (tmp_path / "boot_mles.csv").read_text().splitlines()
    assert dump[1].startswith("beta0")
    assert len(dump) == 2 + 50 - summary["n_failed"]


def test_infer_errors_as_json_on_separable_data(tmp_path, capsys):
    bad = tmp_path / "sep.csv"
    bad.write_text(
        "y,x0\n" + "".join(
            f"{1.0 if i % 2 else 0.0},{(1.0 if i % 2 else -1.0) + 0.1 * i}\n"
            for i in range(10)
        )
    )
    rc = main(["infer", "--data", str(bad), "--family", "logistic",
               "--out", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().out)
    assert err["error"]["type"] == "ResizedBootError"
    assert "separable" in err["error"]["message"]


def test_data_requires_family(tmp_path, capsys):
    rc = main(["infer", "--data", str(FIXTURE), "--out", str(tmp_path)])
    assert rc == 1
    assert "family" in json.loads(capsys.readouterr().out)["error"]["message"]


def test_unknown_design_rejected(tmp_path, capsys):
    rc = main(["simulate", "--design", "florp", "--out", str(tmp_path)])
    assert rc == 1
    assert "florp" in json.loads(capsys.readouterr().out)["error"]["message"]


def test_simulate_then_infer_recovers_truth(tmp_path):
    sim_dir = tmp_path / "sim"
    assert main(["simulate", "--design", "pareto-small", "--out", str(sim_dir),
                 "--seed", "2"]) == 0
    truth = json.loads((sim_dir / "truth.json").read_text())
    inf_dir = tmp_path / "inf"
    assert main([
        "infer", "--data", str(sim_dir / "dataset.csv"), "--family", "logistic",
        "--out", str(inf_dir), "--seed", "2", "--B", "60", "--method", "boot-g",
    ]) == 0
    summary = json.loads((inf_dir / "summary.json").read_text())
    assert summary["gamma_hat"] == pytest.approx(truth["gamma_observed"], rel=0.10)


def test_curve_command_artifacts(tmp_path):
    rc = main(["curve", "--data", str(FIXTURE), "--family", "logistic",
               "--out", str(tmp_path), "--seed", "3", "--grid", "8", "--reps", "2"])
    assert rc == 0
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    assert lines[1].startswith("# eta_tilde=")
    assert lines[2].startswith("# gamma_hat=")
    header = lines[3].split(",")
    assert header == ["s", "gamma", "replicate", "eta_hat", "eta_smooth"]
    rows = [ln.split(",") for ln in lines[4:]]
    s0 = [r for r in rows if float(r[0]) == 0.0]
    assert s0 and all(float(r[1]) == 0.0 for r in s0)  # s=0 knot has gamma=0
    # smoothed column non-decreasing in gamma
    by_gamma = sorted({(float(r[1]), float(r[4])) for r in rows})
    smooth = [e for _, e in by_gamma]
    assert all(b >= a - 1e-12 for a, b in zip(smooth, smooth[1:]))


def test_coverage_command_runs_and_reports(tmp_path, capsys):
    design = {
        "schema_version": 1, "n": 120, "p": 4,
        "covariates": {"kind": "gaussian"},
        "coefficients": {"kind": "mixture", "k": 2, "mu": 2.0, "sd": 0.5},
        "family": "logistic", "seed": 0,
    }
    spec_path = tmp_path / "design.json"
    spec_path.write_text(json.dumps(design))
    out = tmp_path / "cov"
    rc = main(["coverage", "--design", str(spec_path), "--out", str(out),
               "--seed", "5", "--n-reps", "3", "--B", "40",
               "--method", "classical", "--method", "boot-g",
               "--gamma-mode", "known", "--level", "0.9"])
    assert rc == 0
    table = capsys.readouterr().out
    assert "classical" in table and "boot-g" in table
    report = json.loads((out / "coverage.json").read_text())
    assert report["n_reps"] == 3
    csv_lines = (out / "coverage.csv").read_text().splitlines()
    assert csv_lines[1].split(",")[0] == "method"
    assert len(csv_lines) == 2 + 2  # schema comment + header + 2 method rows


@pytest.mark.parametrize(
    "argv",
    [
        ["fit", "--data", "FIX", "--family", "logistic", "--seed", "7"],
        ["infer", "--data", "FIX", "--family", "logistic", "--seed", "7",
         "--B", "60", "--method", "boot-g"],
        ["curve", "--data", "FIX", "--family", "logistic", "--seed", "7",
         "--grid", "6", "--reps", "1"],
        ["simulate", "--design", "pareto-small", "--seed", "7"],
    ],
    ids=["fit", "infer", "curve", "simulate"],
)
def test_commands_are_byte_deterministic(tmp_path, argv):
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        full = [
            (str(FIXTURE) if a == "FIX" else a) for a in argv
        ] + ["--out", str(out)]
        assert main(full) == 0
        outs.append(out)
    files_a = sorted(p.name for p in outs[0].iterdir())
    files_b = sorted(p.name for p in outs[1].iterdir())
    assert files_a == files_b and files_a
    for name in files_a:
        assert _read(outs[0] / name) == _read(outs[1] / name), name


def test_fit_command_probit_family(tmp_path):
    rc = main(["fit", "--data", str(FIXTURE), "--family", "probit",
               "--out", str(tmp_path), "--seed", "0"])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "converged"
    # probit coefficients sit near logistic ones divided by ~1.7
    assert all(math.isfinite(b) for b in summary["beta_hat"])
