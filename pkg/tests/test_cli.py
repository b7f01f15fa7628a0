import csv
import json

import numpy as np
import pytest

from qfc.cli import main
from qfc.config import ConfigError, load_config, round_sig, run_config
from qfc.spectra import LineParams, synth_transmission


@pytest.fixture(scope="module")
def reference_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("reference")
    assert main(["run", "--config", "reference", "--out", str(out)]) == 0
    return out


def write_config(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def test_reference_golden_values(reference_run):
    rep = json.loads((reference_run / "report.json").read_text())
    d = rep["design"]
    assert d["eta_max_couplings"] == pytest.approx(0.726, abs=1e-3)
    assert d["eta_max_q"] == pytest.approx(0.698, abs=1e-3)
    assert d["qpm_order"] == 159
    assert d["poling_period_um"] == pytest.approx(2.924, abs=1e-3)
    assert rep["simulate"]["p_opt_W"] == pytest.approx(360e-6, rel=1e-9)
    assert rep["budget"]["channels"] == 11
    assert rep["bend"]["turn_rad"] == pytest.approx(np.pi / 2, abs=1e-6)
    assert any("386000" in w for w in rep["warnings"])


def test_reference_output_files(reference_run):
    names = {p.name for p in reference_run.iterdir()}
    assert {"report.json", "sweep.csv", "bend_path.csv", "conversion_curve.csv", "fits.json"} <= names


def test_reference_sweep_monotone(reference_run):
    rows = list(csv.reader((reference_run / "sweep.csv").read_text().splitlines()))
    assert rows[0] == ["kappa2_sf_B", "eta_max"]
    eta = [float(r[1]) for r in rows[1:]]
    assert len(eta) == 10
    assert all(b > a for a, b in zip(eta, eta[1:]))


def test_determinism(reference_run, tmp_path):
    assert main(["run", "--config", "reference", "--out", str(tmp_path)]) == 0
    first = sorted(p.name for p in reference_run.iterdir())
    assert first == sorted(p.name for p in tmp_path.iterdir())
    for name in first:
        assert (reference_run / name).read_bytes() == (tmp_path / name).read_bytes(), name


def test_empty_task_list(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"tasks": []})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text()) == {}


def test_single_subcommand_runs_only_that_task(tmp_path):
    assert main(["budget", "--config", "reference", "--out", str(tmp_path)]) == 0
    assert set(json.loads((tmp_path / "report.json").read_text())) == {"budget"}


def test_schema_error_exit_code_and_path(tmp_path, capsys):
    cfg, _ = load_config("reference")
    cfg["ring"]["R_um"] = -5
    path = write_config(tmp_path / "bad.json", cfg)
    assert main(["design", "--config", path]) == 2
    assert "$.ring.R_um" in capsys.readouterr().err


def test_schema_error_raises_in_api():
    with pytest.raises(ConfigError, match=r"\$\.tasks"):
        run_config({"tasks": "design"})


def test_runtime_error_exit_code(tmp_path, capsys):
    wl = np.linspace(1530, 1536, 300)
    (tmp_path / "flat.csv").write_text(
        "wavelength_nm,transmission\n" + "".join(f"{w},1.0\n" for w in wl)
    )
    cfg = write_config(tmp_path / "c.json", {"tasks": ["fit"], "fit": {"traces": [{"path": "flat.csv", "regime": "over"}]}})
    assert main(["fit", "--config", cfg]) == 1
    assert "DipDetectionError" in capsys.readouterr().err


def test_fit_from_csv_path(tmp_path):
    line = LineParams.from_q(1533.0, 1.01e6, 1.46e5)
    wl = np.linspace(1533.0 - 8 * line.fwhm, 1533.0 + 8 * line.fwhm, 801)
    (tmp_path / "t.csv").write_text(synth_transmission(wl, line).to_csv())
    cfg = write_config(tmp_path / "c.json", {"tasks": ["fit"], "fit": {"traces": [{"path": "t.csv", "regime": "over"}]}})
    assert main(["fit", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    fit = json.loads((tmp_path / "o" / "report.json").read_text())["fit"][0]
    assert fit["q_loaded"] == pytest.approx(1.46e5, rel=1e-6)
    assert fit["q_intrinsic"] == pytest.approx(1.01e6, rel=1e-6)


def test_missing_trace_is_config_error(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"tasks": ["fit"], "fit": {"traces": [{"path": "nope.csv", "regime": "over"}]}})
    assert main(["fit", "--config", cfg]) == 2


def test_round_sig():
    assert round_sig(1 / 3) == 0.333333333
    assert round_sig({"a": [2 / 3, 5, "x"]}) == {"a": [0.666666667, 5, "x"]}
    assert round_sig(0.0) == 0.0
