import json
import subprocess
import sys

import pytest

from qtransistor.cli import main, parse_and_dispatch, parse_float_range, parse_int_range


def run(argv, capsys):
    code = parse_and_dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_plan_transfer_hz(capsys):
    code, out, _ = run(["plan-transfer", "--omega-hz", "1e10", "--lambda-hz", "1e4"], capsys)
    assert code == 0
    assert json.loads(out)["kappa"] == 2048


def test_plan_transfer_odd_denominator(capsys):
    code, out, err = run(["plan-transfer", "--omega-rad", "3", "--lambda-rad", "1"], capsys)
    assert code == 1
    assert out == ""
    assert "no odd-ratio solution (reduced denominator is odd)" in err


@pytest.mark.parametrize("argv", [["nope"], ["spectrum", "--bogus"],
                                  ["plan-transfer", "--omega-rad", "4"],
                                  ["fidelity-map", "--gamma-over-lambda", "0:1"]])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "usage" in err


def test_fidelity_map_file_and_manifest(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    code, stdout, _ = run(["fidelity-map", "--panel", "kbt-over-hnu=0.5",
                           "--gamma-over-lambda", "0:1:100", "--kappa", "1:60",
                           "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    lines = out.read_text().split("\n")
    assert lines[0] == "gamma_over_lambda,kBT_over_hnu,kappa,nbar,fbar"
    assert len(lines) == 6000 + 2 and lines[-1] == ""
    manifest = json.loads((tmp_path / "fig2.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "fidelity-map"
    assert manifest["outputs"] == [str(out)]
    again = tmp_path / "again.csv"
    code, _, _ = run(["fidelity-map", "--config", str(tmp_path / "fig2.csv.manifest.json"),
                      "--workers", "2", "--out", str(again)], capsys)
    assert code == 0
    assert again.read_bytes() == out.read_bytes()


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"omega": 2.0, "lambda": 0.1, "N": 3, "kappa": 1, "delta": 0.5}))
    code, out, _ = run(["spectrum", "--omega", "9", "--config", str(cfg)], capsys)
    assert code == 0
    assert json.loads(out)["config"]["omega"] == 2.0
    cfg.write_text(json.dumps({"flux": 1}))
    assert run(["spectrum", "--config", str(cfg)], capsys)[0] == 2


def test_evolve_csv_columns(capsys):
    code, out, _ = run(["evolve", "--N", "2", "--kappa", "2", "--steps", "5"], capsys)
    assert code == 0
    rows = out.strip().split("\n")
    assert rows[0] == "t,p_s,p_d,re_u_plus,im_u_plus,re_u_minus,im_u_minus"
    assert len(rows) == 6
    assert rows[1].startswith("0,1,0,1,0,0,0")


def test_other_subcommands(capsys):
    assert json.loads(run(["block-check", "--N", "4", "--kappa", "0", "--lambda", "1e-4",
                           "--delta", "1"], capsys)[1])["blocking"] is True
    assert run(["block-check", "--N", "4", "--kappa", "0"], capsys)[0] == 1
    gate = json.loads(run(["design-gate", "--phi-over-pi", "0.5", "--omega", "20",
                           "--lambda", "1"], capsys)[1])
    assert (gate["ell"], gate["kappa"]) == (3, 32)
    assert run(["design-gate", "--phi-over-pi", "0.5", "--lambda", "1", "--kappa", "2",
                "--N", "4", "--delta", "1"], capsys)[0] == 1
    disp = json.loads(run(["dispersive", "--g", "0.1", "--t", "3"], capsys)[1])
    assert disp["validity"] is True and disp["purity"] == pytest.approx(1.0)
    code, out, err = run(["dispersive", "--g", "5", "--nu", "9.9"], capsys)
    assert code == 0 and "warning" in err
    fid = json.loads(run(["fidelity", "--kappa", "3", "--gamma-over-lambda", "0",
                          "--nbar", "0.2", "--alpha", "0.3"], capsys)[1])
    assert fid["F"] == pytest.approx(1.0) and fid["fbar"] == pytest.approx(1.0)
    assert run(["fidelity", "--kappa", "2", "--N", "3", "--nbar", "0.1"], capsys)[0] == 1
    opt = json.loads(run(["optimal-kappa", "--kbt-over-hnu", "0.5"], capsys)[1])
    assert opt["kappa_star"] == 6
    spec = run(["spectrum", "--N", "3", "--kappa", "1", "--delta", "0.5", "--csv"], capsys)[1]
    assert spec.startswith("index,family,eigenvalue\n")


def test_validate_report(capsys):
    code, out, _ = run(["validate"], capsys)
    report = json.loads(out)
    assert code == 0
    assert {"check", "config", "max_error", "pass"} <= set(report[0])
    assert all(r["pass"] for r in report)


def test_ranges():
    assert list(parse_int_range("1:4")) == [1, 2, 3, 4]
    assert list(parse_float_range("0:1:3")) == [0.0, 0.5, 1.0]
    assert list(parse_float_range("0.2,0.4")) == [0.2, 0.4]


def test_main_exits_with_code():
    with pytest.raises(SystemExit) as info:
        main(["plan-transfer", "--omega-rad", "3", "--lambda-rad", "1"])
    assert info.value.code == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qtransistor", "plan-transfer",
                           "--omega-rad", "4", "--lambda-rad", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["kappa"] == 8
