import csv
import json

import pytest

from quditfft.cli import MODES, RunConfig, build_parser, main, render_report


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_default_mode_passes_and_reports_schema(capsys):
    code, out, err = run_cli(capsys)
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["mode"] == "verify-qft"
    assert report["passed"] is True
    assert report["config"]["d"] == 3
    assert report["results"]["max_entry_err"] < 1e-10


def test_mode_flag_selects_runner(capsys):
    code, out, _ = run_cli(capsys, "--mode", "wavepacket", "--d", "5")
    assert code == 0
    report = json.loads(out)
    assert report["results"]["unitarity_err"] < 1e-12
    assert report["results"]["cycling_err"] < 1e-12


def test_pulse_mode_reports_monotone_sweep(capsys):
    code, out, _ = run_cli(capsys, "--mode", "pulse", "--d", "3")
    assert code == 0
    report = json.loads(out)
    sweep = report["results"]["leakage_sweep"]
    assert sweep["monotone_decreasing"] is True
    assert len(sweep["leakage"]) == 8
    assert report["results"]["two_level_pi_error"] < 1e-8


def test_iontrap_mode_passes(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "iontrap", "d": 2, "n_bar": 2.0}))
    code, out, _ = run_cli(capsys, "--config", str(cfg))
    assert code == 0
    report = json.loads(out)
    assert report["results"]["fidelity"] > 1.0 - 1e-9
    assert report["results"]["trap_residual_max"] < 1e-10


def test_full_mode_aggregates_sections(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps({"mode": "full", "d": 2, "n_bar": 2.0, "t_rev_ratio": 100.0})
    )
    code, out, _ = run_cli(capsys, "--config", str(cfg))
    assert code == 0
    report = json.loads(out)
    for section in ("verify_qft", "wavepacket", "pulse", "iontrap"):
        assert report["results"][section]["passed"] is True
    # the revival ratio also turns on the dispersion sweep
    assert "dispersion_fidelity_vs_t_rev" in report["results"]["wavepacket"]["results"]


def test_failing_check_exits_one(tmp_path, capsys):
    # strong quadratic dispersion ruins the composed-gate fidelity
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "mode": "iontrap",
                "d": 2,
                "n_bar": 2.0,
                "truncation": "revival",
                "t_rev_ratio": 20.0,
            }
        )
    )
    code, out, _ = run_cli(capsys, "--config", str(cfg))
    assert code == 1
    report = json.loads(out)
    assert report["passed"] is False
    assert report["results"]["fidelity"] < 0.9


def test_unknown_config_key_exits_two(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "verify-qft", "bogus_knob": 1}))
    code, _, err = run_cli(capsys, "--config", str(cfg))
    assert code == 2
    assert "bogus_knob" in err


def test_bad_config_values_exit_two(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "warp"}))
    assert run_cli(capsys, "--config", str(cfg))[0] == 2
    cfg.write_text("not json {")
    assert run_cli(capsys, "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps([1, 2]))
    assert run_cli(capsys, "--config", str(cfg))[0] == 2
    assert run_cli(capsys, "--config", str(tmp_path / "missing.json"))[0] == 2
    cfg.write_text(json.dumps({"d": 1}))
    assert run_cli(capsys, "--config", str(cfg))[0] == 2


def test_register_cap_env_var_guards_cli(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QUDITFFT_MAX_AMPS", "16")
    code, _, err = run_cli(capsys, "--d", "2", "--q", "5")
    assert code == 2
    assert "QUDITFFT_MAX_AMPS" in err
    code, out, _ = run_cli(capsys, "--d", "2", "--q", "4")
    assert code == 0


def test_out_file_and_csv(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    csv_path = tmp_path / "points.csv"
    code, out, _ = run_cli(
        capsys, "--mode", "pulse", "--out", str(out_path), "--csv", str(csv_path)
    )
    assert code == 0
    assert out == ""  # report went to the file instead
    report = json.loads(out_path.read_text())
    assert report["schema"] == 1
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert "leakage" in rows[0]


def test_reports_are_byte_identical_across_reruns(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = run_cli(capsys, "--mode", "full", "--d", "2", "--seed", "7",
                             "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_overridden_by_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "verify-qft", "d": 2, "q": 3}))
    code, out, _ = run_cli(capsys, "--config", str(cfg), "--d", "4")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["d"] == 4
    assert report["config"]["q"] == 3


def test_pulse_duration_flag_feeds_chosen_leakage(capsys):
    code, out, _ = run_cli(capsys, "--mode", "pulse", "--pulse-duration", "0.02")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["pulse_duration_ratio"] == 0.02
    assert report["results"]["chosen_leakage"] < 0.01


def test_render_report_is_sorted_and_newline_terminated():
    cfg = RunConfig()
    text = render_report(cfg, {"b": 1, "a": 2}, True)
    assert text.endswith("\n")
    parsed = json.loads(text)
    assert parsed["results"] == {"a": 2, "b": 1}
    keys = list(json.loads(text, object_pairs_hook=lambda p: [k for k, _ in p]))
    assert keys == sorted(keys)


def test_parser_exposes_documented_flags():
    parser = build_parser()
    text = parser.format_help()
    for flag in ("--mode", "--config", "--d", "--q", "--seed", "--out",
                 "--spectrum-truncation", "--pulse-duration", "--csv"):
        assert flag in text
    assert set(MODES) == {"verify-qft", "wavepacket", "pulse", "iontrap", "full"}
