import json


from matherlab.cli import main


def test_gamma_prints_generator(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "gamma", "--generators", "4pi,6pi"])
    assert code == 0
    assert capsys.readouterr().out.splitlines()[0] == "2pi"


def test_gamma_empty_is_infinite(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "gamma", "--generators", ""])
    assert code == 0
    assert capsys.readouterr().out.splitlines()[0] == "inf"


def test_dry_run_echoes_resolved_config(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "--dry-run", "channel",
                 "--eps", "0.1", "--seed", "5"])
    assert code == 0
    out = capsys.readouterr().out
    assert "eps = 0.1" in out and "seed = 5" in out and "K = 2.0" in out


def test_seed_mandatory_for_stochastic_commands(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "channel"])
    assert code == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_config_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code = main(["--config", str(cfg), "--out", str(tmp_path), "--dry-run",
                 "annulus"])
    assert code == 2
    assert "unknown config key" in capsys.readouterr().err


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('eps = 0.2\nK = 3.0\nseed = 9\n')
    code = main(["--config", str(cfg), "--out", str(tmp_path), "--dry-run",
                 "channel", "--eps", "0.07"])
    assert code == 0
    out = capsys.readouterr().out
    assert "eps = 0.07" in out      # CLI beats config
    assert "K = 3.0" in out         # config beats default
    assert "seed = 9" in out


def test_bad_emit_flag_rejected(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "--emit", "csv,bogus", "annulus"])
    assert code == 2


def test_flux_subcommand(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "flux", "--r-start", "4",
                 "--r-end", "2"])
    assert code == 0
    assert (tmp_path / "flux_report.json").exists()


def test_subdiff_subcommand(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "subdiff", "--seed", "3",
                 "--n-samples", "64"])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_annulus_cli_writes_report(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "annulus"])
    assert code == 0
    payload = json.loads((tmp_path / "annulus_report.json").read_text())
    assert payload["all_passed"] is True
    out = capsys.readouterr().out
    assert "flux" in out


def test_env_var_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("MATHERLAB_OUT", str(tmp_path / "env_out"))
    code = main(["gamma", "--generators", "16pi"])
    assert code == 0
    assert (tmp_path / "env_out" / "gamma_report.json").exists()


def test_numerical_failure_exit_code(capsys, tmp_path):
    # infeasible circle flux target -> numerical failure, exit 3
    code = main(["--out", str(tmp_path), "kappa", "--family", "circle",
                 "--r-start", "2", "--flux", "30pi", "--seed", "1"])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_pathological_cli(capsys, tmp_path):
    code = main(["--out", str(tmp_path), "pathological", "--seed", "4"])
    assert code == 0
    assert (tmp_path / "pathological_report.json").exists()
