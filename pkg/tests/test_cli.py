"""Command line interface wiring and exit codes."""

import pytest

from cavsta.cli import main


def write_config(tmp_path, out_dir, extra=""):
    ini = tmp_path / "cfg.ini"
    ini.write_text(
        "[geometry]\n"
        "family = contraction\nL0 = 0.0\nLf = 0.3\nR0 = 1.0\neps = 0.3\ntau = 1.2\n"
        "[numerics]\n"
        "temperatures = 0\n"
        "time_step = 0.25\n"
        "spatial_points = 301\n"
        "effective_step = 0.0125\n"
        "window = -1.5 2.2\n"
        "[outputs]\n"
        f"dir = {out_dir}\n"
        + extra
    )
    return str(ini)


def test_run_success_prints_artifacts(tmp_path, capsys):
    cfg = write_config(tmp_path, tmp_path / "out")
    code = main(["run", cfg])
    out = capsys.readouterr()
    assert code == 0
    assert "trajectories.csv" in out.out
    assert "summary.txt" in out.out
    assert out.err == ""


def test_output_directory_override(tmp_path, capsys):
    cfg = write_config(tmp_path, tmp_path / "ignored")
    code = main(["run", cfg, "--out", str(tmp_path / "moved")])
    out = capsys.readouterr()
    assert code == 0
    assert str(tmp_path / "moved") in out.out
    assert not (tmp_path / "ignored").exists()


def test_missing_config_is_an_error(tmp_path, capsys):
    code = main(["run", str(tmp_path / "absent.ini")])
    err = capsys.readouterr().err
    assert code == 1
    assert err.startswith("error:")


def test_superluminal_warns_without_strict(tmp_path, capsys):
    ini = tmp_path / "fast.ini"
    ini.write_text(
        "[geometry]\n"
        "family = rigid\nLf = 0.4\neps = -0.4\ntau = 0.4\n"
        "[numerics]\n"
        "temperatures = 0\ntime_step = 0.25\nspatial_points = 301\n"
        "effective_step = 0.005\nwindow = -1.2 2.4\n"
        "[outputs]\n"
        f"dir = {tmp_path / 'out'}\n"
    )
    code = main(["run", str(ini)])
    err = capsys.readouterr().err
    assert code == 0
    assert "warning:" in err

    code = main(["run", str(ini), "--strict", "--out", str(tmp_path / "out2")])
    err = capsys.readouterr().err
    assert code == 2
    assert "FAIL:" in err


def test_sweep_subcommand(tmp_path, capsys):
    cfg = write_config(
        tmp_path, tmp_path / "out",
        extra="[sweep]\ntau_list = 2.0 4.0 8.0\n",
    )
    # sweep builds its own windows and steps per tau
    code = main(["sweep", cfg])
    out = capsys.readouterr()
    assert code == 0
    assert "sweep.csv" in out.out


def test_subcommand_required():
    with pytest.raises(SystemExit):
        main([])
