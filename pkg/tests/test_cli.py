import csv
import json

import pytest

from jamguard import cli
from jamguard.simulator import ScenarioKind, ScenarioResult


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_toml(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return p


def test_parse_defaults():
    c = cli.parse_config("roc")
    assert c.kind is ScenarioKind.ROC
    assert c.subcarriers == 300 and c.trials == 100_000 and c.seed == 0


def test_file_then_flags(tmp_path):
    path = write_toml(tmp_path, 'seed = 5\ntrials = 1000\nchannel = "rayleigh"\nmp = [1, 5]\n')
    c = cli.parse_config("roc", path, seed=7)
    assert c.seed == 7
    assert c.trials == 1000
    assert c.channels == ("rayleigh",)
    assert c.mp == (1, 5)


@pytest.mark.parametrize("text", [
    "prb_size = 7\n",
    "bogus = 1\n",
    "[section]\nseed = 1\n",
    "seed = \n",
    "trials = 1.5\n",
    'pfa = ["x"]\n',
])
def test_bad_config_files(tmp_path, text):
    with pytest.raises(cli.ConfigError):
        cli.parse_config("roc", write_toml(tmp_path, text))


def test_bad_config_exit_code(tmp_path, capsys):
    path = write_toml(tmp_path, "prb_size = 7\n")
    assert cli.main(["roc", "--config", str(path), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_missing_config_file(tmp_path):
    assert cli.main(["roc", "--config", str(tmp_path / "nope.toml")]) == cli.EXIT_CONFIG


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        cli.main(["fly"])
    assert exc.value.code == 2


def test_roc_output(tmp_path):
    out = tmp_path / "res"
    code = cli.main(["roc", "--out", str(out), "--trials", "2000", "--pfa", "1e-2,1e-1", "--mp", "5"])
    assert code == cli.EXIT_OK
    rows = read_rows(out / "roc.csv")
    assert tuple(rows[0]) == cli.CSV_HEADER
    series = {r[2] for r in rows[1:]}
    assert series == {
        "M_P=5, L_P=5, AWGN, Monte Carlo", "M_P=5, L_P=5, AWGN, analytic", "M_P=5, L_P=5, RAYLEIGH, Monte Carlo",
        "M_P=5, L_P=21, AWGN, Monte Carlo", "M_P=5, L_P=21, AWGN, analytic", "M_P=5, L_P=21, RAYLEIGH, Monte Carlo",
    }
    for r in rows[1:]:
        assert r[0] == "P_FA"
        assert (r[4] == "") == r[2].endswith("analytic")
        float(r[3])
    manifest = json.loads((out / "roc.manifest.json").read_text())
    assert manifest["seed"] == 0
    assert manifest["config"]["trials"] == 2000
    assert manifest["config"]["kind"] == "roc"
    assert manifest["outputs"] == [str(out / "roc.csv")]


def test_se_output_has_upper_bound(tmp_path):
    code = cli.main(["se", "--out", str(tmp_path), "--trials", "50", "--snr-j-db", "-20", "0",
                     "--channel", "awgn", "--lp", "21"])
    assert code == cli.EXIT_OK
    series = {r[2] for r in read_rows(tmp_path / "se.csv")[1:]}
    assert series == {"no blanking, no jamming, AWGN", "M_P=5, L_P=21, AWGN"}


def test_validate_is_byte_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("JAMGUARD_THREADS", "1")
    assert cli.main(["validate", "--seed", "42", "--trials", "20000", "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("JAMGUARD_THREADS", "3")
    assert cli.main(["validate", "--seed", "42", "--trials", "20000", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "validate.csv").read_bytes() == (tmp_path / "b" / "validate.csv").read_bytes()


def test_validation_failure_exit(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run", lambda c: ScenarioResult(c.kind, passed=False, warnings=["case 0 off"]))
    assert cli.main(["validate", "--out", str(tmp_path)]) == cli.EXIT_VALIDATION
    assert (tmp_path / "validate.csv").exists()


def test_io_error_exit(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["md-opt", "--pfa", "1e-3", "--out", str(blocker / "sub")]) == cli.EXIT_IO


def test_csv_number_format(tmp_path):
    result = ScenarioResult(ScenarioKind.MD_OPT)
    result.add("P_FA", 1e-3, "s", 0.1 + 0.2)
    cli.write_csv(result, tmp_path / "x.csv")
    rows = read_rows(tmp_path / "x.csv")
    assert rows[1] == ["P_FA", "0.001", "s", "0.30000000000000004", ""]


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "jamguard", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("jamguard ")
