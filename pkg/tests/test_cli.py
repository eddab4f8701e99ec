"""Command line front end tests.

Everything drives ``main(argv)`` directly; no subprocesses. Sweep invocations
are kept to one or two cells with a couple of trials so the module runs in
seconds.
"""

import json

import numpy as np
import pytest

from afdmest.cli import _coerce, _parse_config_file, main
from afdmest.harness import CSV_HEADER


class TestConfigFile:
    def test_parses_flat_key_value(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text(
            "# full-line comment\n"
            "\n"
            "trials_per_point = 4\n"
            "snr_db_list = 0,10,20  # trailing comment\n"
            "estimators=joint,integer_only\n"
        )
        got = _parse_config_file(str(p))
        assert got == {
            "trials_per_point": "4",
            "snr_db_list": "0,10,20",
            "estimators": "joint,integer_only",
        }

    def test_rejects_line_without_equals(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("trials_per_point\n")
        with pytest.raises(ValueError, match="bad.cfg:1"):
            _parse_config_file(str(p))

    def test_coerce_types(self):
        assert _coerce("c_list", "8, 10") == (8, 10)
        assert _coerce("snr_db_list", "0,2.5") == (0.0, 2.5)
        assert _coerce("estimators", "joint") == ("joint",)
        assert _coerce("trials_per_point", "7") == 7
        assert _coerce("master_seed", "42") == 42

    def test_coerce_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config key"):
            _coerce("bogus", "1")


SWEEP_FAST = [
    "sweep",
    "--quiet",
    "--snr-db",
    "20",
    "--trials",
    "2",
    "--frames",
    "1",
    "--estimators",
    "joint",
]


class TestSweepCommand:
    def test_writes_csv_and_json(self, tmp_path):
        csv_p = tmp_path / "r.csv"
        json_p = tmp_path / "r.json"
        rc = main(SWEEP_FAST + ["--out-csv", str(csv_p), "--out-json", str(json_p)])
        assert rc == 0

        lines = csv_p.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2  # one cell, one estimator

        obj = json.loads(json_p.read_text())
        assert obj["schema_version"] == 1
        assert obj["config"]["trials_per_point"] == 2
        assert obj["config"]["snr_db_list"] == [20.0]
        assert [r["estimator"] for r in obj["rows"]] == ["joint"]

    def test_stdout_when_no_csv_path(self, capsys):
        rc = main(SWEEP_FAST)
        assert rc == 0
        out = capsys.readouterr()
        assert out.out.splitlines()[0] == CSV_HEADER
        assert out.err == ""  # --quiet kills the progress lines

    def test_progress_lines_on_stderr(self, capsys):
        argv = [a for a in SWEEP_FAST if a != "--quiet"]
        assert main(argv) == 0
        err = capsys.readouterr().err
        assert "cell 1/1 done" in err

    def test_cli_flag_overrides_config_file(self, tmp_path):
        cfg_p = tmp_path / "exp.cfg"
        cfg_p.write_text(
            "trials_per_point = 5\n"
            "snr_db_list = 0\n"
            "estimators = integer_only\n"
            "master_seed = 9\n"
        )
        json_p = tmp_path / "r.json"
        rc = main(
            [
                "sweep",
                "--quiet",
                "--config",
                str(cfg_p),
                "--trials",
                "2",
                "--frames",
                "1",
                "--out-csv",
                str(tmp_path / "r.csv"),
                "--out-json",
                str(json_p),
            ]
        )
        assert rc == 0
        cfg = json.loads(json_p.read_text())["config"]
        assert cfg["trials_per_point"] == 2  # flag wins
        assert cfg["snr_db_list"] == [0.0]  # file survives where no flag given
        assert cfg["estimators"] == ["integer_only"]
        assert cfg["master_seed"] == 9

    def test_unknown_estimator_rejected(self):
        with pytest.raises(ValueError, match="unknown estimator"):
            main(SWEEP_FAST[:-1] + ["psychic"])

    def test_missing_subcommand_exits(self):
        with pytest.raises(SystemExit):
            main([])


class TestValidateCommand:
    def test_exit_zero_and_report(self, capsys):
        rc = main(["validate", "--draws", "5", "--seed", "11"])
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert len(out) == 4
        assert all(line.startswith("PASS") for line in out)


def parse_dump(text):
    lines = text.strip().splitlines()
    assert lines[0] == "j,measured,exact_model,envelope"
    rows = [line.split(",") for line in lines[1:]]
    j = np.array([int(r[0]) for r in rows])
    cols = np.array([[float(v) for v in r[1:]] for r in rows])
    return j, cols[:, 0], cols[:, 1], cols[:, 2]


class TestProfileDump:
    def test_stdout_profile_matches_models(self, capsys):
        rc = main(["profile-dump"])
        assert rc == 0
        j, measured, exact, env = parse_dump(capsys.readouterr().out)
        # decode band plus one comb period of margin on each side
        assert j[0] == -12 and j[-1] == 35
        # defaults are delay 1.5, Doppler 2.25. The half-sample delay splits
        # the energy across the taps at j = 2+8 and j = 2+16; the late one
        # wins the near-tie here, and every column agrees on it.
        k = int(np.argmax(measured))
        assert j[k] == 18
        assert int(np.argmax(exact)) == k
        assert int(np.argmax(env)) == k
        # measured column is rescaled onto the exact-sum scale
        assert measured[k] == pytest.approx(exact[k], rel=0.05)
        for a, b in ((measured, exact), (measured, env)):
            a0, b0 = a - a.mean(), b - b.mean()
            corr = float(np.dot(a0, b0) / (np.linalg.norm(a0) * np.linalg.norm(b0)))
            assert corr > 0.99

    def test_out_file_and_channel_flags(self, tmp_path):
        p = tmp_path / "prof.csv"
        rc = main(
            ["profile-dump", "--delay", "2.0", "--doppler", "-1.0", "--out", str(p)]
        )
        assert rc == 0
        j, measured, exact, env = parse_dump(p.read_text())
        # integer channel: every model puts the whole peak on one bin
        k = int(np.argmax(measured))
        assert j[k] == -1 + 8 * 2
        assert measured[k] == pytest.approx(256.0, rel=1e-6)
        assert exact[k] == pytest.approx(256.0, abs=1e-9)
        assert env[k] == pytest.approx(256.0, abs=1e-9)

    def test_with_data_still_peaks_on_pilot(self, capsys):
        """Data symbols leak into the readout region but must not bury the
        pilot: the peak stays on one of the two split taps."""
        rc = main(["profile-dump", "--with-data", "--seed", "4"])
        assert rc == 0
        j, measured, exact, env = parse_dump(capsys.readouterr().out)
        assert j[int(np.argmax(measured))] in (10, 18)
