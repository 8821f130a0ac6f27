import json
import subprocess
import sys

import pytest

from probwave.cli import build_parser, run

FLAGS = {
    "verify": ["--format", "--out", "--seed", "--jobs", "--only"],
    "solve": ["--family", "--a-tt", "--beta", "--beta-s", "--nmax", "--ymax", "--steps"],
    "compare": ["--a-tt", "--beta", "--beta-s", "--nmax"],
    "generate": ["--family", "--omega", "--a-tt", "--order", "--q0", "--tick", "--span", "--n", "--date", "--session"],
    "fit": ["--input", "--lot-size", "--window", "--tick", "--family", "--n-scan", "--starts"],
    "report": ["--input"],
}


@pytest.fixture(scope="module")
def trades_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "trades.csv"
    assert run(["generate", "--format", "csv", "--seed", "3", "--out", str(path)]) == 0
    return path


def read_json(path):
    return json.loads(path.read_bytes())


class TestHelp:
    @pytest.mark.parametrize("command", sorted(FLAGS))
    def test_help_lists_flags(self, command, capsys):
        assert run([command, "--help"]) == 0
        text = capsys.readouterr().out
        for flag in FLAGS[command] + ["--format", "--out", "--seed"]:
            assert flag in text

    def test_unknown_flag(self, capsys):
        assert run(["solve", "--bogus"]) == 2
        assert "unrecognized" in capsys.readouterr().err

    def test_missing_command(self):
        assert run([]) == 2

    def test_missing_required(self):
        assert run(["fit"]) == 2

    @pytest.mark.parametrize("argv", [["solve", "--a-tt", "-1"], ["solve", "--nmax", "x"], ["fit", "--input", "a", "--tick", "0"]])
    def test_bad_values(self, argv):
        assert run(argv) == 2

    def test_mutually_exclusive(self):
        assert run(["generate", "--omega", "2", "--a-tt", "1"]) == 2


class TestSolve:
    def test_nonlocal_ladder(self, tmp_path):
        out = tmp_path / "s.json"
        argv = ["solve", "--family", "nonlocal", "--a-tt", "1", "--beta", "1", "--nmax", "3", "--format", "json"]
        assert run(argv + ["--out", str(out)]) == 0
        payload = read_json(out)
        assert payload["schema"] == "probwave/1" and payload["kind"] == "spectrum"
        assert [lv["energy"] for lv in payload["levels"]] == pytest.approx([1, 3, 5, 7], rel=1e-6)

    def test_schrodinger_csv(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["solve", "--family", "schrodinger", "--nmax", "1", "--format", "csv", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "index,energy,nodes,residual"
        assert float(lines[1].split(",")[1]) == pytest.approx(1.0187929716, rel=1e-5)

    def test_bessel_truncated(self, tmp_path):
        out = tmp_path / "b.json"
        assert run(["solve", "--family", "bessel-truncated", "--nmax", "1", "--out", str(out)]) == 0
        assert read_json(out)["omegas"] == pytest.approx([2.404825557695773, 5.520078110286311], abs=1e-8)

    def test_stdout(self, capsysbinary):
        assert run(["solve", "--nmax", "0"]) == 0
        assert json.loads(capsysbinary.readouterr().out)["levels"][0]["index"] == 0

    def test_domain_error_exit_1(self, tmp_path, capsys):
        out = tmp_path / "e.json"
        assert run(["solve", "--ymax", "2", "--out", str(out)]) == 1
        assert "error" in capsys.readouterr().err
        assert read_json(out)["error"]["type"] == "DomainError"


def test_compare(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["compare", "--nmax", "2", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,nonlocal,schrodinger")
    assert len(lines) == 4


class TestGenerate:
    def test_csv_trades(self, trades_csv):
        lines = trades_csv.read_text().splitlines()
        assert lines[0] == "timestamp,price,volume"
        assert lines[1].startswith("2024-01-02T09:30:00")

    def test_json_distribution(self, tmp_path):
        out = tmp_path / "d.json"
        assert run(["generate", "--family", "kummer", "--a-tt", "1", "--n", "1000", "--out", str(out)]) == 0
        payload = read_json(out)
        assert payload["kind"] == "distribution" and payload["total"] == 1000

    def test_seeded(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run(["generate", "--format", "csv", "--seed", "9", "--n", "5000", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestFit:
    def test_auto_ranked(self, trades_csv, tmp_path):
        out = tmp_path / "fit.json"
        argv = ["fit", "--input", str(trades_csv), "--window", "09:30..15:00", "--tick", "0.01", "--family", "auto", "--seed", "42"]
        assert run(argv + ["--out", str(out)]) == 0
        payload = read_json(out)
        assert payload["kind"] == "fit"
        assert [r["rank"] for r in payload["results"]] == [1, 2, 3, 4, 5]
        assert payload["results"][0]["family"] == "bessel"
        assert payload["results"][0]["params"]["omega"] == pytest.approx(2.0, rel=0.02)
        assert "pointwise" in payload["conservation"]["note"]
        assert payload["meta"]["lot_size"] == 100

    def test_single_family_csv(self, trades_csv, tmp_path):
        out = tmp_path / "fit.csv"
        assert run(["fit", "--input", str(trades_csv), "--family", "kummer", "--n-scan", "0", "--format", "csv", "--out", str(out)]) == 0
        assert out.read_text().splitlines()[0] == "q,f_emp,f_fit"

    def test_missing_file(self, tmp_path, capsys):
        out = tmp_path / "err.json"
        assert run(["fit", "--input", str(tmp_path / "missing.csv"), "--out", str(out)]) == 1
        assert "file not found" in capsys.readouterr().err
        assert read_json(out)["error"]["type"] == "FileNotFoundError"

    def test_empty_window(self, trades_csv, capsys):
        assert run(["fit", "--input", str(trades_csv), "--window", "16:00..17:00", "--format", "csv"]) == 1
        assert "no trades" in capsys.readouterr().err

    def test_bad_window(self, trades_csv):
        assert run(["fit", "--input", str(trades_csv), "--window", "morning"]) == 2

    def test_malformed_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("timestamp,price,volume\n1000,abc,1\n")
        assert run(["fit", "--input", str(bad), "--format", "csv"]) == 1
        assert "line 2" in capsys.readouterr().err

    def test_deterministic(self, trades_csv, tmp_path):
        outs = []
        for i, jobs in enumerate(("1", "1", "4")):
            out = tmp_path / f"f{i}.json"
            assert run(["fit", "--input", str(trades_csv), "--seed", "5", "--jobs", jobs, "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]


class TestReport:
    def test_round_trip(self, trades_csv, tmp_path):
        fit_json, again, points = tmp_path / "f.json", tmp_path / "g.json", tmp_path / "p.csv"
        assert run(["fit", "--input", str(trades_csv), "--family", "bessel", "--out", str(fit_json)]) == 0
        assert run(["report", "--input", str(fit_json), "--out", str(again)]) == 0
        assert again.read_bytes() == fit_json.read_bytes()
        assert run(["report", "--input", str(fit_json), "--format", "csv", "--out", str(points)]) == 0
        assert points.read_text().splitlines()[0] == "q,f_emp,f_fit"

    def test_not_a_report(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text('{"a": 1}')
        assert run(["report", "--input", str(path), "--format", "csv"]) == 1


def test_verify_subset(capsys):
    assert run(["verify", "--only", "2", "--format", "csv"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[1].startswith("2,true,")
    assert "[PASS] 2." in captured.err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "probwave", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("probwave ")


def test_parser_commands():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == set(FLAGS)
