import csv
import io
import json
import subprocess
import sys

import pytest

from shieldperc.cli import main

TAGS = {"closed_form", "dp_exact", "monte_carlo", "golden_constant"}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _numbers_tagged(row, keys):
    for k, v in row.items():
        if k in keys:
            continue
        assert isinstance(v, dict) and v["provenance"] in TAGS, (k, v)


def test_table1_csv(capsys):
    code, out, _ = run(capsys, "table1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["d"]) for r in rows] == list(range(9, 19))
    assert float(rows[1]["lhs1"]) == pytest.approx(0.8975950, abs=1e-6)
    assert all(r["provenance"] == "closed_form" for r in rows)
    # 9 significant digits
    assert rows[0]["lhs1"] == "0.953734546"


def test_bounds_json(capsys):
    code, out, _ = run(capsys, "bounds", "--dim", "7", "--margin", "1e-5")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["p_lower"]["value"] == pytest.approx(0.0812421, abs=5e-4)
    assert row["p_c"]["provenance"] == "golden_constant"
    _numbers_tagged(row, {"d"})


def test_simulate_p_zero(capsys):
    code, out, _ = run(capsys, "simulate", "--dim", "2", "--n", "5", "--p", "0", "--trials", "1")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["mean"]["value"] == 32
    _numbers_tagged(row, {"d", "n", "p", "trials", "seed"})


def test_simulate_single_stream(capsys):
    code, out, _ = run(capsys, "simulate", "--dim", "2", "--n", "4", "--p", "0",
                       "--stream", "3", "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["N_n"] == "16" and row["provenance"] == "monte_carlo"


def test_byte_identical(capsys):
    args = ["simulate", "--dim", "2", "--n", "4", "--p", "0.2", "--trials", "500", "--seed", "9"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_table2_pc_file(tmp_path, capsys):
    path = tmp_path / "pc.csv"
    path.write_text("d,p_c\n" + "".join(f"{d},0.05\n" for d in range(5, 10)))
    code, out, _ = run(capsys, "table2", "--pc-file", str(path))
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["exceeds_pc"]["value"] for r in rows] == [False, True, True, True, True]


def test_oracle_and_walks(capsys):
    code, out, _ = run(capsys, "oracle", "--dim", "2", "--n", "3")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["total_violations"]["value"] == 0
    code, out, _ = run(capsys, "oracle", "--dim", "2", "--n", "1", "--kind", "second-moment", "--p", "0.3")
    assert json.loads(out)["rows"][0]["equal"]["value"] is True
    code, out, _ = run(capsys, "walks", "--dim", "4", "--n", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[1]["p_tau"]) == 0.25 and rows[1]["provenance"] == "dp_exact"


def test_pretty_format(capsys):
    code, out, _ = run(capsys, "bounds", "--dim", "6", "--format", "pretty")
    assert code == 0 and "p_lower" in out and "(closed_form)" in out


def test_exit_codes(capsys):
    assert run(capsys, "bounds", "--dim", "3")[0] == 1
    code, _, err = run(capsys, "simulate", "--dim", "2", "--n", "3", "--p", "2")
    assert code == 1 and "--p" in err
    assert run(capsys, "oracle", "--dim", "3", "--n", "9")[0] == 2
    assert run(capsys, "walks", "--dim", "6", "--n", "12", "--cap-states", "10")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "--bogus"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 64


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "shieldperc.cli", "table1", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert len(res.stdout.strip().splitlines()) == 11
