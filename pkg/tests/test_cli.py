import json
import re
import subprocess
import sys

import pytest

from oracles import eca_rows, rule90_row
from selfish_ca.cli import CSV_HEADER, main


def read_ppm_cells(path):
    magic, dims, _, rest = path.read_bytes().split(b"\n", 3)
    assert magic == b"P6"
    width, height = map(int, dims.split())
    pixels = [rest[i : i + 3] for i in range(0, len(rest), 3)]
    palette = {b"\xff\xff\xff": 0, b"\x80\x80\x80": 1, b"\x00\x00\x00": 2}
    return [[palette[pixels[r * width + c]] for c in range(width)] for r in range(height)]


def tournament_args(tmp_path, name, *extra):
    return [
        "tournament",
        "--out", str(tmp_path / f"{name}.csv"),
        "--summary", str(tmp_path / f"{name}.json"),
        *extra,
    ]


# -- run ----------------------------------------------------------------------


def test_run_solo_black_90(tmp_path, capsys):
    out, metrics = tmp_path / "r90.ppm", tmp_path / "r90.json"
    assert main(["run", "--solo", "black", "--black", "90", "--steps", "200", "--out", str(out), "--metrics", str(metrics)]) == 0
    cells = read_ppm_cells(out)
    assert len(cells) == 201 and len(cells[0]) == 401
    for t in (1, 2, 4, 8, 16, 32, 64, 128):
        assert {x - 200 for x, c in enumerate(cells[t]) if c == 2} == rule90_row(t) == {-t, t}
    doc = json.loads(metrics.read_text())
    assert doc["metrics"]["outcome"] == "black_only"
    assert doc["provenance"]["flags"].startswith("run --black 90 --grey 110 --solo black --steps 200")
    assert doc["provenance"]["tool"] == "selfish-ca"


def test_run_solo_black_110(tmp_path):
    out = tmp_path / "r110.ppm"
    assert main(["run", "--solo", "black", "--black", "110", "--steps", "200", "--out", str(out), "--metrics", str(tmp_path / "m.json")]) == 0
    cells = read_ppm_cells(out)
    for t, expected in enumerate(eca_rows(110, 200, {0})):
        assert {x - 200 for x, c in enumerate(cells[t]) if c == 2} == expected


def test_run_interaction(tmp_path):
    out, metrics = tmp_path / "i.ppm", tmp_path / "i.json"
    argv = ["run", "--black", "90", "--grey", "110", "--steps", "200", "--sep", "40", "--seed", "7", "--out", str(out), "--metrics", str(metrics)]
    assert main(argv) == 0
    doc = json.loads(metrics.read_text())
    assert doc["run"]["separation"] == 40 and doc["run"]["seed"] == 7
    assert len(doc["run"]["mixed_outcomes"]) == 12
    assert doc["image"]["width"] == 2 * 200 + 41 and doc["image"]["height"] == 201
    m = doc["metrics"]
    assert sum(m["final_counts"].values()) == 441
    assert m["outcome"] in {"black_only", "grey_only", "coexist", "extinct"}
    assert len(m["counts_per_row"]) == 201
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["run", "--black", "300"], "--black"),
        (["run", "--grey", "-1"], "--grey"),
        (["run", "--steps", "x"], "--steps"),
        (["run", "--sep", "0"], "--sep"),
        (["tournament", "--samples", "0"], "--samples"),
        (["tournament", "--black-rules", "5-400"], "--black-rules"),
        (["tournament", "--seps", "1,0"], "--seps"),
        (["tournament", "--steps", "1", "--seps", "1", "--k", "9"], "--k"),
        (["decode", "--black", "256"], "--black"),
    ],
)
def test_invalid_flags_exit_2(argv, flag, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert f"argument {flag}" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_run_unwritable_output_leaves_nothing(tmp_path, capsys):
    missing = tmp_path / "nope" / "x.ppm"
    assert main(["run", "--steps", "5", "--out", str(missing), "--metrics", str(tmp_path / "m.json")]) == 1
    assert "--out" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_render_to_stdout():
    proc = subprocess.run(
        [sys.executable, "-m", "selfish_ca", "render", "--solo", "grey", "--grey", "90", "--steps", "4", "--out", "-"],
        capture_output=True, check=True,
    )
    assert proc.stdout.startswith(b"P6\n9 5\n255\n")
    assert len(proc.stdout) == len(b"P6\n9 5\n255\n") + 3 * 9 * 5


# -- tournament ---------------------------------------------------------------


def test_tournament_one_pair_two_samples(tmp_path):
    args = tournament_args(tmp_path, "t", "--black-rules", "90", "--grey-rules", "110", "--samples", "2", "--seps", "40", "--steps", "64", "--workers", "1")
    assert main(args) == 0
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "# selfish-ca v0.1.0 flags: tournament --black-rules 90 --grey-rules 110 --samples 2 --steps 64 --seps 40 --seed 1 --k 4"
    assert lines[1] == CSV_HEADER
    rows = [l for l in lines[2:] if not l.startswith("#")]
    assert len(rows) == 2
    assert lines[-1] == "# records: 2"
    for row in rows:
        fields = row.split(",")
        assert len(fields) == 13
        assert fields[:4] == ["90", "110", fields[2], "40"]
        assert fields[6] in {"black_only", "grey_only", "coexist", "extinct"}
        assert int(fields[7]) + int(fields[8]) + int(fields[9]) == 2 * 64 + 41
    summary = json.loads((tmp_path / "t.json").read_text())
    assert summary["record_count"] == 2
    (pair,) = summary["pairs"]
    assert pair["trials"] == 2
    assert sum(pair["outcome_frequencies"].values()) == pytest.approx(1.0, abs=1e-9)
    assert not (tmp_path / "t.csv.partial").exists()


def test_tournament_byte_identical_reruns(tmp_path):
    common = ("--black-rules", "28-31", "--grey-rules", "105-110", "--samples", "3", "--seps", "2,9", "--steps", "32", "--seed", "77")
    assert main(tournament_args(tmp_path, "a", *common, "--workers", "1")) == 0
    assert main(tournament_args(tmp_path, "b", *common, "--workers", "1")) == 0
    assert main(tournament_args(tmp_path, "c", *common, "--workers", "4")) == 0
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "c.json").read_bytes()
    assert a.count(b"\n") == 2 + 4 * 6 * 3 * 2 + 1


def test_tournament_unwritable_output_fails_fast(tmp_path, capsys):
    args = ["tournament", "--out", str(tmp_path / "missing" / "r.csv"), "--summary", str(tmp_path / "s.json")]
    assert main(args) == 1
    assert "--out" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_tournament_failure_leaves_partial_marker(tmp_path, monkeypatch):
    import selfish_ca.cli as cli

    def broken(plan, workers):
        from selfish_ca.tournament import run_pair

        yield run_pair(90, 110, plan)
        raise OSError("disk full")

    monkeypatch.setattr(cli, "run_tournament", broken)
    args = tournament_args(tmp_path, "p", "--black-rules", "90", "--grey-rules", "110,111", "--samples", "1", "--seps", "3", "--steps", "8")
    assert main(args) == 1
    assert not (tmp_path / "p.csv").exists()
    partial = (tmp_path / "p.csv.partial").read_text().splitlines()
    assert partial[-1] == "# PARTIAL: aborted after 1 records"


# -- decode -------------------------------------------------------------------


def test_decode_listing(capsysbinary):
    assert main(["decode", "--black", "90", "--grey", "110", "--seed", "1"]) == 0
    text = capsysbinary.readouterr().out.decode("utf-8")
    table = [l for l in text.splitlines() if re.match(r"^⟨\d,\d,\d⟩ -> \d", l)]
    assert len(table) == 27
    assert table[0].startswith("⟨0,0,0⟩ -> 0")
    assert sum("[mixed" in l for l in table) == 12
    assert all("seed 1" in l for l in table if "[mixed" in l)
    assert "# black rule 90: 111->0 110->1 101->0 100->1 011->1 010->0 001->1 000->0" in text
    assert "# grey rule 110: 111->0 110->1 101->1 100->0 011->1 010->1 001->1 000->0" in text
    # sampled entries follow the frozen trace for seed 1, pair (90, 110), sample 0
    mixed = [int(l.split("->")[1].split()[0]) for l in table if "[mixed" in l]
    assert mixed == [2, 0, 2, 1, 0, 0, 0, 2, 2, 1, 0, 1]


def test_decode_odd_rule_note(capsysbinary):
    assert main(["decode", "--black", "1", "--grey", "110"]) == 0
    text = capsysbinary.readouterr().out.decode("utf-8")
    assert "⟨0,0,0⟩ -> 0" in text and "forced to 0" in text


# -- help ---------------------------------------------------------------------


@pytest.mark.parametrize("command", ["run", "render", "tournament", "decode"])
def test_help_lists_defaults(command, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out.split("options:", 1)[1]
    flags = re.findall(r"^\s+(--[a-z-]+)", out, flags=re.M)
    assert flags
    for flag in flags:
        if flag in ("--help",):
            continue
        block = out.split(flag, 1)[1].split("\n  --", 1)[0]
        assert "default" in block, flag
