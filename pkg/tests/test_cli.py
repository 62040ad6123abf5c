import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from distcolor import FirstFit, Mode, Ordering, RandomX, StaggeredFirstFit, check_validity, load_edge_list
from distcolor.cli import main, parse_config


@pytest.fixture
def p3(tmp_path):
    f = tmp_path / "p3.txt"
    f.write_text("0 1\n1 2\n")
    return f


def read_csv(path):
    return list(csv.DictReader(open(path, encoding="utf-8")))


def test_parse_quality_preset():
    cfg = parse_config(["color", "--graph", "rmat:12,8,0.45,0.15,0.15,0.25", "--parts", "block:8",
                        "--preset", "quality"])
    rc = cfg.run
    assert rc.selection == RandomX(5) and rc.perm == "nd" and rc.recolor_iters == 1
    assert rc.ordering is Ordering.INTERNAL_FIRST and rc.mode is Mode.SYNC
    assert cfg.parts == "block:8" and rc.seed == 0


def test_parse_speed_preset_and_overrides():
    rc = parse_config(["color", "--rmat", "8", "--preset", "speed"]).run
    assert rc.recolor_iters == 0 and rc.selection == FirstFit()
    rc = parse_config(["color", "--rmat", "8", "--preset", "speed", "--selection", "sff:9",
                       "--mode", "async", "--superstep", "7", "--no-piggyback"]).run
    assert rc.selection == StaggeredFirstFit(9) and rc.mode is Mode.ASYNC
    assert rc.superstep == 7 and rc.piggyback is False and rc.ordering is Ordering.INTERNAL_FIRST


@pytest.mark.parametrize("argv", [
    ["color", "--rmat", "8", "--selection", "randx:0"],
    ["color", "--rmat", "8", "--superstep", "0"],
    ["color", "--rmat", "8", "--bogus"],
    ["color", "--rmat", "8", "--graph", "x.mtx"],
    ["color", "--rmat", "8", "--parts", "round:3"],
    ["color", "--rmat", "8", "--parts", "block:0"],
    ["color", "--rmat", "8", "--perm", "sideways"],
    ["color", "--graph", "rmat:8,8,0.5,0.5,0.5,0.5"],
    ["color"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_config(argv)
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_color_p3_speed(p3, tmp_path):
    out = tmp_path / "c.txt"
    assert main(["color", "--graph", str(p3), "--preset", "speed", "--coloring-out", str(out),
                 "--metrics-csv", str(tmp_path / "m.csv")]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    colors = np.array([int(x.split()[1]) for x in lines])
    assert colors.min() >= 1
    assert check_validity(load_edge_list(open(p3)), colors) == []


def test_invalid_partition_file(p3, tmp_path, capsys):
    bad = tmp_path / "bad.part"
    bad.write_text("0\n3\n1\n")
    assert main(["color", "--graph", str(p3), "--parts", f"file:{bad}", "--nparts", "2"]) != 0
    assert "PartitionError" in capsys.readouterr().err
    bad.write_text("0\n0\n5\n")
    assert main(["color", "--graph", str(p3), "--parts", f"file:{bad}"]) != 0


def test_missing_file(tmp_path, capsys):
    assert main(["color", "--graph", str(tmp_path / "nope.mtx")]) == 1
    assert "error" in capsys.readouterr().err


def test_quality_trajectory(tmp_path):
    traj = tmp_path / "t.csv"
    js = tmp_path / "m.json"
    assert main(["color", "--graph", "rmat:10", "--parts", "block:4", "--preset", "quality",
                 "--trajectory-csv", str(traj), "--metrics-csv", str(tmp_path / "m.csv"),
                 "--metrics-json", str(js)]) == 0
    rows = read_csv(traj)
    assert [r["iteration"] for r in rows] == ["0", "1"]
    assert int(rows[1]["num_colors"]) <= int(rows[0]["num_colors"])
    assert json.loads(js.read_text())[0]["num_colors"] == int(rows[1]["num_colors"])


def test_outputs_are_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        m = tmp_path / f"m{i}.csv"
        assert main(["color", "--graph", "rmat:10,8,0.45,0.15,0.15,0.25", "--parts", "block:8",
                     "--selection", "randx:5", "--recolor-iters", "2", "--seed", "4",
                     "--metrics-csv", str(m)]) == 0
        outs.append(m.read_bytes())
    assert outs[0] == outs[1] and b"\r" not in outs[0]


def test_generate_partition_color_recolor_chain(tmp_path):
    g = tmp_path / "g.mtx"
    part = tmp_path / "g.part"
    col = tmp_path / "c.txt"
    col2 = tmp_path / "c2.txt"
    assert main(["generate", "--rmat", "9", "--seed", "3", "--out", str(g)]) == 0
    assert main(["partition", "--mtx", str(g), "--parts", "block:3", "--out", str(part)]) == 0
    assert len(part.read_text().split()) == 512
    assert main(["color", "--graph", str(g), "--parts", f"file:{part}", "--mode", "async",
                 "--ordering", "sl", "--coloring-out", str(col), "--metrics-csv", str(tmp_path / "a.csv")]) == 0
    assert main(["recolor", "--graph", str(g), "--parts", f"file:{part}", "--coloring", str(col),
                 "--perm", "nd-rand-pow2", "--recolor-iters", "4", "--coloring-out", str(col2),
                 "--metrics-csv", str(tmp_path / "b.csv")]) == 0
    before = max(int(x.split()[1]) for x in col.read_text().splitlines())
    after = max(int(x.split()[1]) for x in col2.read_text().splitlines())
    assert after <= before


def test_recolor_rejects_conflicting_input(p3, tmp_path, capsys):
    col = tmp_path / "c.txt"
    col.write_text("0 1\n1 1\n2 2\n")
    assert main(["recolor", "--graph", str(p3), "--coloring", str(col)]) == 1
    assert "InvalidColoringError" in capsys.readouterr().err


def test_sweep_command(tmp_path):
    m = tmp_path / "s.csv"
    t = tmp_path / "t.csv"
    assert main(["sweep", "--graph", "rmat:9", "--graph", "rmat:8", "--parts", "block:2",
                 "--preset", "speed", "--preset", "quality", "--seeds", "2",
                 "--metrics-csv", str(m), "--trajectory-csv", str(t)]) == 0
    rows = read_csv(m)
    assert len(rows) == 8 and {r["config"] for r in rows} == {"speed", "quality"}


def test_max_rounds_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DISTCOLOR_MAX_ROUNDS", "1")
    assert main(["color", "--graph", "rmat:9", "--parts", "block:4", "--metrics-csv",
                 str(tmp_path / "m.csv")]) == 1
    assert "ConvergenceError" in capsys.readouterr().err


def test_seed_random_is_reported(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "distcolor.cli", "color", "--graph", "rmat:6",
                           "--seed", "random", "--metrics-csv", str(tmp_path / "m.csv")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stderr.startswith("seed: ")
