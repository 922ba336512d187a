import json
import subprocess
import sys

import numpy as np
import pytest

from compspace import bdm, ctm, tables
from compspace.cli import main
from compspace.machine import MachineSpace

from conftest import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_run_space_22(capsys):
    code, out, _ = run(capsys, "run-space", "--states", 2, "--symbols", 2, "--budget", 200)
    assert code == 0
    s = json.loads(out)
    assert s["total"] == 10_000
    assert s["halting_count"] + s["censored"] == 10_000
    assert s["max_steps"] == 6


def test_budget_zero_is_usage_error(capsys):
    code, _, err = run(capsys, "run-space", "--budget", 0)
    assert code == 2
    assert json.loads(err)["exit"] == 2


def test_range_out_of_space(capsys):
    code, _, _ = run(capsys, "run-space", "--start", 5, "--end", 20_000)
    assert code == 2


def test_unsupported_space(capsys):
    code, _, _ = run(capsys, "enumerate", "--states", 60, "--symbols", 10)
    assert code == 4


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--limit", 2)
    lines = out.splitlines()
    assert json.loads(lines[0])["size"] == 10_000
    assert lines[1] == "0 H0 H0 H0 H0"
    assert lines[2] == "1 H1 H0 H0 H0"


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"states": 2, "symbols": 2, "budget": 3}))
    _, a, _ = run(capsys, "run-space", "--config", cfg)
    _, b, _ = run(capsys, "run-space", "--config", cfg, "--budget", 200)
    assert json.loads(a)["budget"] == 3
    assert json.loads(b)["budget"] == 200
    assert json.loads(a)["halting_count"] < json.loads(b)["halting_count"]


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    code, _, err = run(capsys, "run-space", "--config", cfg)
    assert code == 2 and "colour" in err


def test_config_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, "run-space", "--config", tmp_path / "nope.json")
    assert code == 5


def test_records_deterministic_across_threads(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "run-space", "--dim", 2, "--end", 5000, "--budget", 100, "--records", a, "--threads", 1)
    run(capsys, "run-space", "--dim", 2, "--end", 5000, "--budget", 100, "--records", b, "--threads", 2)
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["config"]["budget"] == 100 and len(meta["config_hash"]) == 16

    _, one, _ = run(capsys, "run-space", "--end", 500, "--threads", 1)
    _, two, _ = run(capsys, "run-space", "--end", 500, "--threads", 2)
    assert one == two


def test_ctm_build_then_query(tmp_path, capsys):
    out = tmp_path / "t.ctm"
    code, _, _ = run(capsys, "ctm", "build", "--budget", 100, "--out", out)
    assert code == 0
    table = ctm.table_for_space(MachineSpace(2, 2), 100)
    assert ctm.load_table(out) == table
    code, line, _ = run(capsys, "ctm", "query", "0110", "--table", out)
    s, count, ap, value = line.strip().split(",")
    assert (s, int(count)) == ("0110", table.count("0110"))
    assert float(ap) == pytest.approx(table.ap("0110"), rel=1e-11)
    assert float(value) == pytest.approx(table.ctm("0110"), rel=1e-11)


def test_query_single_symbols_tie(capsys):
    _, a, _ = run(capsys, "ctm", "query", "0")
    _, b, _ = run(capsys, "ctm", "query", "1")
    assert a.split(",")[1:] == b.split(",")[1:]
    t = tables.load("1d-3-2")
    assert float(a.split(",")[3]) == pytest.approx(min(t.ctm(k) for k in t.counts))


def test_query_absent(capsys):
    code, _, err = run(capsys, "ctm", "query", "0110100110010110")
    assert code == 3
    assert json.loads(err)["error"] == "NotInSupportError"


def test_ctm_symmetry_build_and_merge(tmp_path, capsys):
    full, a, b, m = (tmp_path / n for n in ("full.ctm", "a.ctm", "b.ctm", "m.ctm"))
    run(capsys, "ctm", "build", "--budget", 100, "--symmetry", "--out", full)
    run(capsys, "ctm", "build", "--budget", 100, "--end", 4000, "--out", a)
    run(capsys, "ctm", "build", "--budget", 100, "--start", 4000, "--out", b)
    assert run(capsys, "ctm", "merge", a, b, "--out", m)[0] == 0
    assert m.read_bytes() == full.read_bytes()
    code, _, _ = run(capsys, "ctm", "build", "--symmetry", "--end", 10, "--out", tmp_path / "x.ctm")
    assert code == 2


def test_merge_mismatch(tmp_path, capsys):
    a, b = tmp_path / "a.ctm", tmp_path / "b.ctm"
    run(capsys, "ctm", "build", "--budget", 50, "--end", 100, "--out", a)
    run(capsys, "ctm", "build", "--budget", 60, "--end", 100, "--out", b)
    assert run(capsys, "ctm", "merge", a, b, "--out", tmp_path / "m.ctm")[0] == 4


def test_malformed_table(tmp_path, capsys):
    bad = tmp_path / "bad.ctm"
    bad.write_text("#ctm v1 dim=1 states=2 symbols=2 budget=1 total=1 halting=1\n0;1\n")
    code, _, err = run(capsys, "ctm", "query", "0", "--table", bad)
    assert code == 5 and "line 2" in err


def test_bdm_zero_8x8(tmp_path, capsys, table4x4):
    f, t = tmp_path / "z.txt", tmp_path / "t.ctm"
    f.write_text("00000000\n" * 8)
    ctm.save_table(table4x4, t)
    code, out, _ = run(capsys, "bdm", "--input", f, "--table", t, "--format", "json")
    assert code == 0
    row = json.loads(out)
    assert row["bdm"] == table4x4.ctm("4x4:" + "0" * 16) + 2
    assert (row["d"], row["boundary"], row["entropy"]) == (4, "exact", 0.0)


def test_bdm_indivisible(tmp_path, capsys):
    f = tmp_path / "g.txt"
    f.write_text("0000000000\n" * 10)
    code, _, _ = run(capsys, "bdm", "--input", f, "--table", "2d-4-2-sample")
    assert code == 4


def test_bdm_matches_library_on_fixtures(tmp_path, capsys):
    t = tables.load("2d-4-2-sample")
    base = bdm.BaseTable.from_ctm(t)
    rng = np.random.default_rng(21)
    for n in range(50):
        g = rng.integers(0, 2, (2 * int(rng.integers(1, 5)), 2 * int(rng.integers(1, 5))))
        f = tmp_path / f"g{n}.txt"
        f.write_text("".join("".join(map(str, r)) + "\n" for r in g))
        code, out, _ = run(capsys, "bdm", "--input", f, "--table", "2d-4-2-sample", "--block-size", 2)
        header, row = out.splitlines()
        assert header == "input_id,entropy,bdm,d,boundary"
        assert float(row.split(",")[2]) == bdm.bdm_value(g, base, 2)


def test_bdm_missing_block(tmp_path, capsys):
    f = tmp_path / "s.txt"
    f.write_text("0110100110010110\n")
    code, _, err = run(capsys, "bdm", "--input", f, "--block-size", 16)
    assert code == 3 and "0110100110010110" in err


def test_aid_flips_report(tmp_path, capsys):
    f = tmp_path / "g.txt"
    f.write_text("010011\n110100\n001011\n111000\n")
    csv_out, json_out = tmp_path / "r.csv", tmp_path / "r.json"
    args = ("aid", "--input", f, "--block-size", 2, "--out-csv", csv_out, "--out-json", json_out)
    assert run(capsys, *args)[0] == 0
    first = csv_out.read_bytes()
    assert len(first.decode().splitlines()) == 1 + 24
    assert len(json.loads(json_out.read_text())["entries"]) == 24
    run(capsys, *args)
    assert csv_out.read_bytes() == first


def test_aid_k4_edges(tmp_path, capsys):
    f = tmp_path / "k4.txt"
    f.write_text("0111\n1011\n1101\n1110\n")
    code, out, _ = run(capsys, "aid", "--input", f, "--family", "edges", "--block-size", 2)
    assert code == 0
    assert len(out.splitlines()) == 7


def test_aid_1d_input(tmp_path, capsys):
    f = tmp_path / "s.txt"
    f.write_text("0101\n")
    assert run(capsys, "aid", "--input", f)[0] == 4


def test_eca(capsys):
    code, out, _ = run(capsys, "eca", "--rule", 90, "--width", 7, "--steps", 2)
    assert out == "0001000\n0010100\n0100010\n"
    assert run(capsys, "eca", "--rule", 300)[0] == 2
    assert run(capsys, "eca")[0] == 2


def test_render_golden_and_capacity(tmp_path, capsys):
    out = tmp_path / "f.ppm"
    assert run(capsys, "render", "--budget", 500, "--level", 5, "--out", out, "--sidecar", tmp_path / "s.csv")[0] == 0
    with open(f"{DATA}/field_2_2_k5.ppm", "rb") as fh:
        assert out.read_bytes() == fh.read()
    assert run(capsys, "render", "--level", 2, "--out", tmp_path / "x.ppm")[0] == 4


def test_render_from_records(tmp_path, capsys):
    rec, a, b = tmp_path / "r.csv", tmp_path / "a.ppm", tmp_path / "b.ppm"
    run(capsys, "run-space", "--budget", 500, "--records", rec)
    run(capsys, "render", "--records", rec, "--out", a)
    run(capsys, "render", "--budget", 500, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_render_no_halting_is_white(tmp_path, capsys):
    rec = tmp_path / "r.csv"
    rec.write_text("index,halted,steps,output\n" + "".join(f"{i},0,10,\n" for i in range(9)))
    out = tmp_path / "w.ppm"
    assert run(capsys, "render", "--records", rec, "--out", out)[0] == 0
    assert out.read_bytes() == b"P6\n3 3\n255\n" + b"\xff" * 27


def test_pipeline_deterministic(tmp_path, capsys):
    def pipeline(d, threads):
        d.mkdir()
        run(capsys, "run-space", "--dim", 2, "--budget", 200, "--records", d / "r.csv", "--threads", threads)
        run(capsys, "ctm", "build", "--dim", 2, "--budget", 200, "--out", d / "t.ctm", "--threads", threads)
        (d / "g.txt").write_text("0110\n1001\n0110\n1001\n")
        run(capsys, "aid", "--input", d / "g.txt", "--table", d / "t.ctm", "--block-size", 1,
            "--out-csv", d / "a.csv")
        run(capsys, "render", "--records", d / "r.csv", "--dim", 2, "--out", d / "f.ppm")
        return [(d / n).read_bytes() for n in ("r.csv", "t.ctm", "a.csv", "f.ppm")]

    assert pipeline(tmp_path / "one", 1) == pipeline(tmp_path / "two", 3)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "compspace", "enumerate", "--limit", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["size"] == 10_000
