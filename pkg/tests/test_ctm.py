import io
import math

import pytest

from compspace import tables
from compspace.bdm import BaseTable, bdm_value
from compspace.ctm import (
    CTMTable,
    ConsistencyError,
    NotInSupportError,
    TableFormatError,
    ap_estimate,
    build_table,
    ctm_value,
    format_table,
    load_table,
    merge_tables,
    parse_table,
    sample_table,
    save_table,
    table_for_space,
)
from compspace.enumeration import IndexRange
from compspace.machine import Dimension, MachineSpace
from compspace.runner import complement_output, mirror_output, run_space

from conftest import DATA, S22, S32, S22_2D


def test_totals_match_summary(run22, table22):
    # complement completion doubles both totals
    assert table22.total_machines == 2 * run22.summary.total
    assert table22.halting_total == 2 * run22.summary.halting_count


def test_uncompleted_table_is_raw_tally(run22):
    raw = build_table(run22.batches, S22, 500, complete=False)
    assert raw.halting_total == run22.summary.halting_count
    assert raw.counts == run22.output_counts()
    # blank-0 tallies are not complement symmetric
    assert raw.counts["00"] != raw.counts["11"]


def test_single_symbols_are_most_probable(table22):
    top = table22.ranked()[:2]
    assert {k for k, _ in top} == {"0", "1"}
    assert table22.ctm("0") == table22.ctm("1") == min(table22.ctm(k) for k in table22.counts)


def test_ap_and_ctm(table22):
    assert math.isclose(sum(table22.ap(k) for k in table22.counts), 1.0)
    for k in ("0", "01", "0110"):
        assert ap_estimate(k, table22) == table22.count(k) / table22.halting_total
        assert ctm_value(k, table22) == pytest.approx(-math.log2(ap_estimate(k, table22)))
    assert ctm_value((0, 1), table22) == ctm_value("01", table22)


def test_not_in_support(table22):
    with pytest.raises(NotInSupportError):
        table22.ctm("0110100110010110")


def test_constant_strings_are_simplest(table32):
    # at length 2 all four strings tie in this table
    assert len({table32.count(k) for k in ("00", "01", "10", "11")}) == 1
    for n in range(3, 7):
        same_length = {k: table32.ctm(k) for k in table32.counts if len(k) == n}
        const = same_length.pop("0" * n)
        assert same_length.pop("1" * n) == const
        assert const < min(same_length.values(), default=math.inf)


def test_merge_properties(table22):
    assert merge_tables(table22, CTMTable.empty(S22, 500)) == table22
    a = table_for_space(S22, 500, IndexRange(0, 3000))
    b = table_for_space(S22, 500, IndexRange(3000, 7000))
    c = table_for_space(S22, 500, IndexRange(7000, 10_000))
    assert merge_tables(a, b) == merge_tables(b, a)
    assert merge_tables(merge_tables(a, b), c) == merge_tables(a, merge_tables(b, c)) == table22


def test_merge_rejects_mismatch(table22):
    with pytest.raises(ConsistencyError):
        merge_tables(table22, CTMTable.empty(S22, 200))
    with pytest.raises(ConsistencyError):
        merge_tables(table22, CTMTable.empty(S32, 500))


def test_table_invariants():
    with pytest.raises(ConsistencyError):
        CTMTable(S22, 10, {"0": 2}, 3, 5)
    with pytest.raises(ConsistencyError):
        CTMTable(S22, 10, {"0": 6}, 6, 5)


def test_file_roundtrip(table22, tmp_path):
    p = tmp_path / "t.ctm"
    save_table(table22, p)
    assert load_table(p) == table22
    text = p.read_text()
    assert text.endswith("\n")
    assert text.splitlines()[0] == f"#ctm v1 dim=1 states=2 symbols=2 budget=500 total=20000 halting={table22.halting_total}"
    assert format_table(load_table(p)) == text


def test_file_roundtrip_2d(tmp_path):
    t = table_for_space(S22_2D, 200)
    buf = io.StringIO()
    save_table(t, buf)
    assert parse_table(buf.getvalue()) == t
    assert any(line.startswith("2x1:") or line.startswith("1x2:") for line in buf.getvalue().splitlines())


def test_hand_written_three_lines():
    text = "#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=6\n0,3\n1,2\n01,1\n"
    t = parse_table(text)
    assert len(t) == 3
    assert t.count("01") == 1 and t.ctm("0") == pytest.approx(1.0)


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("", 1),
        ("#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=1\n0,1", 2),
        ("#ctm v2 dim=1 states=2 symbols=2 budget=100 total=10 halting=1\n0,1\n", 1),
        ("#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=2\n0,1\n0x,1\n", 3),
        ("#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=2\n0,1\n2,1\n", 3),
        ("#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=2\n0,1\n0,1\n", 3),
        ("#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=2\n0,1\n1,zero\n", 3),
        ("#ctm v1 dim=2 states=2 symbols=2 budget=100 total=10 halting=1\n2x2:011,1\n", 2),
        ("#ctm v1 dim=1 states=2 symbols=2 budget=100 total=10 halting=5\n0,1\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(TableFormatError) as err:
        parse_table(text)
    assert err.value.lineno == lineno
    assert str(err.value).startswith(f"line {lineno}:")


def test_external_fixture_serves_bdm():
    # written by hand in the documented format, as another tool would
    t = load_table(f"{DATA}/external_2x2.ctm")
    assert t.space == MachineSpace(2, 2, Dimension.TWO_D)
    base = BaseTable.from_ctm(t)
    grid = [[0, 0, 0, 1], [0, 0, 1, 1]]
    assert bdm_value(grid, base, d=2) == pytest.approx(t.ctm("2x2:0000") + t.ctm("2x2:0111"))


def test_sampling_is_deterministic():
    a = sample_table(S32, 20_000, 100, seed=3)
    b = sample_table(S32, 20_000, 100, seed=3)
    c = sample_table(S32, 20_000, 100, seed=4)
    assert a == b and a != c
    assert a.total_machines == 40_000


def test_bundled_tables_match_recipes():
    t = tables.load("1d-3-2")
    assert (t.space, t.budget) == (S32, 200)
    assert t.total_machines == 2 * S32.size
    t2 = tables.load("2d-4-2-sample")
    assert t2.space == MachineSpace(4, 2, Dimension.TWO_D)
    assert (t2.total_machines, t2.halting_total) == (2_097_152, 290_292)


def test_bundled_2d_table_keys_are_row_major(table2d):
    for k in list(table2d.counts)[:200]:
        shape, cells = k.split(":")
        r, c = map(int, shape.split("x"))
        assert r * c == len(cells)


def test_32_table_symmetric(table32):
    for k, v in table32.counts.items():
        assert table32.counts[complement_output(k)] == v
        assert table32.counts[mirror_output(k)] == v


def test_32_table_matches_run(run32, table32):
    assert table32.halting_total == 2 * run32.summary.halting_count
    assert table32 == build_table(run32.batches, S32, 200)


def test_sharded_build_matches():
    parts = IndexRange.full(S22_2D).split(3)
    merged = CTMTable.empty(S22_2D, 150)
    for r in parts:
        merged = merge_tables(merged, build_table(run_space(S22_2D, r, 150).batches, S22_2D, 150))
    assert merged == table_for_space(S22_2D, 150)
