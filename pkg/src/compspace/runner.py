"""Run machines to a step budget and aggregate the results over a space.

Single machines go through the pure-Python simulator in
:mod:`compspace.machine`; whole ranges go through the compiled kernels.
A machine that has not halted within the budget is *censored*: it may
never halt, or it may just need more steps.
"""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import _kernels
from .enumeration import IndexRange, UnsupportedSpaceError, space_size
from .machine import (
    MAX_STEPS,
    Configuration,
    Dimension,
    Halted,
    MachineRule,
    MachineSpace,
    decode_rule,
    step,
)

DEFAULT_CHUNK = 1 << 16
# turmite outputs with more cells than this are re-run in Python
_OUT_CAP_2D = 1024
_MAX_BUDGET_2D = 5000


def default_budget(space: MachineSpace) -> int:
    if space.dimension is Dimension.TWO_D:
        return 1000
    if space.states >= 4:
        return 2000
    return 200


def encode_output(obj) -> str:
    """Canonical text key: ``"0110"`` for strings, ``"2x2:0110"`` for arrays."""
    if isinstance(obj, str):
        return obj
    arr = np.asarray(obj)
    if arr.ndim == 1:
        return "".join(str(int(v)) for v in arr)
    if arr.ndim == 2:
        rows, cols = arr.shape
        return f"{rows}x{cols}:" + "".join(str(int(v)) for v in arr.ravel())
    raise ValueError(f"cannot encode {arr.ndim}-d output")


def decode_output(key: str):
    """Inverse of :func:`encode_output`: a str for 1D, a uint8 array for 2D."""
    if ":" not in key:
        return key
    shape, cells = key.split(":", 1)
    rows, cols = (int(v) for v in shape.split("x"))
    if rows * cols != len(cells):
        raise ValueError(f"bad 2D key {key!r}")
    return np.frombuffer(cells.encode(), dtype=np.uint8).reshape(rows, cols) - ord("0")


def complement_output(key: str) -> str:
    """Swap symbols 0 and 1 (binary outputs)."""
    shape, sep, cells = key.rpartition(":")
    return shape + sep + cells.translate(_COMPLEMENT)


def mirror_output(key: str) -> str:
    """Left-right reversal: the string reversed, or each array row reversed."""
    if ":" not in key:
        return key[::-1]
    shape, cells = key.split(":", 1)
    cols = int(shape.split("x")[1])
    rows = [cells[i:i + cols][::-1] for i in range(0, len(cells), cols)]
    return shape + ":" + "".join(rows)


_COMPLEMENT = str.maketrans("01", "10")


@dataclass(frozen=True)
class RunRecord:
    rule_index: int
    halted: bool
    steps: int
    output: str | None = None


def run_machine(rule: MachineRule, budget: int) -> RunRecord:
    """Reference simulation of one rule from a blank tape."""
    if not 1 <= budget <= MAX_STEPS:
        raise ValueError(f"budget must be in [1, {MAX_STEPS}], got {budget}")
    config = Configuration()
    while config.steps < budget:
        result = step(config, rule)
        if isinstance(result, Halted):
            out = encode_output(np.array(config.output(rule.space.dimension)))
            return RunRecord(rule.index, True, config.steps, out)
    return RunRecord(rule.index, False, config.steps, None)


@dataclass
class RunBatch:
    """Results for an array of rule indices, as numpy columns."""

    space: MachineSpace
    budget: int
    indices: np.ndarray
    halted: np.ndarray
    steps: np.ndarray
    # halting rows only: raw symbols padded with SENTINEL (1D), or
    # 4 bytes of big-endian (rows, cols) followed by cells (2D)
    _rows: np.ndarray = field(repr=False)
    _row_of: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.indices)

    def output(self, j: int) -> str | None:
        if not self.halted[j]:
            return None
        return _row_key(self._rows[self._row_of[j]], self.space.dimension)

    def records(self) -> Iterator[RunRecord]:
        for j in range(len(self.indices)):
            yield RunRecord(int(self.indices[j]), bool(self.halted[j]), int(self.steps[j]), self.output(j))

    def outputs(self) -> list[str | None]:
        return [self.output(j) for j in range(len(self.indices))]

    def output_counts(self) -> Counter:
        """Occurrences of each output among halting machines."""
        counts: Counter = Counter()
        rows = self._rows
        if len(rows) == 0:
            return counts
        rows = np.ascontiguousarray(rows)
        view = rows.view(np.dtype((np.void, rows.shape[1]))).ravel()
        uniq, first, cnt = np.unique(view, return_index=True, return_counts=True)
        for k, c in zip(first.tolist(), cnt.tolist()):
            counts[_row_key(rows[k], self.space.dimension)] += c
        return counts


def _row_key(row: np.ndarray, dimension: Dimension) -> str:
    if dimension is Dimension.ONE_D:
        raw = row.tobytes().split(b"\xff", 1)[0]
        return bytes(b + 48 for b in raw).decode()
    rows = int(row[0]) << 8 | int(row[1])
    cols = int(row[2]) << 8 | int(row[3])
    cells = bytes(b + 48 for b in row[4:4 + rows * cols].tobytes()).decode()
    return f"{rows}x{cols}:{cells}"


def _workers(workers: int | None) -> int:
    import numba

    if workers is None:
        return numba.get_num_threads()
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


def run_batch(space: MachineSpace, indices, budget: int, workers: int | None = None) -> RunBatch:
    """Run every rule in ``indices`` (an int64 array) through the compiled kernel."""
    if not 1 <= budget <= MAX_STEPS:
        raise ValueError(f"budget must be in [1, {MAX_STEPS}], got {budget}")
    if space_size(space) >= 2**63:
        raise UnsupportedSpaceError(f"{space} does not fit 64-bit indices")
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    count = len(indices)
    workers = max(1, min(_workers(workers), count or 1))
    n, m = space.states, space.symbols
    halted = np.zeros(count, dtype=np.uint8)
    steps = np.zeros(count, dtype=np.int64)

    if space.dimension is Dimension.ONE_D:
        tables = _kernels.code_tables(n, m, 2)
        width = np.zeros(count, dtype=np.int64)
        out = np.full((count, budget + 1), _kernels.SENTINEL, dtype=np.uint8)
        if count:
            _kernels.run_1d(indices, n, m, budget, workers, *tables, halted, steps, width, out)
        mask = halted.astype(bool)
        maxw = int(width.max()) if count else 0
        # keep one sentinel column so equal prefixes stay distinct
        rows = out[mask, : maxw + 1]
    else:
        if budget > _MAX_BUDGET_2D:
            raise ValueError(f"2D batch budget capped at {_MAX_BUDGET_2D}, got {budget}")
        tables = _kernels.code_tables(n, m, 4)
        dims = np.zeros((count, 2), dtype=np.int64)
        cap = _OUT_CAP_2D
        out = np.zeros((count, cap), dtype=np.uint8)
        if count:
            _kernels.run_2d(indices, n, m, budget, workers, *tables, halted, steps, dims, out)
        mask = halted.astype(bool)
        area = dims[:, 0] * dims[:, 1]
        maxa = int(area[mask].max()) if mask.any() else 0
        big = np.flatnonzero(mask & (area > cap))
        cells = out[mask, : min(maxa, cap)]
        if len(big):
            # rare: re-run oversized outputs in Python and widen the rows
            cells = np.zeros((int(mask.sum()), maxa), dtype=np.uint8)
            cells[:, : min(maxa, cap)] = out[mask, : min(maxa, cap)]
            pos = np.cumsum(mask) - 1
            for j in big:
                rec = run_machine(decode_rule(int(indices[j]), space), budget)
                arr = decode_output(rec.output).ravel()
                cells[pos[j], : len(arr)] = arr
        hdr = dims[mask].astype(">u2").view(np.uint8).reshape(-1, 4)
        rows = np.concatenate([hdr, cells], axis=1)
    row_of = np.cumsum(mask) - 1
    return RunBatch(space, budget, indices, mask, steps, rows, row_of)


@dataclass
class SpaceRunSummary:
    space: MachineSpace
    budget: int
    total: int = 0
    halting_count: int = 0
    max_steps: int = 0
    busy_beaver_indices: list[int] = field(default_factory=list)
    runtime_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def censored(self) -> int:
        return self.total - self.halting_count

    @classmethod
    def from_batch(cls, batch: RunBatch) -> "SpaceRunSummary":
        s = cls(batch.space, batch.budget, total=len(batch))
        h = batch.halted
        s.halting_count = int(h.sum())
        if s.halting_count:
            st = batch.steps[h]
            s.max_steps = int(st.max())
            s.busy_beaver_indices = sorted(batch.indices[h][st == s.max_steps].tolist())
            vals, cnt = np.unique(st, return_counts=True)
            s.runtime_histogram = dict(zip(vals.tolist(), cnt.tolist()))
        return s

    @classmethod
    def from_records(cls, records: Iterable[RunRecord], space: MachineSpace, budget: int):
        s = cls(space, budget)
        for r in records:
            s.add(r)
        return s

    def add(self, record: RunRecord):
        self.total += 1
        if not record.halted:
            return
        self.halting_count += 1
        self.runtime_histogram[record.steps] = self.runtime_histogram.get(record.steps, 0) + 1
        if record.steps > self.max_steps:
            self.max_steps = record.steps
            self.busy_beaver_indices = [record.rule_index]
        elif record.steps == self.max_steps:
            self.busy_beaver_indices = sorted(self.busy_beaver_indices + [record.rule_index])

    def merge(self, other: "SpaceRunSummary") -> "SpaceRunSummary":
        if (self.space, self.budget) != (other.space, other.budget):
            raise ValueError("cannot merge summaries from different spaces or budgets")
        hist = dict(self.runtime_histogram)
        for k, v in other.runtime_histogram.items():
            hist[k] = hist.get(k, 0) + v
        top = max(self.max_steps, other.max_steps)
        bb = sorted(
            (self.busy_beaver_indices if self.max_steps == top else [])
            + (other.busy_beaver_indices if other.max_steps == top else [])
        )
        return SpaceRunSummary(
            self.space,
            self.budget,
            self.total + other.total,
            self.halting_count + other.halting_count,
            top,
            bb if top else [],
            dict(sorted(hist.items())),
        )

    def as_dict(self) -> dict:
        return {
            "space": str(self.space),
            "states": self.space.states,
            "symbols": self.space.symbols,
            "dim": self.space.dimension.value,
            "budget": self.budget,
            "total": self.total,
            "halting_count": self.halting_count,
            "censored": self.censored,
            "max_steps": self.max_steps,
            "busy_beaver_indices": self.busy_beaver_indices,
            "runtime_histogram": {str(k): v for k, v in sorted(self.runtime_histogram.items())},
        }


@dataclass
class SpaceRun:
    summary: SpaceRunSummary
    batches: list[RunBatch]

    def records(self) -> Iterator[RunRecord]:
        for b in self.batches:
            yield from b.records()

    def output_counts(self) -> Counter:
        total: Counter = Counter()
        for b in self.batches:
            total.update(b.output_counts())
        return total

    @property
    def halted(self) -> np.ndarray:
        return np.concatenate([b.halted for b in self.batches]) if self.batches else np.zeros(0, bool)

    @property
    def steps(self) -> np.ndarray:
        return np.concatenate([b.steps for b in self.batches]) if self.batches else np.zeros(0, np.int64)


def chunk_for(space: MachineSpace, budget: int, chunk_size: int = DEFAULT_CHUNK) -> int:
    """Shrink ``chunk_size`` so one batch's output buffer stays near 32 MB."""
    row = budget + 1 if space.dimension is Dimension.ONE_D else _OUT_CAP_2D
    return max(256, min(chunk_size, (1 << 25) // row))


def iter_batches(
    space: MachineSpace,
    index_range: IndexRange | None = None,
    budget: int | None = None,
    workers: int | None = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> Iterator[RunBatch]:
    r = (IndexRange.full(space) if index_range is None else index_range).check(space)
    budget = default_budget(space) if budget is None else budget
    chunk_size = chunk_for(space, budget, chunk_size)
    for lo in range(r.start, r.end, chunk_size):
        idx = np.arange(lo, min(lo + chunk_size, r.end), dtype=np.int64)
        yield run_batch(space, idx, budget, workers)


def run_space(
    space: MachineSpace,
    index_range: IndexRange | None = None,
    budget: int | None = None,
    workers: int | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    keep_batches: bool = True,
) -> SpaceRun:
    """Run every rule in ``index_range`` (default: the whole space)."""
    r = (IndexRange.full(space) if index_range is None else index_range).check(space)
    budget = default_budget(space) if budget is None else budget
    summary = SpaceRunSummary(space, budget)
    batches = []
    for batch in iter_batches(space, r, budget, workers, chunk_size):
        summary = summary.merge(SpaceRunSummary.from_batch(batch))
        if keep_batches:
            batches.append(batch)
    return SpaceRun(summary, batches)


class NoHaltingMachinesError(ValueError):
    pass


def find_busy_beavers(source) -> tuple[int, list[int]]:
    """Return ``(max_steps, indices)`` from a summary, a SpaceRun or records."""
    if isinstance(source, SpaceRun):
        source = source.summary
    if not isinstance(source, SpaceRunSummary):
        records = list(source)
        halting = [r for r in records if r.halted]
        if not halting:
            raise NoHaltingMachinesError("no halting machines")
        top = max(r.steps for r in halting)
        return top, sorted(r.rule_index for r in halting if r.steps == top)
    if source.halting_count == 0:
        raise NoHaltingMachinesError("no halting machines")
    return source.max_steps, list(source.busy_beaver_indices)


RECORD_FIELDS = ("index", "halted", "steps", "output")


def record_csv_output(output: str | None) -> str:
    """2D keys are dumped as rows joined by ``;``."""
    if output is None:
        return ""
    if ":" not in output:
        return output
    shape, cells = output.split(":", 1)
    cols = int(shape.split("x")[1])
    return ";".join(cells[i:i + cols] for i in range(0, len(cells), cols))


def write_records_csv(records: Iterable[RunRecord], destination) -> int:
    """Write the run-record dump. ``destination`` is a path or text stream."""
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", newline="", encoding="utf-8") if own else destination
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        k = 0
        for r in records:
            w.writerow([r.rule_index, int(r.halted), r.steps, record_csv_output(r.output)])
            k += 1
        return k
    finally:
        if own:
            fh.close()


def read_records_csv(source, space: MachineSpace) -> list[RunRecord]:
    """Parse a record dump back into RunRecords."""
    text = open(source, encoding="utf-8").read() if isinstance(source, (str, os.PathLike)) else source.read()
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if tuple(header or ()) != RECORD_FIELDS:
        raise ValueError(f"bad record header: {header!r}")
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(row)}")
        idx, halted, steps, output = row
        halted = halted == "1"
        key = None
        if halted:
            if space.dimension is Dimension.TWO_D:
                parts = output.split(";")
                key = f"{len(parts)}x{len(parts[0])}:" + "".join(parts)
            else:
                key = output
        out.append(RunRecord(int(idx), halted, int(steps), key))
    return out
