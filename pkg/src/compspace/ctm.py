"""Output-frequency tables and Coding Theorem Method estimates.

Algorithmic probability is estimated by uniform counting over one
``(n, m)`` space: ``ap(s) = count(s) / halting_total``, and
``ctm(s) = -log2 ap(s)`` with the additive constant dropped. Values are
comparable only within one table.

Binary tables are *complement-completed*: every machine is counted on a
blank-0 tape and, through its symbol-complemented twin, on a blank-1
tape. Concretely each halting output ``s`` also adds one to
``complement(s)``, and the totals are doubled. Without this the blank-0
distribution is not complement symmetric (on (2,2) "00" occurs 264
times, "11" only 244).
"""

from __future__ import annotations

import math
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .enumeration import IndexRange, orbit_arrays, representatives, space_size
from .machine import Dimension, MachineSpace
from .runner import (
    RunBatch,
    RunRecord,
    complement_output,
    chunk_for,
    default_budget,
    iter_batches,
    mirror_output,
    run_batch,
)


class ConsistencyError(ValueError):
    """Tables or records from different spaces or budgets were combined."""


class NotInSupportError(KeyError):
    """The object never occurred as an output, so its CTM is undefined here."""


class TableFormatError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_KEY_1D = re.compile(r"^[0-9]+$")
_KEY_2D = re.compile(r"^([1-9][0-9]*)x([1-9][0-9]*):([0-9]+)$")


def valid_key(key: str, space: MachineSpace) -> bool:
    top = str(space.symbols - 1)
    if space.dimension is Dimension.ONE_D:
        return bool(_KEY_1D.match(key)) and max(key) <= top
    m = _KEY_2D.match(key)
    if not m:
        return False
    rows, cols, cells = int(m[1]), int(m[2]), m[3]
    return rows * cols == len(cells) and max(cells) <= top


@dataclass
class CTMTable:
    space: MachineSpace
    budget: int
    counts: dict[str, int] = field(default_factory=dict)
    halting_total: int = 0
    total_machines: int = 0

    def __post_init__(self):
        s = sum(self.counts.values())
        if s != self.halting_total:
            raise ConsistencyError(f"counts sum to {s}, halting_total is {self.halting_total}")
        if self.halting_total > self.total_machines:
            raise ConsistencyError("halting_total exceeds total_machines")

    def __len__(self):
        return len(self.counts)

    def __contains__(self, key):
        return key in self.counts

    def count(self, key: str) -> int:
        try:
            return self.counts[key]
        except KeyError:
            raise NotInSupportError(key) from None

    def ap(self, key: str) -> float:
        return self.count(key) / self.halting_total

    def ctm(self, key: str) -> float:
        return math.log2(self.halting_total) - math.log2(self.count(key))

    def ranked(self) -> list[tuple[str, int]]:
        """Entries by descending count, ties broken by key."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def meta(self) -> tuple:
        return (self.space, self.budget)

    def __eq__(self, other):
        if not isinstance(other, CTMTable):
            return NotImplemented
        return (
            self.meta() == other.meta()
            and self.counts == other.counts
            and self.halting_total == other.halting_total
            and self.total_machines == other.total_machines
        )

    @classmethod
    def empty(cls, space: MachineSpace, budget: int) -> "CTMTable":
        return cls(space, budget)


def ap_estimate(s, table: CTMTable) -> float:
    return table.ap(_key(s))


def ctm_value(s, table: CTMTable) -> float:
    return table.ctm(_key(s))


def _key(s) -> str:
    if isinstance(s, str):
        return s
    from .runner import encode_output

    return encode_output(s)


def merge_tables(a: CTMTable, b: CTMTable) -> CTMTable:
    if a.meta() != b.meta():
        raise ConsistencyError(f"cannot merge tables for {a.meta()} and {b.meta()}")
    counts = Counter(a.counts)
    counts.update(b.counts)
    return CTMTable(
        a.space,
        a.budget,
        dict(counts),
        a.halting_total + b.halting_total,
        a.total_machines + b.total_machines,
    )


def _completed(counts: Mapping[str, int], space: MachineSpace, complete: bool) -> tuple[Counter, int]:
    out = Counter(counts)
    if complete:
        for k, v in counts.items():
            out[complement_output(k)] += v
    return out, (2 if complete else 1)


def _default_complete(space: MachineSpace, complete: bool | None) -> bool:
    if complete is None:
        return space.symbols == 2
    if complete and space.symbols != 2:
        raise ValueError("complement completion needs a binary alphabet")
    return complete


def build_table(
    records: Iterable[RunRecord | RunBatch],
    space: MachineSpace,
    budget: int,
    complete: bool | None = None,
) -> CTMTable:
    """Tally halting outputs from a record (or batch) stream."""
    complete = _default_complete(space, complete)
    raw: Counter = Counter()
    total = halting = 0
    for item in records:
        if isinstance(item, RunBatch):
            if (item.space, item.budget) != (space, budget):
                raise ConsistencyError(f"batch from {item.space}/{item.budget} in a {space}/{budget} table")
            raw.update(item.output_counts())
            total += len(item)
            halting += int(item.halted.sum())
            continue
        total += 1
        if item.halted:
            if item.output is None or not valid_key(item.output, space):
                raise ConsistencyError(f"record {item.rule_index}: output {item.output!r} not valid for {space}")
            raw[item.output] += 1
            halting += 1
    counts, mult = _completed(raw, space, complete)
    return CTMTable(space, budget, dict(counts), halting * mult, total * mult)


def table_for_space(
    space: MachineSpace,
    budget: int | None = None,
    index_range: IndexRange | None = None,
    symmetry: bool = False,
    workers: int | None = None,
    complete: bool | None = None,
) -> CTMTable:
    """Run a range of ``space`` and tally its outputs.

    With ``symmetry=True`` only one rule per complement/mirror orbit is
    simulated, together with its complement twin; the mirror images are
    filled in by reversing outputs. The result is identical to the full
    run (complement completion is implied).
    """
    budget = default_budget(space) if budget is None else budget
    r = (IndexRange.full(space) if index_range is None else index_range).check(space)
    if not symmetry:
        return build_table(iter_batches(space, r, budget, workers), space, budget, complete)
    if complete is False:
        raise ValueError("symmetry reduction always produces a complement-completed table")
    if r != IndexRange.full(space):
        raise ValueError("symmetry reduction needs the full space")
    raw: Counter = Counter()
    halting = 0
    for reps in representatives(space, r):
        chunk = chunk_for(space, budget)
        for lo in range(0, len(reps), chunk):
            rr = reps[lo:lo + chunk]
            c, mi, cm = orbit_arrays(rr, space)
            own = run_batch(space, rr, budget, workers)
            twin = run_batch(space, c, budget, workers)
            for j in range(len(rr)):
                a = own.output(j)
                b = twin.output(j)
                seen = set()
                for idx, out, flip in (
                    (rr[j], a, False),
                    (mi[j], a, True),
                    (c[j], b, False),
                    (cm[j], b, True),
                ):
                    idx = int(idx)
                    if idx in seen:
                        continue
                    seen.add(idx)
                    if out is not None:
                        raw[mirror_output(out) if flip else out] += 1
                        halting += 1
    counts, mult = _completed(raw, space, True)
    return CTMTable(space, budget, dict(counts), halting * mult, space_size(space) * mult)


def sample_table(
    space: MachineSpace,
    samples: int,
    budget: int | None = None,
    seed: int = 0,
    workers: int | None = None,
    complete: bool | None = None,
) -> CTMTable:
    """Tally outputs of ``samples`` rules drawn uniformly (with replacement).

    For spaces too large to enumerate. ``total`` in the table counts the
    sampled runs.
    """
    budget = default_budget(space) if budget is None else budget
    size = space_size(space)
    if size >= 2**63:
        raise ValueError(f"{space} too large for 64-bit sampling")
    rng = np.random.default_rng(seed)
    chunk = chunk_for(space, budget)

    def batches():
        left = samples
        while left > 0:
            k = min(left, chunk)
            left -= k
            yield run_batch(space, rng.integers(0, size, size=k, dtype=np.int64), budget, workers)

    return build_table(batches(), space, budget, complete)


# -- file format ---------------------------------------------------------------

_HEADER = re.compile(
    r"^#ctm v1 dim=(1|2) states=(\d+) symbols=(\d+) budget=(\d+) total=(\d+) halting=(\d+)$"
)


def format_table(table: CTMTable) -> str:
    s = table.space
    lines = [
        f"#ctm v1 dim={s.dimension.value} states={s.states} symbols={s.symbols} "
        f"budget={table.budget} total={table.total_machines} halting={table.halting_total}"
    ]
    lines += [f"{k},{v}" for k, v in table.ranked()]
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> CTMTable:
    if not text.endswith("\n"):
        raise TableFormatError("missing trailing newline", text.count("\n") + 1)
    lines = text.split("\n")[:-1]
    if not lines:
        raise TableFormatError("empty file", 1)
    m = _HEADER.match(lines[0])
    if not m:
        raise TableFormatError(f"bad header {lines[0]!r}", 1)
    dim, n, k, budget, total, halting = (int(g) for g in m.groups())
    try:
        space = MachineSpace(n, k, Dimension(dim))
    except ValueError as e:
        raise TableFormatError(str(e), 1) from None
    counts: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        key, sep, val = line.rpartition(",")
        if not sep or not val.isdigit() or int(val) < 1:
            raise TableFormatError(f"expected '<output>,<count>', got {line!r}", lineno)
        if not valid_key(key, space):
            raise TableFormatError(f"output {key!r} not valid for {space}", lineno)
        if key in counts:
            raise TableFormatError(f"duplicate output {key!r}", lineno)
        counts[key] = int(val)
    try:
        return CTMTable(space, budget, counts, halting, total)
    except ConsistencyError as e:
        raise TableFormatError(str(e), 1) from None


def save_table(table: CTMTable, destination) -> None:
    text = format_table(table)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        destination.write(text)


def load_table(source) -> CTMTable:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return parse_table(fh.read())
    return parse_table(source.read())
