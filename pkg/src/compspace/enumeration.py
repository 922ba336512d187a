"""Iteration over machine spaces, index ranges and symmetry reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .machine import (
    Halt,
    MachineRule,
    MachineSpace,
    Move,
    Step,
    decode_instruction,
    encode_instruction,
)

MAX_SPACE_SIZE = 2**128
# block size used when scanning a space in numpy chunks
_CHUNK = 1 << 20


class UnsupportedSpaceError(ValueError):
    pass


def space_size(space: MachineSpace) -> int:
    size = space.size
    if size >= MAX_SPACE_SIZE:
        raise UnsupportedSpaceError(f"{space} has {size} rules, beyond 128-bit range")
    return size


@dataclass(frozen=True)
class IndexRange:
    start: int
    end: int

    def __len__(self):
        return self.end - self.start

    def check(self, space: MachineSpace) -> "IndexRange":
        size = space_size(space)
        if not 0 <= self.start <= self.end <= size:
            raise IndexError(f"range [{self.start}, {self.end}) invalid for {space} (size {size})")
        return self

    def split(self, parts: int) -> list["IndexRange"]:
        step, extra = divmod(len(self), parts)
        out, lo = [], self.start
        for k in range(parts):
            hi = lo + step + (1 if k < extra else 0)
            out.append(IndexRange(lo, hi))
            lo = hi
        return out

    @classmethod
    def full(cls, space: MachineSpace) -> "IndexRange":
        return cls(0, space_size(space))


def iter_space(space: MachineSpace, index_range: IndexRange | None = None) -> Iterator[int]:
    r = (IndexRange.full(space) if index_range is None else index_range).check(space)
    return iter(range(r.start, r.end))


# -- symmetry transforms ------------------------------------------------------

COMPLEMENT = "complement"
MIRROR = "mirror"

_MIRRORED = {Move.LEFT: Move.RIGHT, Move.RIGHT: Move.LEFT, Move.UP: Move.UP, Move.DOWN: Move.DOWN}


def complement_rule(rule: MachineRule) -> MachineRule:
    """Swap symbols 0 and 1 in every read and write (binary spaces only).

    Run on a blank-1 tape, the result produces the complement of what
    ``rule`` produces on a blank-0 tape.
    """
    space = rule.space
    if space.symbols != 2:
        raise UnsupportedSpaceError("complement is defined for binary alphabets only")
    table = []
    for q in range(space.states):
        for a in range(2):
            ins = rule.instruction(q, 1 - a)
            if isinstance(ins, Halt):
                table.append(Halt(1 - ins.write))
            else:
                table.append(Step(1 - ins.write, ins.move, ins.next_state))
    return MachineRule(space, tuple(table))


def mirror_rule(rule: MachineRule) -> MachineRule:
    """Swap LEFT and RIGHT moves; the output comes out left-right reversed."""
    table = tuple(
        ins if isinstance(ins, Halt) else Step(ins.write, _MIRRORED[ins.move], ins.next_state)
        for ins in rule.table
    )
    return MachineRule(rule.space, table)


def _code_maps(space: MachineSpace) -> tuple[np.ndarray, np.ndarray]:
    k = space.instructions_per_entry
    comp = np.empty(k, dtype=np.int64)
    mirr = np.empty(k, dtype=np.int64)
    for c in range(k):
        ins = decode_instruction(c, space)
        if isinstance(ins, Halt):
            comp[c] = encode_instruction(Halt(1 - ins.write) if space.symbols == 2 else ins, space)
            mirr[c] = c
        else:
            if space.symbols == 2:
                comp[c] = encode_instruction(Step(1 - ins.write, ins.move, ins.next_state), space)
            else:
                comp[c] = c
            mirr[c] = encode_instruction(Step(ins.write, _MIRRORED[ins.move], ins.next_state), space)
    return comp, mirr


def transform_indices(
    indices: np.ndarray, space: MachineSpace, complement: bool = False, mirror: bool = False
) -> np.ndarray:
    """Vectorised complement/mirror over an array of rule indices (int64)."""
    if complement and space.symbols != 2:
        raise UnsupportedSpaceError("complement is defined for binary alphabets only")
    if space_size(space) >= 2**63:
        raise UnsupportedSpaceError(f"{space} does not fit 64-bit indices")
    base = space.instructions_per_entry
    comp, mirr = _code_maps(space)
    idx = np.asarray(indices, dtype=np.int64)
    digits = np.empty((space.entries,) + idx.shape, dtype=np.int64)
    rest = idx.copy()
    for k in range(space.entries):
        rest, digits[k] = np.divmod(rest, base)
    if mirror:
        digits = mirr[digits]
    if complement:
        digits = comp[digits]
        # entry (q, a) takes the instruction from (q, 1 - a)
        digits = digits.reshape((space.states, 2) + idx.shape)[:, ::-1].reshape(digits.shape)
    out = np.zeros_like(idx)
    for k in reversed(range(space.entries)):
        out = out * base + digits[k]
    return out


@dataclass(frozen=True)
class SymmetryClass:
    representative: int
    multiplicity: int
    transforms: tuple[str, ...]

    def members(self, space: MachineSpace) -> list[int]:
        return orbit(self.representative, space)


def orbit(index: int, space: MachineSpace) -> list[int]:
    """Distinct rule indices reachable from ``index`` by complement/mirror, sorted."""
    i = np.array([index], dtype=np.int64)
    found = {
        index,
        int(transform_indices(i, space, complement=True)[0]),
        int(transform_indices(i, space, mirror=True)[0]),
        int(transform_indices(i, space, complement=True, mirror=True)[0]),
    }
    return sorted(found)


def orbit_arrays(indices: np.ndarray, space: MachineSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Complement, mirror and complement-mirror images of ``indices``."""
    c = transform_indices(indices, space, complement=True)
    mi = transform_indices(indices, space, mirror=True)
    cm = transform_indices(indices, space, complement=True, mirror=True)
    return c, mi, cm


def representatives(space: MachineSpace, index_range: IndexRange) -> Iterator[np.ndarray]:
    """Yield, chunk by chunk, the indices that are the minimum of their orbit."""
    r = index_range.check(space)
    for lo in range(r.start, r.end, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, r.end), dtype=np.int64)
        c, mi, cm = orbit_arrays(idx, space)
        keep = (idx <= c) & (idx <= mi) & (idx <= cm)
        yield idx[keep]


def reduce_by_symmetry(space: MachineSpace) -> Iterator[SymmetryClass]:
    """Partition a binary space into complement/mirror orbits."""
    if space.symbols != 2:
        raise UnsupportedSpaceError("symmetry reduction needs m = 2")
    for reps in representatives(space, IndexRange.full(space)):
        c, mi, cm = orbit_arrays(reps, space)
        for r, a, b, ab in zip(reps.tolist(), c.tolist(), mi.tolist(), cm.tolist()):
            mult = len({r, a, b, ab})
            transforms = []
            if a != r:
                transforms.append(COMPLEMENT)
            if b != r:
                transforms.append(MIRROR)
            yield SymmetryClass(r, mult, tuple(transforms))
