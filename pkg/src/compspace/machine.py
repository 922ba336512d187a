"""Machine formalism: 1D Turing machines and 2D turmites.

A rule is a total transition table over ``n`` states and ``m`` symbols.
Halting is instruction-based: each table entry is either ``Halt(write)``
or ``Step(write, move, next_state)``. There is no separate halt state.

Rules are numbered canonically. The index is written in base
``instructions_per_entry`` with ``n*m`` digits; digit ``k`` (least
significant first) holds the instruction for entry ``k``, where entries
are ordered state-major, symbol-minor (``k = state*m + symbol``). Inside
a digit, codes ``0..m-1`` are ``Halt(write=code)`` and the remaining
codes enumerate ``Step`` instructions in ``(write, move, next_state)``
lexicographic order. This order is frozen: published tables and images
depend on it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Union

BLANK = 0
MAX_STEPS = 10**9


class Dimension(enum.Enum):
    ONE_D = 1
    TWO_D = 2


class Move(enum.IntEnum):
    """Head moves. 1D machines use LEFT/RIGHT only.

    The integer value is the move's position in the lexicographic
    instruction order for its dimension.
    """

    LEFT = 0
    RIGHT = 1
    UP = 2
    DOWN = 3


# Move order inside an instruction digit, per dimension.
MOVES_1D = (Move.LEFT, Move.RIGHT)
MOVES_2D = (Move.UP, Move.DOWN, Move.LEFT, Move.RIGHT)

# (drow, dcol); 1D uses dcol only.
OFFSETS = {
    Move.LEFT: (0, -1),
    Move.RIGHT: (0, 1),
    Move.UP: (-1, 0),
    Move.DOWN: (1, 0),
}


@dataclass(frozen=True)
class MachineSpace:
    states: int
    symbols: int
    dimension: Dimension = Dimension.ONE_D

    def __post_init__(self):
        if self.states < 1:
            raise ValueError(f"states must be >= 1, got {self.states}")
        if self.symbols < 2:
            raise ValueError(f"symbols must be >= 2, got {self.symbols}")
        if self.symbols > 10:
            # outputs are encoded as digit strings
            raise ValueError(f"at most 10 symbols are supported, got {self.symbols}")

    @property
    def moves(self) -> tuple[Move, ...]:
        return MOVES_1D if self.dimension is Dimension.ONE_D else MOVES_2D

    @property
    def entries(self) -> int:
        return self.states * self.symbols

    @property
    def instructions_per_entry(self) -> int:
        return self.symbols * (len(self.moves) * self.states + 1)

    @property
    def size(self) -> int:
        return self.instructions_per_entry**self.entries

    def __str__(self):
        d = "1D" if self.dimension is Dimension.ONE_D else "2D"
        return f"({self.states},{self.symbols},{d})"


class Halt(NamedTuple):
    write: int


class Step(NamedTuple):
    write: int
    move: Move
    next_state: int


Instruction = Union[Halt, Step]


def decode_instruction(code: int, space: MachineSpace) -> Instruction:
    m, n = space.symbols, space.states
    if not 0 <= code < space.instructions_per_entry:
        raise ValueError(f"instruction code {code} out of range for {space}")
    if code < m:
        return Halt(code)
    code -= m
    nmoves = len(space.moves)
    write, rest = divmod(code, nmoves * n)
    move, next_state = divmod(rest, n)
    return Step(write, space.moves[move], next_state)


def encode_instruction(ins: Instruction, space: MachineSpace) -> int:
    m, n = space.symbols, space.states
    if isinstance(ins, Halt):
        if not 0 <= ins.write < m:
            raise ValueError(f"halt write {ins.write} outside [0, {m})")
        return ins.write
    if isinstance(ins, Step):
        if not 0 <= ins.write < m:
            raise ValueError(f"write {ins.write} outside [0, {m})")
        if not 0 <= ins.next_state < n:
            raise ValueError(f"next state {ins.next_state} outside [0, {n})")
        try:
            move = space.moves.index(Move(ins.move))
        except ValueError:
            raise ValueError(f"move {ins.move!r} not allowed in {space}") from None
        return m + (ins.write * len(space.moves) + move) * n + ins.next_state
    raise TypeError(f"not an instruction: {ins!r}")


@dataclass(frozen=True)
class MachineRule:
    space: MachineSpace
    table: tuple[Instruction, ...]

    def __post_init__(self):
        if len(self.table) != self.space.entries:
            raise ValueError(
                f"table has {len(self.table)} entries, expected {self.space.entries}"
            )
        for ins in self.table:
            encode_instruction(ins, self.space)

    def instruction(self, state: int, symbol: int) -> Instruction:
        return self.table[state * self.space.symbols + symbol]

    @property
    def index(self) -> int:
        return encode_rule(self)


def decode_rule(index: int, space: MachineSpace) -> MachineRule:
    """Return the rule numbered ``index`` in ``space``."""
    size = space.size
    if not 0 <= index < size:
        raise IndexError(f"rule index {index} outside [0, {size}) for {space}")
    base = space.instructions_per_entry
    table = []
    for _ in range(space.entries):
        index, code = divmod(index, base)
        table.append(decode_instruction(code, space))
    return MachineRule(space, tuple(table))


def encode_rule(rule: MachineRule) -> int:
    base = rule.space.instructions_per_entry
    index = 0
    for ins in reversed(rule.table):
        index = index * base + encode_instruction(ins, rule.space)
    return index


@dataclass
class Configuration:
    """Mutable machine state. ``head`` is ``(row, col)``; 1D machines keep row 0."""

    state: int = 0
    head: tuple[int, int] = (0, 0)
    tape: dict[tuple[int, int], int] = field(default_factory=dict)
    # (min_row, max_row, min_col, max_col) of visited head positions
    bounds: tuple[int, int, int, int] = (0, 0, 0, 0)
    steps: int = 0

    def read(self) -> int:
        return self.tape.get(self.head, BLANK)

    def write(self, symbol: int):
        if symbol == BLANK:
            self.tape.pop(self.head, None)
        else:
            self.tape[self.head] = symbol

    def output(self, dimension: Dimension = Dimension.ONE_D):
        """Symbols over the visited region.

        1D: a tuple of symbols. 2D: a tuple of row tuples over the
        bounding box of visited cells.
        """
        r0, r1, c0, c1 = self.bounds
        rows = tuple(
            tuple(self.tape.get((r, c), BLANK) for c in range(c0, c1 + 1))
            for r in range(r0, r1 + 1)
        )
        if dimension is Dimension.ONE_D:
            return rows[0]
        return rows


class Halted(NamedTuple):
    config: Configuration


def step(config: Configuration, rule: MachineRule) -> Configuration | Halted:
    """Advance ``config`` by one instruction, in place.

    Returns the same configuration, or ``Halted(config)`` if a halt
    instruction executed (its symbol is written, the head stays).
    """
    ins = rule.instruction(config.state, config.read())
    config.steps += 1
    config.write(ins.write)
    if isinstance(ins, Halt):
        return Halted(config)
    dr, dc = OFFSETS[ins.move]
    r, c = config.head[0] + dr, config.head[1] + dc
    config.head = (r, c)
    config.state = ins.next_state
    r0, r1, c0, c1 = config.bounds
    config.bounds = (min(r0, r), max(r1, r), min(c0, c), max(c1, c))
    return config
