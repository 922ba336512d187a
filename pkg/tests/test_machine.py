import random

import pytest
from hypothesis import given, strategies as st

from compspace.machine import (
    Configuration,
    Dimension,
    Halt,
    Halted,
    MachineRule,
    MachineSpace,
    Move,
    Step,
    decode_rule,
    encode_rule,
    step,
)

S22 = MachineSpace(2, 2)
S32 = MachineSpace(3, 2)


def test_space_invariants():
    assert S32.instructions_per_entry == 14
    assert MachineSpace(2, 2, Dimension.TWO_D).instructions_per_entry == 18
    with pytest.raises(ValueError):
        MachineSpace(0, 2)
    with pytest.raises(ValueError):
        MachineSpace(2, 1)


def test_decode_zero_is_all_halt0():
    rule = decode_rule(0, S22)
    assert rule.table == (Halt(0),) * 4


def test_decode_9999_all_last_code():
    rule = decode_rule(9999, S22)
    # code 9: write 1, RIGHT, state 1
    assert rule.table == (Step(1, Move.RIGHT, 1),) * 4


def test_decode_out_of_range():
    with pytest.raises(IndexError):
        decode_rule(10_000, S22)
    with pytest.raises(IndexError):
        decode_rule(-1, S22)


def test_encode_all_halt0():
    assert encode_rule(MachineRule(S22, (Halt(0),) * 4)) == 0


def test_encode_max_rule_32():
    rule = MachineRule(S32, (Step(1, Move.RIGHT, 2),) * 6)
    assert encode_rule(rule) == 14**6 - 1 == 7_529_535


def test_encode_rejects_malformed():
    with pytest.raises(ValueError):
        MachineRule(S22, (Halt(2),) * 4)
    with pytest.raises(ValueError):
        MachineRule(S22, (Step(0, Move.UP, 0),) * 4)
    with pytest.raises(ValueError):
        MachineRule(S22, (Step(0, Move.LEFT, 2),) * 4)


def test_bijection_exhaustive_22():
    seen = set()
    for i in range(S22.size):
        rule = decode_rule(i, S22)
        assert encode_rule(rule) == i
        seen.add(rule.table)
    assert len(seen) == 10_000


def test_roundtrip_sampled_32():
    rng = random.Random(0)
    for _ in range(1000):
        i = rng.randrange(S32.size)
        assert encode_rule(decode_rule(i, S32)) == i


@given(st.integers(0, MachineSpace(3, 2, Dimension.TWO_D).size - 1))
def test_roundtrip_2d(i):
    space = MachineSpace(3, 2, Dimension.TWO_D)
    assert encode_rule(decode_rule(i, space)) == i


def test_all_halt_takes_one_step():
    config = Configuration()
    result = step(config, decode_rule(0, S22))
    assert isinstance(result, Halted)
    assert config.steps == 1
    assert config.bounds == (0, 0, 0, 0)
    assert config.output() == (0,)


def test_right_mover_never_halts():
    table = (Step(1, Move.RIGHT, 0), Halt(0), Halt(0), Halt(0))
    rule = MachineRule(S22, table)
    config = Configuration()
    for _ in range(1000):
        assert not isinstance(step(config, rule), Halted)
    assert config.head == (0, 1000)


# Hand trace of rule 639 in (2,2): digits (LSB first) 9,3,6,0 give
#   q0/0 -> 1 R q1   q0/1 -> 0 L q1   q1/0 -> 1 L q0   q1/1 -> halt 0
# step: (state before, head before, read, written, head after)
TRACE_639 = [
    (0, 0, 0, 1, 1),
    (1, 1, 0, 1, 0),
    (0, 0, 1, 0, -1),
    (1, -1, 0, 1, -2),
    (0, -2, 0, 1, -1),
    (1, -1, 1, 0, -1),  # halt: writes 0, head stays
]


def test_pencil_trace_639():
    rule = decode_rule(639, S22)
    assert rule.table == (
        Step(1, Move.RIGHT, 1),
        Step(0, Move.LEFT, 1),
        Step(1, Move.LEFT, 0),
        Halt(0),
    )
    config = Configuration()
    for k, (q, h, read, written, after) in enumerate(TRACE_639, start=1):
        assert (config.state, config.head[1], config.read()) == (q, h, read)
        result = step(config, rule)
        assert config.tape.get((0, h), 0) == written
        assert config.head[1] == after
        assert config.steps == k
        assert isinstance(result, Halted) == (k == 6)
    assert config.output() == (1, 0, 0, 1)


@given(st.integers(0, S32.size - 1), st.integers(1, 60))
def test_determinism_and_sparsity(i, budget):
    rule = decode_rule(i, S32)

    def go():
        c = Configuration()
        while c.steps < budget and not isinstance(step(c, rule), Halted):
            pass
        return c

    a, b = go(), go()
    assert (a.state, a.head, a.tape, a.bounds, a.steps) == (b.state, b.head, b.tape, b.bounds, b.steps)
    assert len(a.tape) <= a.steps
    r0, r1, c0, c1 = a.bounds
    assert c0 <= 0 <= c1 and c0 <= a.head[1] <= c1
    assert all(c0 <= c <= c1 for (_, c) in a.tape)


def test_turmite_moves():
    space = MachineSpace(1, 2, Dimension.TWO_D)
    # q0/0 -> write 1, DOWN; q0/1 -> halt
    rule = MachineRule(space, (Step(1, Move.DOWN, 0), Halt(1)))
    c = Configuration()
    step(c, rule)
    assert c.head == (1, 0)
    assert c.bounds == (0, 1, 0, 0)
