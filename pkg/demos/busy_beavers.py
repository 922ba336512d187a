"""
Busy Beavers by exhaustive enumeration
======================================

Every (n, 2) Turing machine is a base-(4n+2) number. Running all of them
for a fixed step budget finds the longest-running halting machines.
"""

import numpy as np

from compspace.machine import MachineSpace, decode_rule
from compspace.runner import find_busy_beavers, run_machine, run_space

# the (2,2) space: 2 states, 2 symbols, 10^4 rules
space = MachineSpace(2, 2)
run = run_space(space, budget=500)
print(run.summary.as_dict())

# machines that halt, and the most steps any of them takes
steps, winners = find_busy_beavers(run.summary)
print("B(2) =", steps, "reached by", len(winners), "rules")

# decode one of them and trace it with the reference simulator
rule = decode_rule(winners[0], space)
print(rule.table)
print(run_machine(rule, 500))

# step counts of the halting machines fall off quickly
hist = run.summary.runtime_histogram
for k in sorted(hist):
    print(f"{k:>3} {hist[k]:>5}")

# the (3,2) space has 7,529,536 rules and takes a few seconds
big = run_space(MachineSpace(3, 2), budget=200, keep_batches=False).summary
print("B(3) =", big.max_steps, "halting:", big.halting_count, "censored:", big.censored)
print("fraction halting: %.3f" % (big.halting_count / big.total))
