"""
Block decomposition against Shannon entropy
===========================================

BDM cuts a long string into blocks and adds up their CTM values, plus
log2 of each block's multiplicity. A periodic string has maximal
symbol entropy but a small BDM.
"""

import numpy as np

from compspace import tables
from compspace.bdm import BaseTable, bdm_string, compare_entropy_vs_bdm, shannon_block_entropy

base = BaseTable.from_ctm(tables.load("1d-3-2"))

alternating = "01" * 12
zeros = "0" * 24
rng = np.random.default_rng(7)
noise = "".join(map(str, rng.integers(0, 2, 24)))

for name, s in [("alternating", alternating), ("zeros", zeros), ("random", noise)]:
    print(f"{name:>12} H1={shannon_block_entropy(s):.3f} BDM={bdm_string(s, base, d=4):.2f}")

# ranks against 1000 random strings of the same length
report = compare_entropy_vs_bdm(alternating, base, d=4)
print(report)

# six copies of one block cost its CTM value plus log2(6)
print(bdm_string("0110" * 6, base, d=4) - base.k("0110"), np.log2(6))
