"""
Output frequencies and the Coding Theorem Method
================================================

Tally what every halting machine writes. Frequent outputs get low
complexity estimates: ctm(s) = -log2(count(s) / halting).
"""

from compspace import tables
from compspace.ctm import table_for_space
from compspace.machine import MachineSpace

# small enough to build on the spot
t22 = table_for_space(MachineSpace(2, 2), budget=500)
for s, count in t22.ranked()[:8]:
    print(f"{s:>6} {count:>6} {t22.ctm(s):7.3f}")

# the symmetry-reduced run simulates about a quarter of the rules
# and gives the same table
assert table_for_space(MachineSpace(2, 2), 500, symmetry=True) == t22

# the bundled (3,2) table
t32 = tables.load("1d-3-2")
print(len(t32), "distinct outputs,", t32.halting_total, "halting runs")

# constant strings are the simplest at every length
for n in range(3, 7):
    row = sorted((t32.ctm(k), k) for k in t32.counts if len(k) == n)
    print(n, "simplest:", row[0][1], "hardest:", row[-1][1])
