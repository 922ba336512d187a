"""
Drawing a machine space along a Peano curve
===========================================

Each rule becomes one pixel, placed along a space-filling curve so
neighbouring rule numbers stay close. Gray encodes runtime, white marks
machines still running at the budget and red marks the Busy Beavers.
"""

import sys

from compspace.machine import MachineSpace
from compspace.render import minimal_level, render_field, write_image
from compspace.runner import run_space

out = sys.argv[1] if len(sys.argv) > 1 else "field_2_2.ppm"

run = run_space(MachineSpace(2, 2), budget=500)
k = minimal_level(run.summary.total)  # 3^5 x 3^5 holds 10^4 rules
img = render_field(run.halted, run.steps, k)
write_image(img, out)
print("wrote", out, img.shape)

# count the colours
flat = img.reshape(-1, 3)
print("white", (flat == 255).all(axis=1).sum(), "censored", run.summary.censored)
print("red", ((flat[:, 0] == 255) & (flat[:, 1] == 0)).sum())
