"""Compiled batch simulators.

These duplicate the semantics of :func:`compspace.machine.step` for
speed; tests cross-check them against the pure-Python simulator.
Workers own disjoint contiguous slices of the index array, so results
do not depend on the thread count.
"""

import numba as nb
import numpy as np

SENTINEL = 255


def code_tables(n, m, nmoves):
    """Per-instruction-code lookup arrays: is_halt, write, move, next_state."""
    k = m * (nmoves * n + 1)
    halt = np.zeros(k, dtype=np.uint8)
    write = np.zeros(k, dtype=np.uint8)
    move = np.zeros(k, dtype=np.int8)
    nxt = np.zeros(k, dtype=np.int32)
    for c in range(k):
        if c < m:
            halt[c] = 1
            write[c] = c
        else:
            w, rest = divmod(c - m, nmoves * n)
            mv, q = divmod(rest, n)
            write[c], move[c], nxt[c] = w, mv, q
    return halt, write, move, nxt


@nb.njit(cache=True, parallel=True)
def run_1d(indices, n, m, budget, workers, halt, write, move, nxt,
           halted, steps, width, outbuf):
    """Run 1D machines on a blank-0 tape.

    Moves: 0 = left, 1 = right. ``outbuf[j, :width[j]]`` receives the
    visited tape interval of halting machine ``j``.
    """
    count = indices.shape[0]
    base = m * (2 * n + 1)
    nent = n * m
    per = (count + workers - 1) // workers
    for w in nb.prange(workers):
        lo_j = w * per
        hi_j = min(count, lo_j + per)
        size = 2 * budget + 3
        tape = np.zeros(size, dtype=np.uint8)
        codes = np.empty(nent, dtype=np.int64)
        origin = budget + 1
        for j in range(lo_j, hi_j):
            idx = indices[j]
            for k in range(nent):
                codes[k] = idx % base
                idx //= base
            q = 0
            h = origin
            lo = origin
            hi = origin
            s = 0
            done = False
            while s < budget:
                c = codes[q * m + tape[h]]
                s += 1
                tape[h] = write[c]
                if halt[c]:
                    done = True
                    break
                if move[c] == 0:
                    h -= 1
                    if h < lo:
                        lo = h
                else:
                    h += 1
                    if h > hi:
                        hi = h
                q = nxt[c]
            steps[j] = s
            if done:
                halted[j] = 1
                width[j] = hi - lo + 1
                for x in range(lo, hi + 1):
                    outbuf[j, x - lo] = tape[x]
            else:
                halted[j] = 0
                width[j] = 0
            for x in range(lo, hi + 1):
                tape[x] = 0


@nb.njit(cache=True, parallel=True)
def run_2d(indices, n, m, budget, workers, halt, write, move, nxt,
           halted, steps, dims, outbuf):
    """Run turmites on a blank-0 plane.

    Moves: 0 = up, 1 = down, 2 = left, 3 = right. For halting machine
    ``j``, ``dims[j] = (rows, cols)`` of the visited bounding box and, if
    it fits, ``outbuf[j, :rows*cols]`` holds the box row-major. A box
    larger than the buffer leaves ``dims`` set and the row untouched;
    callers must recompute that output.
    """
    count = indices.shape[0]
    base = m * (4 * n + 1)
    nent = n * m
    cap = outbuf.shape[1]
    per = (count + workers - 1) // workers
    for w in nb.prange(workers):
        lo_j = w * per
        hi_j = min(count, lo_j + per)
        side = 2 * budget + 3
        plane = np.zeros((side, side), dtype=np.uint8)
        touched_r = np.empty(budget + 1, dtype=np.int64)
        touched_c = np.empty(budget + 1, dtype=np.int64)
        codes = np.empty(nent, dtype=np.int64)
        origin = budget + 1
        for j in range(lo_j, hi_j):
            idx = indices[j]
            for k in range(nent):
                codes[k] = idx % base
                idx //= base
            q = 0
            r = origin
            cc = origin
            r0 = origin
            r1 = origin
            c0 = origin
            c1 = origin
            s = 0
            nt = 0
            done = False
            while s < budget:
                c = codes[q * m + plane[r, cc]]
                s += 1
                plane[r, cc] = write[c]
                touched_r[nt] = r
                touched_c[nt] = cc
                nt += 1
                if halt[c]:
                    done = True
                    break
                mv = move[c]
                if mv == 0:
                    r -= 1
                    if r < r0:
                        r0 = r
                elif mv == 1:
                    r += 1
                    if r > r1:
                        r1 = r
                elif mv == 2:
                    cc -= 1
                    if cc < c0:
                        c0 = cc
                else:
                    cc += 1
                    if cc > c1:
                        c1 = cc
                q = nxt[c]
            steps[j] = s
            if done:
                halted[j] = 1
                rows = r1 - r0 + 1
                cols = c1 - c0 + 1
                dims[j, 0] = rows
                dims[j, 1] = cols
                if rows * cols <= cap:
                    p = 0
                    for y in range(r0, r1 + 1):
                        for x in range(c0, c1 + 1):
                            outbuf[j, p] = plane[y, x]
                            p += 1
            else:
                halted[j] = 0
            for t in range(nt):
                plane[touched_r[t], touched_c[t]] = 0
