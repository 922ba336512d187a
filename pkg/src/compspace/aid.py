"""Perturbation calculus over grids and graphs.

``aid_delta(G, p) = C(G) - C(p(G))`` with ``C`` estimated by BDM, so a
positive delta means the perturbation lowered the estimated complexity.
An element is *neutral* when ``|delta| <= log2 |G|`` and carries
*information* otherwise. The threshold is a parameter; by default
``|G|`` is the cell count of a grid, the vertex count of a graph, or the
row count of a grid declared to be a space-time evolution.

Signatures evaluate every perturbation against one cached block
decomposition and recompute only the blocks a perturbation touches.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bdm import BDM, block_keys

GRID = "grid"
GRAPH = "graph"

NEUTRAL = "neutral"
INFORMATION = "information"


def _grid(obj) -> np.ndarray:
    arr = np.array(obj, dtype=np.uint8)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2D array, got shape {arr.shape}")
    if arr.max() > 1:
        raise ValueError("expected a binary array")
    return arr


def check_graph(adj, directed: bool = False) -> np.ndarray:
    a = _grid(adj)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got {a.shape}")
    if np.any(np.diag(a)):
        raise ValueError("adjacency matrix must have a zero diagonal")
    if not directed and not np.array_equal(a, a.T):
        raise ValueError("undirected adjacency matrix must be symmetric")
    return a


def perturb_flip(grid, i: int, j: int) -> np.ndarray:
    g = _grid(grid)
    if not (0 <= i < g.shape[0] and 0 <= j < g.shape[1]):
        raise IndexError(f"cell ({i}, {j}) outside grid of shape {g.shape}")
    g[i, j] ^= 1
    return g


class NoSuchEdgeError(KeyError):
    pass


def perturb_edge_delete(adj, u: int, v: int, directed: bool = False) -> np.ndarray:
    a = _grid(adj)
    n = a.shape[0]
    if not (0 <= u < n and 0 <= v < n) or not a[u, v]:
        raise NoSuchEdgeError(f"no edge ({u}, {v})")
    a[u, v] = 0
    if not directed:
        a[v, u] = 0
    return a


def perturb_edge_add(adj, u: int, v: int, directed: bool = False) -> np.ndarray:
    a = _grid(adj)
    if u == v:
        raise ValueError("self loops are not allowed")
    a[u, v] = 1
    if not directed:
        a[v, u] = 1
    return a


@dataclass(frozen=True, order=True)
class Flip:
    i: int
    j: int

    def cells(self) -> list[tuple[int, int]]:
        return [(self.i, self.j)]

    def apply(self, grid) -> np.ndarray:
        return perturb_flip(grid, self.i, self.j)

    @property
    def element(self) -> str:
        return f"{self.i}:{self.j}"


@dataclass(frozen=True, order=True)
class EdgeDeletion:
    u: int
    v: int
    directed: bool = False

    def cells(self) -> list[tuple[int, int]]:
        if self.directed:
            return [(self.u, self.v)]
        return [(self.u, self.v), (self.v, self.u)]

    def apply(self, adj) -> np.ndarray:
        return perturb_edge_delete(adj, self.u, self.v, self.directed)

    @property
    def element(self) -> str:
        return f"{self.u}-{self.v}"


class Identity:
    element = "id"

    def cells(self):
        return []

    def apply(self, obj):
        return _grid(obj)


class _Context:
    """Block keys and counts of one object, for incremental deltas."""

    def __init__(self, obj, estimator: BDM):
        self.est = estimator
        self.src = _grid(obj)
        self.tiled = estimator.tile(self.src)
        d = estimator.d
        self.brows = self.tiled.shape[0] // d
        self.bcols = self.tiled.shape[1] // d
        self.keys = block_keys(self.tiled, d).reshape(self.brows, self.bcols)
        self.counts: dict[str, int] = {}
        for k in self.keys.ravel():
            self.counts[k] = self.counts.get(k, 0) + 1

    def delta(self, perturbation) -> float:
        """C(G) - C(G') touching only the affected blocks."""
        d = self.est.d
        changed: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for i, j in perturbation.cells():
            if not (0 <= i < self.src.shape[0] and 0 <= j < self.src.shape[1]):
                raise IndexError(f"cell ({i}, {j}) outside object of shape {self.src.shape}")
            bi, bj = i // d, j // d
            if bi >= self.brows or bj >= self.bcols:
                continue  # ignored boundary cell
            changed.setdefault((bi, bj), []).append((i, j))
        if isinstance(perturbation, EdgeDeletion):
            for i, j in perturbation.cells():
                if not self.src[i, j]:
                    raise NoSuchEdgeError(f"no edge ({i}, {j})")
        if not changed:
            return 0.0
        diff: dict[str, int] = {}
        prefix = f"{d}x{d}:"
        for (bi, bj), cells in changed.items():
            block = self.tiled[bi * d:(bi + 1) * d, bj * d:(bj + 1) * d].copy()
            for i, j in cells:
                if isinstance(perturbation, EdgeDeletion):
                    block[i - bi * d, j - bj * d] = 0
                else:
                    block[i - bi * d, j - bj * d] ^= 1
            new = prefix + (block.ravel() + ord("0")).astype(np.uint8).tobytes().decode()
            old = self.keys[bi, bj]
            diff[old] = diff.get(old, 0) - 1
            diff[new] = diff.get(new, 0) + 1
        before = after = 0.0
        for key, dn in diff.items():
            if dn == 0:
                continue
            n = self.counts.get(key, 0)
            before += self.est.term(key, n)
            after += self.est.term(key, n + dn)
        return before - after


def aid_delta(obj, perturbation, estimator: BDM) -> float:
    """Signed ``C(G) - C(G')`` for one perturbation."""
    return _Context(obj, estimator).delta(perturbation)


def size_term(obj, kind: str = GRID, measure: str | None = None) -> float:
    """``log2 |G|``; ``measure`` is one of ``cells``, ``vertices``, ``rows``."""
    arr = np.asarray(obj)
    measure = measure or ("vertices" if kind == GRAPH else "cells")
    if measure == "cells":
        size = arr.size
    elif measure in ("vertices", "rows"):
        size = arr.shape[0]
    else:
        raise ValueError(f"unknown size measure {measure!r}")
    return math.log2(size)


def classify(delta: float, size: float | None = None, threshold: float | None = None) -> tuple[str, str]:
    """``(class, sign)`` for a delta; ``size`` is ``|G|`` (not its log).

    ``threshold`` overrides ``log2(size)``. The boundary is neutral.
    """
    if threshold is None:
        if size is None:
            raise ValueError("need a size or an explicit threshold")
        threshold = math.log2(size)
    cls = NEUTRAL if abs(delta) <= threshold else INFORMATION
    sign = "positive" if delta > 0 else "negative" if delta < 0 else "zero"
    return cls, sign


@dataclass(frozen=True)
class Entry:
    element: str
    delta: float
    classification: str
    sign: str

    @property
    def abs_delta(self) -> float:
        return abs(self.delta)


@dataclass
class PerturbationReport:
    kind: str
    entries: list[Entry]
    size_term: float

    @property
    def signature(self) -> list[float]:
        return [e.delta for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["element", "delta", "abs_delta", "class", "sign"])
        for e in self.entries:
            w.writerow([e.element, repr(e.delta), repr(e.abs_delta), e.classification, e.sign])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "size_term": self.size_term,
                "entries": [
                    {
                        "element": e.element,
                        "delta": e.delta,
                        "abs_delta": e.abs_delta,
                        "class": e.classification,
                        "sign": e.sign,
                    }
                    for e in self.entries
                ],
            },
            indent=1,
        )


def family(obj, name: str, directed: bool = False) -> list:
    """All single flips (``"flips"``) or single edge deletions (``"edges"``)."""
    arr = np.asarray(obj)
    if name == "flips":
        return [Flip(i, j) for i in range(arr.shape[0]) for j in range(arr.shape[1])]
    if name == "edges":
        a = check_graph(arr, directed)
        if directed:
            pairs = zip(*np.nonzero(a))
        else:
            pairs = zip(*np.nonzero(np.triu(a, 1)))
        return [EdgeDeletion(int(u), int(v), directed) for u, v in pairs]
    raise ValueError(f"unknown perturbation family {name!r}")


def _sort_key(p):
    if isinstance(p, Flip):
        return (p.i, p.j)
    return (p.u, p.v)


def signature(
    obj,
    perturbations: str | Iterable,
    estimator: BDM,
    kind: str | None = None,
    measure: str | None = None,
    threshold: float | None = None,
    directed: bool = False,
) -> PerturbationReport:
    """Evaluate a perturbation family; entries sorted by descending delta."""
    if isinstance(perturbations, str):
        kind = kind or (GRAPH if perturbations == "edges" else GRID)
        perturbations = family(obj, perturbations, directed)
    kind = kind or GRID
    perturbations = list(perturbations)
    if not perturbations:
        raise ValueError("empty perturbation family")
    ctx = _Context(obj, estimator)
    st = size_term(obj, kind, measure) if threshold is None else threshold
    rows = []
    for p in perturbations:
        delta = ctx.delta(p)
        cls, sign = classify(delta, threshold=st)
        rows.append((-delta, _sort_key(p), Entry(p.element, delta, cls, sign)))
    rows.sort(key=lambda r: (r[0], r[1]))
    return PerturbationReport(kind, [r[2] for r in rows], st)


# -- elementary cellular automata -------------------------------------------------


def eca_step(row: np.ndarray, rule: int) -> np.ndarray:
    left = np.roll(row, 1)
    right = np.roll(row, -1)
    pattern = (left << 2) | (row << 1) | right
    table = np.array([(rule >> k) & 1 for k in range(8)], dtype=np.uint8)
    return table[pattern]


def eca_evolve(rule: int, width: int, steps: int, init: str | Sequence[int] = "center") -> np.ndarray:
    """Space-time grid of an elementary CA with periodic boundary.

    Returns ``steps + 1`` rows; row 0 is ``init`` (a single 1 at
    ``width // 2`` by default).
    """
    if not 0 <= rule <= 255:
        raise ValueError(f"ECA rule must be in 0..255, got {rule}")
    if width < 3 or steps < 1:
        raise ValueError("need width >= 3 and steps >= 1")
    if isinstance(init, str):
        if init != "center":
            raise ValueError(f"unknown init {init!r}")
        row = np.zeros(width, dtype=np.uint8)
        row[width // 2] = 1
    else:
        row = np.asarray(init, dtype=np.uint8)
        if row.shape != (width,):
            raise ValueError(f"init row must have length {width}")
    grid = np.empty((steps + 1, width), dtype=np.uint8)
    grid[0] = row
    for t in range(steps):
        grid[t + 1] = eca_step(grid[t], rule)
    return grid


def temporal_profile(grid, estimator: BDM, rule: int | None = None) -> list[float]:
    """Mean |delta| of all single-cell flips, row by row.

    Without ``rule`` each flip changes one cell of the grid. With an ECA
    ``rule`` the flip is injected at its row and every later row is
    re-evolved, so an early flip rewrites the rest of the evolution.
    """
    g = _grid(grid)
    if rule is None:
        ctx = _Context(g, estimator)
        return [
            float(np.mean([abs(ctx.delta(Flip(t, j))) for j in range(g.shape[1])]))
            for t in range(g.shape[0])
        ]
    c0 = estimator(g)
    out = []
    for t in range(g.shape[0]):
        deltas = []
        for j in range(g.shape[1]):
            h = inject_flip(g, rule, t, j)
            deltas.append(abs(c0 - estimator(h)))
        out.append(float(np.mean(deltas)))
    return out


def inject_flip(grid, rule: int, t: int, j: int) -> np.ndarray:
    """Flip cell ``(t, j)`` and re-evolve rows ``t+1`` onward under ``rule``."""
    h = perturb_flip(grid, t, j)
    for s in range(t, h.shape[0] - 1):
        h[s + 1] = eca_step(h[s], rule)
    return h
