"""Block Decomposition Method.

An object is cut into non-overlapping blocks of side ``d``. Each distinct
block ``r`` with multiplicity ``n`` contributes ``K(r) + log2(n)``, where
``K(r)`` is looked up in a CTM table. Only the multiset of blocks
matters, so any block permutation of the input has the same value.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .ctm import CTMTable

DEFAULT_D_2D = 4
DEFAULT_D_1D = 12


class Boundary(enum.Enum):
    EXACT = "exact"
    IGNORED = "ignored"
    PADDED = "padded"


class DimensionError(ValueError):
    pass


class MissingBlockError(KeyError):
    def __init__(self, blocks: Sequence[str]):
        self.blocks = list(blocks)
        shown = ", ".join(self.blocks[:8]) + (" ..." if len(self.blocks) > 8 else "")
        super().__init__(f"{len(self.blocks)} block(s) missing from base table: {shown}")

    def __str__(self):
        return self.args[0]


class BaseTable:
    """Constant-time ``K(block)`` lookups over one or more CTM tables.

    When several tables are given, the first one containing a block wins.
    """

    def __init__(self, values: Mapping[str, float]):
        self.values = dict(values)

    @classmethod
    def from_ctm(cls, *tables: CTMTable) -> "BaseTable":
        values: dict[str, float] = {}
        for t in reversed(tables):
            values.update({k: t.ctm(k) for k in t.counts})
        return cls(values)

    def __contains__(self, key):
        return key in self.values

    def __len__(self):
        return len(self.values)

    def k(self, key: str) -> float:
        try:
            return self.values[key]
        except KeyError:
            raise MissingBlockError([key]) from None


def _as_base(table) -> BaseTable:
    if isinstance(table, BaseTable):
        return table
    if isinstance(table, CTMTable):
        return BaseTable.from_ctm(table)
    return BaseTable(table)


@dataclass
class BlockDecomposition:
    d: int
    pairs: list[tuple[str, int]]
    boundary: Boundary
    shape: tuple[int, ...]
    ignored_cells: int = 0
    padded_cells: int = 0
    pad: int = 0

    @property
    def block_cells(self) -> int:
        return self.d ** len(self.shape)

    @property
    def multiset(self) -> Counter:
        return Counter(dict(self.pairs))


def _as_input(obj):
    """A str stays 1D; anything else becomes an int array (1D or 2D)."""
    if isinstance(obj, str):
        if not obj or not obj.isdigit():
            raise ValueError(f"input must be a nonempty digit string, got {obj!r}")
        return np.frombuffer(obj.encode(), dtype=np.uint8) - ord("0")
    arr = np.asarray(obj)
    if arr.ndim not in (1, 2) or arr.size == 0:
        raise ValueError(f"input must be a nonempty 1D or 2D array, got shape {arr.shape}")
    if arr.min() < 0 or arr.max() > 9:
        raise ValueError("symbols must lie in 0..9")
    return arr.astype(np.uint8)


def _block_grid(arr: np.ndarray, d: int, boundary: Boundary, pad: int):
    """Trim or pad ``arr`` to multiples of ``d``; return it with cell bookkeeping."""
    shape = arr.shape
    rem = tuple(s % d for s in shape)
    ignored = padded = 0
    if any(rem):
        if boundary is Boundary.EXACT:
            detail = ", ".join(f"{s} % {d} = {r}" for s, r in zip(shape, rem))
            raise DimensionError(f"shape {shape} not divisible by block size {d} ({detail})")
        if boundary is Boundary.IGNORED:
            keep = tuple(s - r for s, r in zip(shape, rem))
            arr = arr[tuple(slice(0, k) for k in keep)]
            ignored = int(np.prod(shape)) - int(np.prod(keep))
        else:
            widths = [(0, (d - r) % d) for r in rem]
            arr = np.pad(arr, widths, constant_values=pad)
            padded = arr.size - int(np.prod(shape))
    return arr, ignored, padded


def block_keys(arr: np.ndarray, d: int) -> np.ndarray:
    """Block keys in row-major block order; ``arr`` must tile exactly."""
    if arr.ndim == 1:
        if arr.size == 0:
            return np.array([], dtype=object)
        blocks = (arr.reshape(-1, d) + ord("0")).astype(np.uint8)
        return np.array([b.tobytes().decode() for b in blocks], dtype=object)
    rows, cols = arr.shape
    blocks = arr.reshape(rows // d, d, cols // d, d).swapaxes(1, 2).reshape(-1, d * d)
    prefix = f"{d}x{d}:"
    blocks = (blocks + ord("0")).astype(np.uint8)
    return np.array([prefix + b.tobytes().decode() for b in blocks], dtype=object)


def decompose(obj, d: int, boundary: Boundary | str = Boundary.EXACT, pad: int = 0) -> BlockDecomposition:
    """Split a string or array into ``d``-blocks; pairs keep first-seen order."""
    if d < 1:
        raise ValueError(f"block size must be >= 1, got {d}")
    boundary = Boundary(boundary)
    arr = _as_input(obj)
    tiled, ignored, padded = _block_grid(arr, d, boundary, pad)
    counts: dict[str, int] = {}
    for key in block_keys(tiled, d):
        counts[key] = counts.get(key, 0) + 1
    return BlockDecomposition(d, list(counts.items()), boundary, arr.shape, ignored, padded, pad)


def bdm_from_pairs(pairs, table) -> float:
    base = _as_base(table)
    missing = [k for k, _ in pairs if k not in base]
    if missing:
        raise MissingBlockError(missing)
    return math.fsum(base.k(k) + math.log2(n) for k, n in pairs)


def _default_d(obj) -> int:
    if isinstance(obj, str) or np.ndim(obj) == 1:
        return DEFAULT_D_1D
    return DEFAULT_D_2D


def bdm_value(obj, table, d: int | None = None, boundary: Boundary | str = Boundary.EXACT, pad: int = 0) -> float:
    """BDM in bits of a string or 2D array."""
    d = _default_d(obj) if d is None else d
    return bdm_from_pairs(decompose(obj, d, boundary, pad).pairs, table)


def bdm_string(s: str, table, d: int = DEFAULT_D_1D, boundary: Boundary | str = Boundary.EXACT, pad: int = 0) -> float:
    return bdm_value(s, table, d, boundary, pad)


@dataclass
class BDM:
    """A configured estimator: table, block size and boundary strategy."""

    table: BaseTable | CTMTable | Mapping[str, float]
    d: int = DEFAULT_D_2D
    boundary: Boundary = Boundary.EXACT
    pad: int = 0
    _base: BaseTable = field(init=False, repr=False)

    def __post_init__(self):
        self._base = _as_base(self.table)
        self.boundary = Boundary(self.boundary)

    @property
    def base(self) -> BaseTable:
        return self._base

    def decompose(self, obj) -> BlockDecomposition:
        return decompose(obj, self.d, self.boundary, self.pad)

    def tile(self, obj) -> np.ndarray:
        arr, _, _ = _block_grid(_as_input(obj), self.d, self.boundary, self.pad)
        return arr

    def term(self, key: str, n: int) -> float:
        if n <= 0:
            return 0.0
        return self._base.k(key) + math.log2(n)

    def __call__(self, obj) -> float:
        return bdm_from_pairs(self.decompose(obj).pairs, self._base)


def shannon_block_entropy(s, block_size: int = 1) -> float:
    """Entropy in bits per block of the non-overlapping blocks of ``s``.

    A trailing partial block is dropped.
    """
    if block_size < 1:
        raise ValueError(f"block size must be >= 1, got {block_size}")
    if not isinstance(s, str):
        s = "".join(str(int(v)) for v in np.asarray(s).ravel())
    if len(s) < block_size:
        raise ValueError(f"input shorter than block size {block_size}")
    usable = len(s) - len(s) % block_size
    counts = Counter(s[i:i + block_size] for i in range(0, usable, block_size))
    total = sum(counts.values())
    h = -sum(c / total * math.log2(c / total) for c in counts.values())
    return h + 0.0  # normalise -0.0


def _midrank(value: float, population: Sequence[float]) -> float:
    pop = np.asarray(population, dtype=float)
    tol = 1e-9
    below = np.sum(pop < value - tol)
    equal = np.sum(np.abs(pop - value) <= tol)
    return float((below + 0.5 * equal) / len(pop))


def compare_entropy_vs_bdm(
    s: str,
    table,
    d: int = DEFAULT_D_1D,
    population: Sequence[str] | None = None,
    block_size: int = 1,
    seed: int = 0,
    samples: int = 1000,
    boundary: Boundary | str = Boundary.EXACT,
) -> dict:
    """Entropy and BDM of ``s``, each as a value and a normalised rank.

    Ranks are mid-ranks in [0, 1] against ``population`` (default:
    ``samples`` uniform random binary strings of the same length drawn
    with ``seed``). ``disagree`` is set when the two ranks are at least
    one half apart.
    """
    if population is None:
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=(samples, len(s)))
        population = ["".join(map(str, row)) for row in bits]
    else:
        seed = None
    population = list(population)
    if s not in population:
        population.append(s)
    base = _as_base(table)
    ent = [shannon_block_entropy(p, block_size) for p in population]
    bdm = [bdm_value(p, base, d, boundary) for p in population]
    e = shannon_block_entropy(s, block_size)
    b = bdm_value(s, base, d, boundary)
    er, br = _midrank(e, ent), _midrank(b, bdm)
    return {
        "entropy": e,
        "bdm": b,
        "entropy_rank": er,
        "bdm_rank": br,
        "disagree": abs(er - br) >= 0.5,
        "population": len(population),
        "seed": seed,
        "d": d,
        "block_size": block_size,
    }
