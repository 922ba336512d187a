"""Bundled CTM tables and the recipes that regenerate them."""

from __future__ import annotations

import os
from importlib import resources

from .ctm import CTMTable, load_table, sample_table, save_table, table_for_space
from .machine import Dimension, MachineSpace

TABLE_DIR_ENV = "COMPSPACE_TABLE_DIR"

RECIPES = {
    # every (3,2) machine, budget 200: all strings up to length 5
    "1d-3-2": dict(space=MachineSpace(3, 2), budget=200),
    # 2**20 uniformly drawn (4,2) turmites: all 2x2 arrays
    "2d-4-2-sample": dict(space=MachineSpace(4, 2, Dimension.TWO_D), budget=1000, samples=1 << 20, seed=0),
}


def build(name: str, workers: int | None = None) -> CTMTable:
    recipe = dict(RECIPES[name])
    space = recipe.pop("space")
    if "samples" in recipe:
        return sample_table(space, workers=workers, **recipe)
    return table_for_space(space, workers=workers, **recipe)


def filename(name: str) -> str:
    return f"ctm-{name}.ctm"


def path(name: str) -> str:
    """Location of a bundled table; ``$COMPSPACE_TABLE_DIR`` takes precedence."""
    if name not in RECIPES:
        raise KeyError(f"unknown table {name!r}; known: {', '.join(RECIPES)}")
    override = os.environ.get(TABLE_DIR_ENV)
    if override and os.path.exists(os.path.join(override, filename(name))):
        return os.path.join(override, filename(name))
    return str(resources.files("compspace").joinpath("data", filename(name)))


def load(name: str) -> CTMTable:
    return load_table(path(name))


def regenerate(directory: str, workers: int | None = None) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for name in RECIPES:
        dest = os.path.join(directory, filename(name))
        save_table(build(name, workers), dest)
        written.append(dest)
    return written
