"""Runtime fields laid out along a Peano curve, written as binary PPM.

Pixel colours: white for censored machines, red for the longest-running
halting machines of the rendered segment, and a gray ramp
``floor(225 * (R - steps) / R) + 15`` otherwise (darker = slower).
Cells past the end of the segment get a light background.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

WHITE = (255, 255, 255)
RED = (255, 0, 0)
BACKGROUND = (250, 250, 250)
GRAY_FLOOR = 15
GRAY_SPAN = 225


@dataclass(frozen=True)
class RuntimePalette:
    nonhalting: tuple[int, int, int] = WHITE
    busy_beaver: tuple[int, int, int] = RED
    background: tuple[int, int, int] = BACKGROUND
    gray_floor: int = GRAY_FLOOR
    gray_span: int = GRAY_SPAN

    def gray(self, steps, max_steps):
        return np.floor(self.gray_span * (max_steps - steps) / max_steps).astype(np.int64) + self.gray_floor


class CapacityError(ValueError):
    pass


def capacity(k: int) -> int:
    return 9**k


def minimal_level(count: int) -> int:
    k = 1
    while 9**k < count:
        k += 1
    return k


def peano_xy(t: int, k: int) -> tuple[int, int]:
    """Cell ``(x, y)`` of index ``t`` on the level-``k`` Peano curve.

    ``t`` is read as ``2k`` base-3 digits, most significant first,
    alternating x and y digits. An x digit is reflected (``d -> 2 - d``)
    when the y digits before it sum to an odd number; a y digit when the
    x digits up to and including its partner do.
    """
    if k < 1:
        raise ValueError(f"level must be >= 1, got {k}")
    if not 0 <= t < 9**k:
        raise IndexError(f"index {t} outside [0, {9**k})")
    digits = []
    for _ in range(2 * k):
        t, r = divmod(t, 3)
        digits.append(r)
    digits.reverse()
    x = y = 0
    xsum = ysum = 0
    for i in range(k):
        a, b = digits[2 * i], digits[2 * i + 1]
        xa = 2 - a if ysum % 2 else a
        xsum += a
        yb = 2 - b if xsum % 2 else b
        ysum += b
        x = 3 * x + xa
        y = 3 * y + yb
    return x, y


def peano_table(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``peano_xy`` for all ``9**k`` indices."""
    t = np.arange(9**k, dtype=np.int64)
    digits = np.empty((2 * k, t.size), dtype=np.int64)
    rest = t.copy()
    for p in range(2 * k - 1, -1, -1):
        rest, digits[p] = np.divmod(rest, 3)
    x = np.zeros_like(t)
    y = np.zeros_like(t)
    xsum = np.zeros_like(t)
    ysum = np.zeros_like(t)
    for i in range(k):
        a, b = digits[2 * i], digits[2 * i + 1]
        xa = np.where(ysum % 2 == 1, 2 - a, a)
        xsum += a
        yb = np.where(xsum % 2 == 1, 2 - b, b)
        ysum += b
        x = 3 * x + xa
        y = 3 * y + yb
    return x, y


def render_field(halted, steps, k: int | None = None, palette: RuntimePalette = RuntimePalette()) -> np.ndarray:
    """RGB image (``3**k`` square, uint8) of one segment's runtimes.

    ``halted`` and ``steps`` are per-machine arrays in enumeration order;
    element ``i`` is drawn at ``peano_xy(i, k)``.
    """
    halted = np.asarray(halted, dtype=bool)
    steps = np.asarray(steps, dtype=np.int64)
    count = len(halted)
    if k is None:
        k = minimal_level(count)
    if count > capacity(k):
        raise CapacityError(f"{count} machines exceed level {k} capacity {capacity(k)}; use k >= {minimal_level(count)}")
    side = 3**k
    img = np.empty((side, side, 3), dtype=np.uint8)
    img[:, :] = palette.background
    colors = np.empty((count, 3), dtype=np.uint8)
    colors[:] = palette.nonhalting
    if halted.any():
        top = int(steps[halted].max())
        g = palette.gray(steps[halted], top)
        colors[halted] = np.stack([g, g, g], axis=1)
        colors[halted & (steps == top)] = palette.busy_beaver
    x, y = peano_table(k)
    img[y[:count], x[:count]] = colors
    return img


def ppm_bytes(img: np.ndarray) -> bytes:
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def write_image(img: np.ndarray, destination) -> None:
    """Write a binary PPM (P6) to a path or binary stream."""
    data = ppm_bytes(img)
    if not isinstance(destination, (str, bytes, os.PathLike)):
        destination.write(data)
        return
    try:
        with open(destination, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise OSError(f"cannot write image to {os.fspath(destination)!r}: {e.strerror}") from e


def read_ppm(source) -> np.ndarray:
    with open(source, "rb") as fh:
        data = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError(f"unsupported max value {maxval}")
    pixels = np.frombuffer(data[pos + 1:pos + 1 + w * h * 3], dtype=np.uint8)
    return pixels.reshape(h, w, 3)


def write_sidecar(destination, halted, steps, k: int, start: int = 0) -> None:
    """CSV ``index,x,y,steps,halted`` for each rendered machine."""
    x, y = peano_table(k)
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "x", "y", "steps", "halted"])
        for i, (h, s) in enumerate(zip(np.asarray(halted).tolist(), np.asarray(steps).tolist())):
            w.writerow([start + i, int(x[i]), int(y[i]), s, int(bool(h))])
