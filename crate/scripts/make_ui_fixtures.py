#!/usr/bin/env python3
"""Writes the colouriser export fixtures used by the loader contract tests.

Coordinates are formatted like JavaScript's Number.prototype.toPrecision(17)
and files end every line with LF, matching what the browser editor emits.
"""

import random
from decimal import Decimal
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/ui_export/ui"


def to_precision_17(x: float) -> str:
    if x == 0:
        return "0.0000000000000000"
    sign = "-" if x < 0 else ""
    digits, exp = _digits(abs(x))
    if exp < -6 or exp >= 17:
        mant = digits[0] + "." + digits[1:]
        return f"{sign}{mant}e{'+' if exp >= 0 else '-'}{abs(exp)}"
    if exp >= 0:
        head, tail = digits[: exp + 1], digits[exp + 1 :]
        return sign + head + ("." + tail if tail else "")
    return sign + "0." + "0" * (-exp - 1) + digits


def _digits(x: float):
    s = f"{Decimal(x):.16e}"
    mant, exp = s.split("e")
    return mant.replace(".", ""), int(exp)


def write(name, points, layers):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / f"{name}.data", "w", newline="\n") as f:
        for x, y in points:
            f.write(f"{to_precision_17(x)} {to_precision_17(y)}\n")
    for j, layer in enumerate(layers):
        with open(OUT / f"{name}.labels{j}", "w", newline="\n") as f:
            f.write("".join(f"{v}\n" for v in layer))


def blobs(rng, centres, per, spread):
    pts, lab = [], []
    for c, (cx, cy) in enumerate(centres, start=1):
        for _ in range(per):
            pts.append((rng.gauss(cx, spread), rng.gauss(cy, spread)))
            lab.append(c)
    return pts, lab


def main():
    rng = random.Random(20240901)

    write("minimal", [(0.0, 0.0), (1.0, 0.0), (5.0, 5.0), (6.0, 5.0)], [[1, 1, 2, 2]])

    pts, lab = blobs(rng, [(0, 0), (4, 4), (8, 0)], 15, 0.7)
    write("three_blobs", pts, [lab])

    # second layer merges two blobs, third marks some points as noise
    pts, lab = blobs(rng, [(0, 0), (3, 0), (10, 10)], 12, 0.5)
    merged = [1 if v < 3 else 2 for v in lab]
    noisy = [0 if i % 5 == 4 and v < 3 else v for i, v in enumerate(lab)]
    write("layers", pts, [lab, merged, noisy])

    pts = [(rng.uniform(-1e-7, 1e-7), rng.uniform(-1e-7, 1e-7)) for _ in range(20)]
    write("tiny_scale", pts, [[1 + (i % 2) for i in range(20)]])

    pts = [(rng.uniform(-1, 1) * 1e20, rng.uniform(-1, 1) * 3e17) for _ in range(20)]
    write("huge_scale", pts, [[1 + (i * 7 % 3) for i in range(20)]])

    pts = [(float(i % 5), float(i // 5)) for i in range(25)]
    write("integer_grid", pts, [[1 + (i % 5 >= 2) for i in range(25)], [1 + (i // 5) for i in range(25)]])

    pts, lab = blobs(rng, [(-5, -5), (5, 5)], 20, 1.0)
    lab = [0 if i % 9 == 0 else v for i, v in enumerate(lab)]
    write("with_noise", pts, [lab])

    centres = [(3 * (c % 3), 3 * (c // 3)) for c in range(9)]
    pts, lab = blobs(rng, centres, 6, 0.4)
    write("nine_labels", pts, [lab])

    pts = [(-0.5 - i, -(0.1 * i) - 1e-3) for i in range(10)]
    write("negative", pts, [[1] * 5 + [2] * 5, [2, 1, 2, 1, 2, 1, 2, 1, 2, 1]])

    pts = [(0.1 * i, 0.2 * i) for i in range(12)]
    write("decimal_fractions", pts, [[1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3]])


if __name__ == "__main__":
    main()
