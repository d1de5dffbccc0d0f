#!/usr/bin/env python3
"""Regenerate the high-precision reference values for the fusion models.

Writes one row per random input: kind, a, b, expected. Inputs are printed with
repr() so they parse back to the exact same doubles; expected values come from
mpmath at 50 significant digits.

    python3 scripts/gen_scalar_oracle.py > crates/cli/tests/data/scalar_oracle.csv
"""

import random
import sys

import mpmath

mpmath.mp.dps = 50

ALPHA_DEG = 120
S, T, Z = mpmath.mpf("3.47"), mpmath.mpf("3.03"), mpmath.mpf("4.76")
N = 10_000


def brightness(a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    c = mpmath.cos(mpmath.pi * ALPHA_DEG / 180)
    return mpmath.sqrt(a * a + b * b + 2 * a * b * c)


def contrast(a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    s = a**S + b**T
    if s == 0:
        return mpmath.mpf(0)
    return s ** (S / T) / (Z + s)


def main():
    rng = random.Random(20240611)
    out = sys.stdout
    out.write("kind,a,b,expected\n")
    for i in range(N):
        if i % 2 == 0:
            a, b = rng.random(), rng.random()
            if i % 50 == 0:
                b = a
            v = brightness(a, b)
            kind = "brightness"
        else:
            # contour contrast is a percentage; cover small values on a log scale too
            if i % 10 == 1:
                a, b = 10 ** rng.uniform(-3, 2), 10 ** rng.uniform(-3, 2)
            else:
                a, b = rng.uniform(0, 100), rng.uniform(0, 100)
            v = contrast(a, b)
            kind = "contrast"
        out.write(f"{kind},{a!r},{b!r},{mpmath.nstr(v, 25, min_fixed=1, max_fixed=0)}\n")


if __name__ == "__main__":
    main()
