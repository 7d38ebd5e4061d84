"""Gaussian integers Z[i]: prime ideals through the splitting law and
factorization of elements given as integer pairs (a, b) meaning a + bi.

Prime ideal labels are (p, tag, index): ``(2, "ramified", 0)`` for (1 + i),
``(p, "split", 0)`` for (c + di) and ``(p, "split", 1)`` for (c - di) where
p = c^2 + d^2 with c > d > 0, and ``(p, "inert", 0)`` for (p) with p = 3 mod 4.
"""

import math
from functools import lru_cache

from .errors import DecodeError
from .primes import factor_int, is_prime

TAGS = ("ramified", "split", "inert")


@lru_cache(maxsize=1 << 16)
def two_squares(p):
    """(c, d) with c^2 + d^2 = p and c > d > 0, for a prime p = 1 mod 4."""
    if p % 4 != 1:
        raise ValueError(f"{p} is not 1 mod 4")
    n = 2
    while pow(n, (p - 1) // 2, p) != p - 1:
        n += 1
    x = pow(n, (p - 1) // 4, p)
    a, b = p, x
    while b * b > p:
        a, b = b, a % b
    c = b
    d = math.isqrt(p - c * c)
    if c * c + d * d != p:
        raise AssertionError("two-squares decomposition failed")
    return (c, d) if c > d else (d, c)


def generator(label):
    """A Gaussian integer (a, b) generating the prime ideal with this label."""
    p, tag, idx = label
    if tag == "ramified":
        return (1, 1)
    if tag == "inert":
        return (p, 0)
    c, d = two_squares(p)
    return (c, d) if idx == 0 else (c, -d)


def norm_of_label(label):
    p, tag, _ = label
    return p * p if tag == "inert" else p


def validate_label(label):
    try:
        p, tag, idx = label
        p, idx = int(p), int(idx)
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"bad prime ideal label {label!r}") from exc
    ok = tag in TAGS and is_prime(p)
    if ok and tag == "ramified":
        ok = p == 2 and idx == 0
    elif ok and tag == "split":
        ok = p % 4 == 1 and idx in (0, 1)
    elif ok:
        ok = p % 4 == 3 and idx == 0
    if not ok:
        raise DecodeError(f"bad prime ideal label {label!r}")
    return (p, tag, idx)


def gmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _divide_exact(z, pi, norm):
    """z / pi if pi divides z, else None."""
    a, b = z
    c, d = pi
    re, im = a * c + b * d, b * c - a * d
    if re % norm or im % norm:
        return None
    return (re // norm, im // norm)


def factor_gaussian(z):
    """Factor a nonzero Gaussian integer into prime ideal labels.

    Returns a list of (label, multiplicity) sorted by (norm, label).
    """
    try:
        a, b = (int(z[0]), int(z[1]))
    except (TypeError, ValueError, IndexError) as exc:
        raise DecodeError(f"bad Gaussian integer {z!r}") from exc
    if a == 0 and b == 0:
        raise DecodeError("zero has no factorization")
    z = (a, b)
    out = []
    for p, e in factor_int(a * a + b * b):
        if p == 2:
            out.append(((2, "ramified", 0), e))
        elif p % 4 == 3:
            out.append(((p, "inert", 0), e // 2))
        else:
            for idx in (0, 1):
                pi = generator((p, "split", idx))
                m = 0
                while True:
                    w = _divide_exact(z, pi, p)
                    if w is None:
                        break
                    z, m = w, m + 1
                if m:
                    out.append(((p, "split", idx), m))
    out.sort(key=lambda t: (norm_of_label(t[0]), t[0][0], TAGS.index(t[0][1]), t[0][2]))
    return out
