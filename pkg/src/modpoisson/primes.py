"""Rational primes: a cached sieve, explicit prime-counting bounds, certified
tails of prime sums, and integer factorization.

The certified tail of ``sum_{p > N} p^(-sigma)`` is obtained by writing it as
the Stieltjes integral ``int_N^inf (pi(t) - pi(N)) sigma t^(-sigma-1) dt`` and
replacing ``pi(t)`` by published explicit bounds (Rosser-Schoenfeld, Dusart).
Each piece then integrates in closed form through generalized exponential
integrals ``E_m``.
"""

import math
import random

import numpy as np
from scipy import special

SIEVE_CAP = 10**8

_cache = {"limit": 1, "primes": np.zeros(0, dtype=np.int64)}


def _sieve(limit):
    """Odd-only sieve of Eratosthenes; returns all primes <= limit."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    # index i stands for 2i+1
    flags = np.ones(limit // 2 + 1, dtype=bool)
    flags[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if flags[i]:
            p = 2 * i + 1
            flags[p * p // 2 :: p] = False
    odd = 2 * np.flatnonzero(flags).astype(np.int64) + 1
    odd = odd[odd <= limit]
    return np.concatenate(([2], odd)).astype(np.int64)


def primes_upto(n):
    """All primes <= n as an int64 array (a read-only view into the cache)."""
    n = int(n)
    if n > SIEVE_CAP:
        raise ValueError(f"sieve range {n} exceeds cap {SIEVE_CAP}")
    if n > _cache["limit"]:
        limit = max(n, min(2 * _cache["limit"], SIEVE_CAP), 1 << 16)
        primes = _sieve(limit)
        primes.setflags(write=False)
        _cache["primes"] = primes
        _cache["limit"] = limit
    primes = _cache["primes"]
    return primes[: np.searchsorted(primes, n, side="right")]


def prime_pi(x):
    """Exact prime counting function for x <= SIEVE_CAP."""
    x = int(math.floor(x))
    if x < 2:
        return 0
    return int(primes_upto(x).size)


# ---------------------------------------------------------------------------
# Explicit bounds on pi(t). Each piece is (start, end, coefficients) meaning
# pi(t) compared against t/ln t * sum_j c_j / ln(t)^j on [start, end).

_UPPER_PIECES = (
    (2.0, 355991.0, (1.25506,)),  # Rosser-Schoenfeld, valid for t > 1
    (355991.0, math.inf, (1.0, 1.0, 2.51)),  # Dusart, t >= 355991
)
_LOWER_PIECES = (
    (17.0, 599.0, (1.0,)),  # Rosser-Schoenfeld, t >= 17
    (599.0, 88789.0, (1.0, 1.0)),  # Dusart, t >= 599
    (88789.0, math.inf, (1.0, 1.0, 2.0)),  # Dusart, t >= 88789
)


def _piece_value(t, coeffs):
    lt = math.log(t)
    return t / lt * sum(c / lt**j for j, c in enumerate(coeffs))


def pi_upper_bound(t):
    """Explicit upper bound for pi(t), t >= 2."""
    for a, b, coeffs in _UPPER_PIECES:
        if a <= t < b:
            return _piece_value(t, coeffs)
    return 0.0 if t < 2 else _piece_value(t, _UPPER_PIECES[-1][2])


def pi_lower_bound(t):
    """Explicit lower bound for pi(t); zero below 17."""
    for a, b, coeffs in _LOWER_PIECES:
        if a <= t < b:
            return _piece_value(t, coeffs)
    return 0.0


def _g(m, sigma, a):
    """int_a^inf t^(-sigma) ln(t)^(-m) dt for a > 1, sigma > 1, m >= 1."""
    if math.isinf(a):
        return 0.0
    la = math.log(a)
    return la ** (1 - m) * float(special.expn(m, (sigma - 1.0) * la))


def _piece_integral(coeffs, sigma, a, b):
    """int_a^b (t/ln t * sum c_j ln(t)^-j) * sigma * t^(-sigma-1) dt."""
    if b <= a:
        return 0.0
    total = 0.0
    for j, c in enumerate(coeffs):
        total += c * (_g(j + 1, sigma, a) - _g(j + 1, sigma, b))
    return sigma * total


def _power_integral(sigma, a, b):
    """int_a^b sigma t^(-sigma-1) dt."""
    return a ** (-sigma) - (0.0 if math.isinf(b) else b ** (-sigma))


def _crossing(coeffs, level, a, b):
    """Smallest t in [a, b] with piece value >= level (piece is increasing)."""
    if _piece_value(a, coeffs) >= level:
        return a
    hi = b
    if math.isinf(hi):
        hi = max(2.0 * a, 4.0 * level * math.log(max(level, 3.0)))
        while _piece_value(hi, coeffs) < level:
            hi *= 2.0
    elif _piece_value(hi, coeffs) < level:
        return b
    lo = a
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if _piece_value(mid, coeffs) >= level:
            hi = mid
        else:
            lo = mid
        if hi / lo - 1.0 < 1e-15:
            break
    return hi


def prime_tail_bounds(N, sigma):
    """Certified bracket [lo, hi] for sum_{p > N} p^(-sigma), sigma > 1.

    ``N`` must lie inside the sieve range because the exact value pi(N) is used.
    """
    if sigma <= 1.0:
        raise ValueError("prime tail diverges for sigma <= 1")
    N = float(N)
    if N < 2.0:
        lo, hi = prime_tail_bounds(2.0, sigma)
        return lo + 2.0**-sigma, hi + 2.0**-sigma
    piN = prime_pi(N)
    upper = 0.0
    for a, b, coeffs in _UPPER_PIECES:
        a, b = max(a, N), b
        if b > a:
            upper += _piece_integral(coeffs, sigma, a, b) - piN * _power_integral(sigma, a, b)
    lower = 0.0
    for a, b, coeffs in _LOWER_PIECES:
        a = max(a, N)
        if b <= a:
            continue
        c = _crossing(coeffs, piN, a, b)
        if c < b:
            lower += _piece_integral(coeffs, sigma, c, b) - piN * _power_integral(sigma, c, b)
    return max(lower, 0.0), max(upper, lower)


# ---------------------------------------------------------------------------
# Integer arithmetic helpers


def mobius(n):
    """Moebius function of a positive integer."""
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    result = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            result = -result
        d += 1
    return -result if n > 1 else result


def divisors(n):
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n, rng):
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factor_int(n):
    """Prime factorization of a positive integer as a sorted list of (p, e)."""
    n = int(n)
    if n < 1:
        raise ValueError("factor_int needs n >= 1")
    out = {}
    for p in primes_upto(1 << 16).tolist():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    rng = random.Random(n)
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_brent(m, rng)
        stack.extend((d, m // d))
    return sorted(out.items())


def omega_tables(n_max):
    """Arrays (omega, Omega) of prime-divisor counts for 0..n_max (entry 0 unused)."""
    omega = np.zeros(n_max + 1, dtype=np.int8)
    Omega = np.zeros(n_max + 1, dtype=np.int8)
    for p in primes_upto(max(n_max, 2)).tolist():
        if p > n_max:
            break
        omega[p::p] += 1
        pk = p
        while pk <= n_max:
            Omega[pk::pk] += 1
            pk *= p
    return omega, Omega
