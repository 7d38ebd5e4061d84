"""Finite fields GF(q) and factorization of polynomials over them.

Field elements are integers 0..q-1. For a prime power q = p^e with e > 1 the
integer sum d_i p^i stands for sum d_i t^i modulo a fixed monic irreducible of
degree e over GF(p), namely the one with the smallest integer encoding (read
with the leading coefficient first this is also the lexicographically smallest).

Polynomials are lists of field elements, lowest degree first, with no trailing
zeros; the zero polynomial is the empty list.
"""

import hashlib
import random
from functools import lru_cache

from .errors import DecodeError, InvalidArgument
from .primes import divisors, factor_int, mobius

FACTOR_SEED = 0x5EED


class FiniteField:
    """Arithmetic tables for GF(q), q <= 256."""

    def __init__(self, q):
        fac = factor_int(q) if q >= 2 else []
        if len(fac) != 1:
            raise InvalidArgument(f"q={q} is not a prime power")
        if q > 256:
            raise InvalidArgument(f"q={q} too large for table arithmetic")
        self.q = q
        self.p, self.e = fac[0]
        p, e = self.p, self.e
        if e == 1:
            self.modulus = None
            self.add = [[(a + b) % p for b in range(q)] for a in range(q)]
            self.mul = [[(a * b) % p for b in range(q)] for a in range(q)]
        else:
            self.modulus = _smallest_irreducible(p, e)
            digits = [_to_digits(a, p, e) for a in range(q)]
            self.add = [
                [_from_digits([(x + y) % p for x, y in zip(digits[a], digits[b])], p) for b in range(q)]
                for a in range(q)
            ]
            self.mul = [
                [_from_digits(_mulmod_prime(digits[a], digits[b], self.modulus, p), p) for b in range(q)]
                for a in range(q)
            ]
        self.neg = [self.add[a].index(0) for a in range(q)]
        self.inv = [0] + [self.mul[a].index(1) for a in range(1, q)]
        # a^(1/p) = a^(q/p) since the Frobenius has order e
        root = []
        for a in range(q):
            r = a
            for _ in range(e - 1):
                r = self.pow(r, p)
            root.append(r)
        self.proot = root

    def pow(self, a, n):
        result = 1
        base = a
        while n:
            if n & 1:
                result = self.mul[result][base]
            base = self.mul[base][base]
            n >>= 1
        return result

    def __repr__(self):
        return f"FiniteField({self.q})"


@lru_cache(maxsize=None)
def field(q):
    return FiniteField(q)


def _to_digits(a, p, e):
    out = []
    for _ in range(e):
        out.append(a % p)
        a //= p
    return out


def _from_digits(d, p):
    v = 0
    for c in reversed(d):
        v = v * p + c
    return v


def _mulmod_prime(a, b, modulus, p):
    """Product of digit vectors modulo a monic polynomial over GF(p)."""
    e = len(modulus) - 1
    prod = [0] * (2 * e - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(len(prod) - 1, e - 1, -1):
        c = prod[k]
        if c:
            for j in range(e + 1):
                prod[k - e + j] = (prod[k - e + j] - c * modulus[j]) % p
    return prod[:e]


def _smallest_irreducible(p, e):
    prime_field = field(p)
    for enc in range(p**e, 2 * p**e):
        f = [int(c) for c in _to_digits(enc, p, e + 1)]
        if is_irreducible(prime_field, f):
            return f
    raise AssertionError("no irreducible found")


# ---------------------------------------------------------------------------
# Polynomial arithmetic


def trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def degree(a):
    return len(a) - 1


def padd(F, a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = F.add[out[i]][c]
    return trim(out)


def psub(F, a, b):
    return padd(F, a, [F.neg[c] for c in b])


def pmul(F, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    add, mul = F.add, F.mul
    for i, x in enumerate(a):
        if x:
            row = mul[x]
            for j, y in enumerate(b):
                if y:
                    out[i + j] = add[out[i + j]][row[y]]
    return trim(out)


def pdivmod(F, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    inv_lead = F.inv[b[-1]]
    quot = [0] * max(len(a) - db, 0)
    add, mul, neg = F.add, F.mul, F.neg
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k]
        if c:
            c = mul[c][inv_lead]
            quot[k - db] = c
            nc = neg[c]
            row = mul[nc]
            for j in range(db + 1):
                if b[j]:
                    a[k - db + j] = add[a[k - db + j]][row[b[j]]]
    return trim(quot), trim(a[:db])


def pmod(F, a, b):
    return pdivmod(F, a, b)[1]


def monic(F, a):
    if not a:
        return []
    inv = F.inv[a[-1]]
    return [F.mul[inv][c] for c in a]


def pgcd(F, a, b):
    a, b = trim(a), trim(b)
    while b:
        a, b = b, pmod(F, a, b)
    return monic(F, a)


def pderiv(F, a):
    out = []
    for i in range(1, len(a)):
        c = 0
        for _ in range(i % F.p):
            c = F.add[c][a[i]]
        out.append(c)
    return trim(out)


def ppowmod(F, a, n, m):
    result = [1]
    base = pmod(F, a, m)
    while n:
        if n & 1:
            result = pmod(F, pmul(F, result, base), m)
        base = pmod(F, pmul(F, base, base), m)
        n >>= 1
    return result


def _pth_root(F, f):
    p = F.p
    return trim([F.proot[f[i]] for i in range(0, len(f), p)])


def encode(F, f):
    """Integer encoding sum c_i q^i; the canonical order of monic polynomials
    of equal degree follows this integer."""
    v = 0
    for c in reversed(f):
        v = v * F.q + c
    return v


def decode(F, value):
    out = []
    while value:
        out.append(value % F.q)
        value //= F.q
    return out


def validate_monic(F, coeffs):
    try:
        f = [int(c) for c in coeffs]
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"bad coefficient sequence {coeffs!r}") from exc
    if any(c < 0 or c >= F.q for c in f):
        raise DecodeError(f"coefficients must lie in 0..{F.q - 1}")
    if not f or f[-1] != 1:
        raise DecodeError("polynomial must be monic with lowest-degree-first coefficients")
    return f


# ---------------------------------------------------------------------------
# Factorization


def squarefree_decomposition(F, f):
    """Return [(g, e)] with f = prod g^e and each g squarefree (f monic)."""
    out = []
    if len(f) <= 1:
        return out
    df = pderiv(F, f)
    if not df:
        return [(g, e * F.p) for g, e in squarefree_decomposition(F, _pth_root(F, f))]
    c = pgcd(F, f, df)
    w = pdivmod(F, f, c)[0]
    i = 1
    while len(w) > 1:
        y = pgcd(F, w, c)
        fac = pdivmod(F, w, y)[0]
        if len(fac) > 1:
            out.append((fac, i))
        w = y
        c = pdivmod(F, c, y)[0]
        i += 1
    if len(c) > 1:
        out.extend((g, e * F.p) for g, e in squarefree_decomposition(F, _pth_root(F, c)))
    return out


def distinct_degree(F, f):
    """Split a squarefree monic f into [(g, d)], g the product of its degree-d factors."""
    out = []
    x = [0, 1]
    h = x
    rest = f
    d = 1
    while degree(rest) >= 2 * d:
        h = ppowmod(F, h, F.q, rest)
        g = pgcd(F, rest, psub(F, h, x))
        if len(g) > 1:
            out.append((g, d))
            rest = pdivmod(F, rest, g)[0]
            h = pmod(F, h, rest)
        d += 1
    if len(rest) > 1:
        out.append((rest, degree(rest)))
    return out


def _trace_poly(F, a, d, f):
    # sum_{j < e*d} a^(2^j) mod f, for q = 2^e
    total = []
    term = pmod(F, a, f)
    for _ in range(F.e * d):
        total = padd(F, total, term)
        term = pmod(F, pmul(F, term, term), f)
    return total


def equal_degree(F, f, d, rng):
    """Cantor-Zassenhaus splitting of a product of distinct degree-d irreducibles."""
    n = degree(f)
    if n == d:
        return [f]
    while True:
        a = trim([rng.randrange(F.q) for _ in range(n)])
        if len(a) <= 1:
            continue
        if F.p == 2:
            b = _trace_poly(F, a, d, f)
        else:
            b = psub(F, ppowmod(F, a, (F.q**d - 1) // 2, f), [1])
        g = pgcd(F, f, b)
        if 0 < degree(g) < n:
            return equal_degree(F, g, d, rng) + equal_degree(F, pdivmod(F, f, g)[0], d, rng)


def _element_rng(F, f, seed):
    digest = hashlib.blake2b(f"{seed}:{F.q}:{tuple(f)}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "little"))


def factor_poly(F, f, seed=None):
    """Factor a monic polynomial; returns [(irreducible, multiplicity)] sorted
    by (degree, encoding). Randomness is derived from (seed, f)."""
    f = trim(f)
    rng = _element_rng(F, f, FACTOR_SEED if seed is None else seed)
    mult = {}
    for g, e in squarefree_decomposition(F, f):
        for h, d in distinct_degree(F, g):
            for irr in equal_degree(F, h, d, rng):
                key = tuple(irr)
                mult[key] = mult.get(key, 0) + e
    return sorted(((list(k), e) for k, e in mult.items()), key=lambda t: (len(t[0]), encode(F, t[0])))


def is_irreducible(F, f):
    """Rabin's irreducibility test for a polynomial of degree >= 1."""
    f = monic(F, trim(f))
    n = degree(f)
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    for r, _ in factor_int(n):
        h = x
        for _ in range(n // r):
            h = ppowmod(F, h, F.q, f)
        if len(pgcd(F, f, psub(F, h, x))) > 1:
            return False
    h = x
    for _ in range(n):
        h = ppowmod(F, h, F.q, f)
    return not psub(F, h, x)


def irreducibles_of_degree(F, k):
    """All monic irreducibles of degree k in increasing encoding order."""
    base = F.q**k
    out = []
    for enc in range(base, 2 * base):
        f = (decode(F, enc - base) + [0] * k)[:k] + [1]
        if is_irreducible(F, f):
            out.append(f)
    return out


def necklace_count(q, k):
    """Number of monic irreducibles of degree k over GF(q) (exact integer)."""
    if k < 1 or q < 2:
        raise InvalidArgument("need q >= 2 and k >= 1")
    total = sum(mobius(d) * q ** (k // d) for d in divisors(k))
    return total // k
