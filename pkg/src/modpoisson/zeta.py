"""Real-argument zeta-type functions.

Euler-Maclaurin summation for the Riemann and Hurwitz zeta functions, the
Dirichlet beta function, and the prime zeta function through Moebius
inversion of ``ln zeta``.
"""

import math
from functools import lru_cache

from .errors import DomainError
from .primes import mobius, primes_upto

# B_{2k} / (2k)! for k = 1..15
_BERNOULLI_RATIO = tuple(
    b / math.factorial(2 * k)
    for k, b in enumerate(
        (
            1 / 6,
            -1 / 30,
            1 / 42,
            -1 / 30,
            5 / 66,
            -691 / 2730,
            7 / 6,
            -3617 / 510,
            43867 / 798,
            -174611 / 330,
            854513 / 138,
            -236364091 / 2730,
            8553103 / 6,
            -23749461029 / 870,
            8615841276005 / 14322,
        ),
        start=1,
    )
)


def _em_tail(s, x, pole=True):
    """Euler-Maclaurin estimate of sum_{n >= 0} (x + n)^(-s), x large.

    With ``pole=False`` the integral term x^(1-s)/(s-1) is left out.
    """
    lead = x ** (1.0 - s) / (s - 1.0)
    terms = [lead if pole else 0.0, 0.5 * x ** (-s)]
    rising = s  # s (s+1) ... (s + 2k - 2)
    power = x ** (-s - 1.0)
    for k, ratio in enumerate(_BERNOULLI_RATIO, start=1):
        term = ratio * rising * power
        terms.append(term)
        if abs(term) < 1e-18 * lead:
            break
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= x * x
    return math.fsum(terms)


def _direct_terms(s):
    return 12 + int(math.ceil(s))


def hurwitz_zeta(s, a=1.0):
    """Hurwitz zeta sum_{n >= 0} (n + a)^(-s) for real s > 1, a > 0."""
    if s <= 1.0:
        raise DomainError(f"zeta(s, a) needs s > 1, got {s}")
    if a <= 0:
        raise DomainError("zeta(s, a) needs a > 0")
    n = _direct_terms(s)
    head = [(k + a) ** (-s) for k in range(n)]
    return math.fsum(head + [_em_tail(s, n + a)])


def zeta(s):
    """Riemann zeta for real s > 1 (relative error about 1e-15)."""
    return 1.0 + zeta_minus_one(s)


def zeta_minus_one(s):
    """zeta(s) - 1 without cancellation, for real s > 1."""
    if s <= 1.0:
        raise DomainError(f"zeta(s) needs s > 1, got {s}")
    if s > 60.0:
        return math.fsum(k ** (-s) for k in (2, 3, 4, 5, 6, 7))
    n = _direct_terms(s)
    head = [k ** (-s) for k in range(2, n)]
    return math.fsum(head + [_em_tail(s, float(n))])


def ln_zeta(s):
    return math.log1p(zeta_minus_one(s))


def beta_minus_one(s):
    """Dirichlet beta(s) - 1 = -3^-s + 5^-s - ... for real s > 1."""
    if s <= 1.0:
        raise DomainError(f"beta(s) needs s > 1 here, got {s}")
    if s >= 6.0:
        terms = []
        k = 3
        while True:
            t = k ** (-s)
            terms.append(-t if k % 4 == 3 else t)
            if t < 1e-20 * 3.0 ** (-s):
                break
            k += 2
        return math.fsum(terms)
    # 4^-s (zeta(s, 1/4) - zeta(s, 3/4)) with the two pole terms of the
    # Euler-Maclaurin tails subtracted analytically
    n = _direct_terms(s)
    a, b = n + 0.25, n + 0.75
    head = [(k + 0.25) ** (-s) - (k + 0.75) ** (-s) for k in range(n)]
    pole = -(a ** (1.0 - s)) * math.expm1((1.0 - s) * math.log(b / a)) / (s - 1.0)
    rest = _em_tail(s, a, pole=False) - _em_tail(s, b, pole=False)
    return 4.0 ** (-s) * math.fsum(head + [pole, rest]) - 1.0


def dirichlet_beta(s):
    """L(s, chi_4), the Dirichlet L-function of the character mod 4."""
    return 1.0 + beta_minus_one(s)


_DIRECT_SIGMA = 6.0


def _direct_prime_sum(sigma, chi=False):
    # error < sum_{n > 1e5} n^-6 < 2e-26
    primes = primes_upto(10**5).astype(float)
    if chi:
        odd = primes[1:]
        signs = 1.0 - 2.0 * ((odd % 4) == 3)
        return math.fsum(signs * odd ** (-sigma))
    return math.fsum(primes ** (-sigma))


@lru_cache(maxsize=4096)
def prime_zeta(sigma):
    """Prime zeta P(sigma) = sum_p p^-sigma for real sigma > 1."""
    if sigma <= 1.0:
        raise DomainError(f"prime zeta diverges at sigma = {sigma}")
    if sigma >= _DIRECT_SIGMA:
        return _direct_prime_sum(sigma)
    terms = []
    k = 1
    while True:
        mu = mobius(k)
        if mu:
            terms.append(mu * ln_zeta(k * sigma) / k)
        if 2.0 ** (-k * sigma) < 1e-19:
            break
        k += 1
    return math.fsum(terms)


@lru_cache(maxsize=4096)
def chi4_prime_sum(sigma):
    """sum_p chi_4(p) p^-sigma for real sigma > 1.

    From ln L(s, chi) = sum_m (1/m) sum_p chi(p)^m p^(-ms), separating odd m
    (character chi) from even m (principal character) gives a recursion in
    sigma that terminates once the arguments are large.
    """
    if sigma <= 1.0:
        raise DomainError(f"sum diverges at sigma = {sigma}")
    if sigma >= _DIRECT_SIGMA:
        return _direct_prime_sum(sigma, chi=True)
    terms = [math.log1p(beta_minus_one(sigma))]
    m = 2
    while 3.0 ** (-m * sigma) > 1e-19:
        if m % 2 == 0:
            terms.append(-(prime_zeta(m * sigma) - 2.0 ** (-m * sigma)) / m)
        else:
            terms.append(-chi4_prime_sum(m * sigma) / m)
        m += 1
    return math.fsum(terms)
