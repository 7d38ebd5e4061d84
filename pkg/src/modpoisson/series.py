"""Prime sums with certified tails, local factors and mod-Poisson parameters.

A ``TruncatedSum`` holds an explicit compensated partial sum over the
irreducibles of norm <= ``norm_bound`` plus a certified bracket for the rest:
the true value lies in ``[value, value + tail_bound]``. ``estimate`` is a
sharper point value inside that bracket (analytic tail through prime zeta
values) used where a single number is needed.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .domains import IrreducibleInfo, get_domain
from .errors import DivergenceError, DomainError, InvalidArgument, ResourceError, UnsupportedStatistic

STATISTICS = ("omega", "Omega")


@dataclass(frozen=True)
class LocalFactor:
    p: object
    s: float
    A_p: float
    alpha_p: float


@dataclass(frozen=True)
class TruncatedSum:
    value: float
    tail_bound: float
    l: int  # number of irreducibles summed explicitly
    n: object  # the power, or a tag such as "geometric" for sums over all powers
    s: float
    norm_bound: float
    estimate: float

    @property
    def upper(self):
        return self.value + self.tail_bound

    def contains(self, x, rel_slack=0.0):
        pad = rel_slack * abs(x)
        return self.value - pad <= x <= self.upper + pad


@dataclass(frozen=True)
class ModPoissonParams:
    statistic: str
    s: float
    t_s: TruncatedSum
    strip: tuple  # open interval (lo, hi) of admissible real tilts h


def check_statistic(domain, statistic):
    if statistic not in STATISTICS:
        raise InvalidArgument(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    if statistic == "Omega":
        d = get_domain(domain)
        if not d.completely_multiplicative or not d.d_inf > 1.0:
            raise UnsupportedStatistic(f"Omega needs a completely multiplicative domain; {d.id} is not")
    return statistic


@lru_cache(maxsize=64)
def classes(domain, bound):
    """(norms, counts) of irreducible classes with norm <= bound (cached)."""
    norms, counts = get_domain(domain).norm_classes(bound)
    norms.setflags(write=False)
    counts.setflags(write=False)
    return norms, counts


@lru_cache(maxsize=256)
def class_alphas(domain, s, bound):
    a = get_domain(domain).alpha(classes(domain, bound)[0], s)
    a.setflags(write=False)
    return a


def _dot(counts, values):
    return math.fsum(counts * values)


def _norm_of(p):
    return p.norm if isinstance(p, IrreducibleInfo) else p


def local_factor(domain, p, alpha, s):
    """A_{p^alpha}(s) = sum_{m >= alpha} a(p^m) / b(p^m)^s.

    ``p`` is an IrreducibleInfo or the norm b(p) (the prime itself for the
    rational-prime domains)."""
    if alpha < 1:
        raise InvalidArgument("alpha must be a positive integer")
    return float(get_domain(domain).local_factor(_norm_of(p), alpha, s))


def alpha_p(domain, p, s):
    """alpha_p(s) = A_p(s) / (1 + A_p(s)) = P(p | X_s)."""
    return float(get_domain(domain).alpha(_norm_of(p), s))


def local_factor_record(domain, p, s):
    A = local_factor(domain, p, 1, s)
    return LocalFactor(p, s, A, alpha_p(domain, p, s))


def _default_bound(domain):
    return get_domain(domain).direct_bound


def power_sum(domain, n, s, bound=None):
    """P_n(s) = sum_p alpha_p(s)^n with explicit terms up to ``bound``."""
    d = get_domain(domain)
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if s < d.kappa or (n == 1 and s <= d.kappa):
        raise DivergenceError(f"P_{n}(s) needs s > kappa (n = 1) or s >= kappa (n >= 2); got s={s}")
    bound = bound or _default_bound(d)
    norms, counts = classes(d.id, bound)
    a = class_alphas(d.id, s, bound)
    partial = _dot(counts, a**n)
    lo, hi, est = d.tail_power_sum(n, s, bound)
    return TruncatedSum(partial + lo, hi - lo, int(counts.sum()), n, s, bound, partial + est)


def _bound_schedule(d):
    if d.id.startswith("poly_fq"):
        return [d.direct_bound]
    out, b = [], 1 << 19
    while b < d.max_bound:
        out.append(b)
        b *= 8
    return out + [d.max_bound]


def prime_power_sum(domain, n, s, rel_tol=1e-10, max_bound=None):
    """P_n(s) with tail_bound <= rel_tol * value, refining the truncation."""
    d = get_domain(domain)
    best = None
    for bound in _bound_schedule(d):
        if max_bound is not None and bound > max_bound:
            break
        best = power_sum(d, n, s, bound)
        if best.tail_bound <= rel_tol * best.value:
            return best
    if best is None:
        best = power_sum(d, n, s, max_bound)
    raise ResourceError(
        f"P_{n}({s}) reached relative tail {best.tail_bound / best.value:.3g} > {rel_tol} at the truncation cap",
        best=best,
    )


def geometric_sum(domain, s, power=1, bound=None):
    """sum_p (alpha/(1-alpha))^power for power 1 or 2.

    power 1 gives sum_{n>=1} P_n(s) (the Omega mean parameter), power 2 gives
    sum_{n>=1} n P_{n+1}(s) (the Omega Berry-Esseen constant)."""
    d = get_domain(domain)
    if power not in (1, 2):
        raise InvalidArgument("power must be 1 or 2")
    if s < d.kappa or (power == 1 and s <= d.kappa):
        raise DivergenceError(f"geometric prime sum diverges at s={s}")
    bound = bound or _default_bound(d)
    norms, counts = classes(d.id, bound)
    a = class_alphas(d.id, s, bound)
    partial = _dot(counts, (a / (1.0 - a)) ** power)
    a_max = float(d.alpha(float(bound), s))  # alpha is decreasing in the norm
    tails = {k: d.tail_power_sum(k, s, bound) for k in (power, power + 1, power + 2)}
    lo = tails[power][0]
    hi = tails[power][1] / (1.0 - a_max) ** power
    if power == 1:
        est = tails[1][2] + tails[2][2] + tails[3][2] / (1.0 - a_max)
    else:
        est = tails[2][2] + 2.0 * tails[3][2] + 3.0 * tails[4][2] / (1.0 - a_max) ** 2
    est = min(max(est, lo), hi)
    tag = "geometric" if power == 1 else "geometric_sq"
    return TruncatedSum(partial + lo, hi - lo, int(counts.sum()), tag, s, bound, partial + est)


def mod_poisson_params(domain, statistic, s, bound=None):
    d = get_domain(domain)
    check_statistic(d, statistic)
    if not s > d.kappa:
        raise DomainError(f"mod-Poisson parameters need s > kappa = {d.kappa}")
    if statistic == "omega":
        t = power_sum(d, 1, s, bound)
        strip = (-math.inf, math.inf)
    else:
        t = geometric_sum(d, s, 1, bound)
        strip = (-math.inf, math.log(d.d_inf))
    return ModPoissonParams(statistic, s, t, strip)


def be_constant(domain, statistic, bound=None):
    """The constant in the Berry-Esseen bound, at s = kappa: P_2(kappa) for
    omega, sum_n n P_{n+1}(kappa) for Omega."""
    d = get_domain(domain)
    check_statistic(d, statistic)
    if statistic == "omega":
        return power_sum(d, 2, d.kappa, bound)
    return geometric_sum(d, d.kappa, 2, bound)


def global_series(domain, s):
    """A(s) = sum_n a(n) / b(n)^s."""
    d = get_domain(domain)
    if not s > d.kappa:
        raise DomainError(f"A(s) diverges for s <= kappa = {d.kappa}")
    return d.global_series(s)


def euler_product_partial(domain, s, bound):
    """prod_{b(p) <= bound} (1 + A_p(s)) = prod (1 - alpha_p)^-1."""
    d = get_domain(domain)
    norms, counts = classes(d.id, bound)
    a = class_alphas(d.id, s, bound)
    return math.exp(-_dot(counts, np.log1p(-a)))


def euler_product_gap_bound(domain, s, bound):
    """Bound on ln A(s) - ln(partial product): sum_{b(p) > bound} -ln(1 - alpha)."""
    d = get_domain(domain)
    a_max = float(d.alpha(float(bound), s))
    return d.tail_power_sum(1, s, bound)[1] / (1.0 - a_max)


def mertens_ratio(domain, s):
    """P(s) / ln A(s)."""
    d = get_domain(domain)
    log_a = math.log(global_series(d, s))
    if not log_a > 0:
        raise DomainError(f"ln A(s) = {log_a} is not positive")
    return power_sum(d, 1, s).estimate / log_a


def norm_at_index(domain, l):
    """(b(p_l), number of irreducibles with the same norm and index > l)."""
    d = get_domain(domain)
    bound = 64
    while True:
        norms, counts = d.norm_classes(bound)
        cum = np.cumsum(counts)
        if cum.size and cum[-1] >= l:
            j = int(np.searchsorted(cum, l))
            return float(norms[j]), int(cum[j] - l)
        if bound >= d.max_bound:
            raise ResourceError(f"index {l} beyond the enumeration cap")
        bound = min(bound * 16, d.max_bound)


def a4_constant(domain, n, l, s):
    """C(n, l) such that sum_{i > l} alpha_{p_i}(s)^n <= C(n, l) / b(p_l)^(n(s - kappa + 1)).

    Returns (C, certified tail upper bound)."""
    d = get_domain(domain)
    b_l, same = norm_at_index(d, l)
    a_l = float(d.alpha(b_l, s))
    tail = same * a_l**n + d.tail_power_sum(n, s, b_l)[1]
    return tail * b_l ** (n * (s - d.kappa + 1.0)), tail


def a5_partial_sums(domain, bounds, s=None, h=1e-5):
    """Partial sums of A_p'(s) A_p(s) over b(p) <= B for each B in ``bounds``,
    with A_p' from a central difference."""
    d = get_domain(domain)
    s = d.kappa if s is None else s
    out = []
    for bound in bounds:
        norms, counts = classes(d.id, bound)
        A = d.local_factor(norms, 1, s)
        dA = (d.local_factor(norms, 1, s + h) - d.local_factor(norms, 1, s - h)) / (2.0 * h)
        out.append(_dot(counts, dA * A))
    return out
