"""Arithmetic semigroups with a Dirichlet-series weight.

Each domain supplies its irreducibles (grouped into classes of equal norm),
factorization of elements, the weight a(p^m), the local factors A_{p^a}(s),
the divisibility probabilities alpha_p(s), the global series A(s) and a
certified bracket for tails ``sum_{b(p) > B} alpha_p(s)^n``.

Every quantity attached to an irreducible depends on it only through its norm,
so the vectorized methods take arrays of norms.
"""

import csv
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import gaussian, gf
from .errors import DecodeError, DomainError, InvalidArgument, ResourceError
from .primes import SIEVE_CAP, factor_int, prime_pi, prime_tail_bounds, primes_upto
from .zeta import chi4_prime_sum, dirichlet_beta, prime_zeta, zeta, zeta_minus_one


@dataclass(frozen=True)
class SemigroupDescriptor:
    id: str
    kappa: float
    completely_multiplicative: bool
    d_inf: float
    has_closed_form_A: bool


@dataclass(frozen=True)
class IrreducibleInfo:
    """An irreducible element. ``index`` is its position in the enumeration by
    (norm, label); it is None when computing it would need an enumeration far
    beyond the element itself."""

    index: object
    norm: int
    label: object
    domain_id: str

    def weight_at_power(self, m):
        return get_domain(self.domain_id).weight(self.norm, m)


@dataclass(frozen=True)
class FactoredElement:
    factors: tuple  # ((IrreducibleInfo, multiplicity), ...)
    domain: SemigroupDescriptor

    @property
    def omega(self):
        return len(self.factors)

    @property
    def Omega(self):
        return sum(m for _, m in self.factors)

    @property
    def norm(self):
        out = 1
        for p, m in self.factors:
            out *= p.norm**m
        return out


@lru_cache(maxsize=None)
def _prime_power_partial(bound, exponent):
    """sum_{p <= bound} p^-exponent (compensated)."""
    return math.fsum(primes_upto(bound).astype(float) ** (-exponent))


class Domain:
    """Common interface. Subclasses set the class attributes and fill in the
    per-norm formulas."""

    id = "abstract"
    kappa = 1.0
    completely_multiplicative = True
    d_inf = 2.0
    has_closed_form_A = True
    local_abscissa = 0.0  # local factors converge for s above this
    direct_bound = 1 << 20  # default norm bound for explicit prime sums
    max_bound = SIEVE_CAP

    @property
    def descriptor(self):
        return SemigroupDescriptor(self.id, self.kappa, self.completely_multiplicative, self.d_inf, self.has_closed_form_A)

    def __repr__(self):
        return f"<domain {self.id}>"

    def check_local(self, s):
        if not s > self.local_abscissa:
            raise DomainError(f"local factors of {self.id} diverge at s={s}")

    # per-norm formulas -------------------------------------------------
    def weight(self, norm, m):
        return 1.0

    def local_factor(self, norm, a, s):
        """A_{p^a}(s) for an irreducible of the given norm (vectorized in norm)."""
        self.check_local(s)
        x = np.asarray(norm, dtype=float) ** (-s)
        return x**a / (1.0 - x)

    def alpha(self, norms, s):
        self.check_local(s)
        return np.asarray(norms, dtype=float) ** (-s)

    # enumeration ---------------------------------------------------------
    def norm_classes(self, bound):
        """(norms, counts) as float arrays, one entry per distinct norm <= bound."""
        raise NotImplementedError

    def tail_power_sum(self, n, s, bound):
        """(lo, hi, estimate) for sum over irreducibles with norm > bound of alpha^n."""
        raise NotImplementedError

    def global_series(self, s):
        raise NotImplementedError

    def count_irreducibles(self, bound):
        raise NotImplementedError

    def list_irreducibles(self, bound):
        raise NotImplementedError

    def factor(self, element):
        raise NotImplementedError

    def _check_bound(self, bound):
        if not isinstance(bound, (int, np.integer)) and not float(bound).is_integer():
            raise InvalidArgument("norm bound must be an integer")
        bound = int(bound)
        if bound < 2:
            raise InvalidArgument("norm bound must be at least 2")
        return bound


# ---------------------------------------------------------------------------
# Domains whose irreducibles are the rational primes with norm p


class RationalPrimeDomain(Domain):
    """Rational primes. Subclasses give alpha_p(s) together with a bracket
    L p^-sigma <= alpha_p <= U p^-sigma valid for p > N, and an expansion of
    alpha_p in powers p^-(j s - i) used for the analytic tail estimate."""

    shift = 0  # sigma = s - shift

    def norm_classes(self, bound):
        p = primes_upto(bound).astype(float)
        return p, np.ones_like(p)

    def bracket(self, N, s):
        return 1.0, 1.0

    def expansion(self, s, terms):
        """dict {(i, j): c} with alpha = sum c p^-(j s - i); ``terms`` caps j."""
        return {(0, 1): 1.0}

    def count_irreducibles(self, bound):
        return prime_pi(self._check_bound(bound))

    def list_irreducibles(self, bound):
        primes = primes_upto(self._check_bound(bound)).tolist()
        return [IrreducibleInfo(i + 1, p, p, self.id) for i, p in enumerate(primes)]

    def irreducible(self, p):
        p = int(p)
        return IrreducibleInfo(prime_pi(p) if p <= 1 << 24 else None, p, p, self.id)

    def factor(self, element):
        if isinstance(element, bool) or not isinstance(element, (int, np.integer)):
            raise DecodeError(f"expected a natural number, got {element!r}")
        n = int(element)
        if n < 1 or n >= 1 << 64:
            raise DecodeError(f"natural number out of range: {n}")
        return FactoredElement(tuple((self.irreducible(p), e) for p, e in factor_int(n)), self.descriptor)

    def multiply(self, factored):
        out = 1
        for p, m in factored.factors:
            out *= int(p.label) ** m
        return out

    def tail_power_sum(self, n, s, bound):
        sigma = n * (s - self.shift)
        if sigma <= 1.0:
            raise DomainError(f"sum of alpha^{n} diverges at s={s}")
        lo_c, hi_c = self.bracket(bound, s)
        t_lo, t_hi = prime_tail_bounds(bound, sigma)
        lo, hi = lo_c**n * t_lo, hi_c**n * t_hi
        est, err = self._tail_estimate(n, s, bound)
        if err > 0.05 * (hi - lo):
            est = 0.5 * (lo + hi)  # the subtraction below lost the tail
        return lo, hi, min(max(est, lo), hi)

    def _tail_estimate(self, n, s, bound):
        """Analytic tail via prime zeta values minus partial sums; returns
        (estimate, rounding error scale)."""
        lead = n * (s - self.shift)
        cut = lead + 45.0 / math.log(max(bound, 3))
        base = self.expansion(s, int(cut / s) + 2)
        power = {(0, 0): 1.0}
        for _ in range(n):
            nxt = {}
            for (i1, j1), c1 in power.items():
                for (i2, j2), c2 in base.items():
                    key = (i1 + i2, j1 + j2)
                    if key[1] * s - key[0] <= cut:
                        nxt[key] = nxt.get(key, 0.0) + c1 * c2
            power = nxt
        terms, scale = [], 0.0
        for (i, j), c in power.items():
            e = j * s - i
            if c and e > 1.0:
                full = prime_zeta(e)
                terms.append(c * (full - _prime_power_partial(int(bound), e)))
                scale += abs(c) * full
        return math.fsum(terms), 4e-16 * scale

    def _pole_check(self, s):
        if not s > self.kappa:
            raise DomainError(f"A(s) of {self.id} diverges at s={s} <= kappa={self.kappa}")


class Riemann(RationalPrimeDomain):
    id = "riemann"
    d_inf = 2.0

    def global_series(self, s):
        self._pole_check(s)
        return zeta(s)


class DivisorCount(RationalPrimeDomain):
    id = "divisor_count"
    completely_multiplicative = False
    d_inf = 1.0

    def weight(self, norm, m):
        return float(m + 1)

    def local_factor(self, norm, a, s):
        self.check_local(s)
        x = np.asarray(norm, dtype=float) ** (-s)
        return x**a * ((a + 1) / (1.0 - x) + x / (1.0 - x) ** 2)

    def alpha(self, norms, s):
        self.check_local(s)
        x = np.asarray(norms, dtype=float) ** (-s)
        return x * (2.0 - x)

    def bracket(self, N, s):
        return 2.0 - float(N) ** (-s), 2.0

    def expansion(self, s, terms):
        return {(0, 1): 2.0, (0, 2): -1.0}

    def global_series(self, s):
        self._pole_check(s)
        return zeta(s) ** 2


class _TotientLike(RationalPrimeDomain):
    kappa = 2.0
    completely_multiplicative = False
    local_abscissa = 1.0
    shift = 1
    sign = 1  # +1 for the Dedekind psi function, -1 for Euler phi

    def weight(self, norm, m):
        return float(norm) ** m * (1.0 + self.sign / float(norm))

    def local_factor(self, norm, a, s):
        self.check_local(s)
        p = np.asarray(norm, dtype=float)
        return (1.0 + self.sign / p) * p ** (a * (1.0 - s)) / (1.0 - p ** (1.0 - s))

    def alpha(self, norms, s):
        self.check_local(s)
        p = np.asarray(norms, dtype=float)
        # (p +- 1)/(p^s +- 1) written without large intermediate powers
        return p ** (1.0 - s) * (1.0 + self.sign / p) / (1.0 + self.sign * p ** (-s))

    def expansion(self, s, terms):
        out = {}
        for m in range(1, terms + 1):
            c = (-self.sign) ** (m - 1)
            out[(1, m)] = c
            out[(0, m)] = c * self.sign
        return out


class DedekindPsi(_TotientLike):
    id = "dedekind_psi"
    d_inf = 4.0 / 3.0
    sign = 1

    def bracket(self, N, s):
        return 1.0, 1.0 + 1.0 / float(N)

    def global_series(self, s):
        self._pole_check(s)
        return zeta(s) * zeta(s - 1.0) / zeta(2.0 * s)


class EulerPhi(_TotientLike):
    id = "euler_phi"
    d_inf = 4.0
    sign = -1

    def bracket(self, N, s):
        return 1.0 - 1.0 / float(N), 1.0

    def global_series(self, s):
        self._pole_check(s)
        return zeta(s - 1.0) / zeta(s)


# ---------------------------------------------------------------------------
# Monic polynomials over GF(q)


class PolyFq(Domain):
    kappa = 1.0

    def __init__(self, q):
        self.field = gf.field(q)
        self.q = q
        self.id = f"poly_fq({q})"
        self.d_inf = float(q)
        # direct sums run over degrees with q^k <= 2^60
        self.direct_degree = max(1, int(60 // math.log2(q)))
        self.direct_bound = q**self.direct_degree
        self.max_bound = self.direct_bound

    def degree_bound(self, bound):
        k = 0
        while self.q ** (k + 1) <= bound:
            k += 1
        return k

    def norm_classes(self, bound):
        K = self.degree_bound(bound)
        ks = np.arange(1, K + 1)
        norms = np.array([float(self.q**k) for k in ks])
        counts = np.array([float(gf.necklace_count(self.q, int(k))) for k in ks])
        return norms, counts

    def count_irreducibles(self, bound):
        K = self.degree_bound(self._check_bound(bound))
        return sum(gf.necklace_count(self.q, k) for k in range(1, K + 1))

    def list_irreducibles(self, bound):
        bound = self._check_bound(bound)
        if bound > 1 << 22:
            raise ResourceError("brute-force enumeration of irreducibles limited to norm <= 2^22")
        out = []
        for k in range(1, self.degree_bound(bound) + 1):
            for f in gf.irreducibles_of_degree(self.field, k):
                out.append(IrreducibleInfo(len(out) + 1, self.q**k, tuple(f), self.id))
        return out

    def _index(self, f):
        k = len(f) - 1
        if self.q**k > 1 << 12:
            return None
        before = sum(gf.necklace_count(self.q, j) for j in range(1, k))
        rank = _irreducible_rank(self.q, tuple(f))
        return before + rank + 1

    def irreducible(self, f):
        f = tuple(f)
        return IrreducibleInfo(self._index(f), self.q ** (len(f) - 1), f, self.id)

    def factor(self, element):
        f = gf.validate_monic(self.field, element)
        fac = gf.factor_poly(self.field, f)
        return FactoredElement(tuple((self.irreducible(g), e) for g, e in fac), self.descriptor)

    def multiply(self, factored):
        out = [1]
        for p, m in factored.factors:
            for _ in range(m):
                out = gf.pmul(self.field, out, list(p.label))
        return out

    def global_series(self, s):
        if not s > 1.0:
            raise DomainError(f"A(s) of {self.id} diverges at s={s}")
        return 1.0 / -math.expm1((1.0 - s) * math.log(self.q))

    def tail_power_sum(self, n, s, bound):
        """Degrees above K = degree_bound(bound), summed with exact necklace
        counts for the first few hundred degrees and the bracket
        (1 - 2 q^(-k/2))/k <= I(k) q^-k <= 1/k beyond."""
        if not n * s > 1.0:
            raise DomainError(f"sum of alpha^{n} diverges at s={s}")
        q, K = self.q, self.degree_bound(bound)
        logy = (1.0 - n * s) * math.log(q)  # y = q^(1 - n s) < 1
        exact_hi = K + 300
        ks = np.arange(K + 1, exact_hi + 1)
        c = np.array([_necklace_density(q, int(k)) for k in ks])
        yk = np.exp(ks * logy)
        head = math.fsum(c * yk)
        # remaining degrees in vectorized chunks until negligible
        lo_rest, hi_rest = [], []
        start = exact_hi + 1
        chunk = 1 << 16
        while True:
            kk = np.arange(start, start + chunk, dtype=float)
            terms = np.exp(kk * logy) / kk
            hi_rest.append(math.fsum(terms))
            lo_rest.append(math.fsum(terms * (1.0 - 2.0 * np.exp(-0.5 * kk * math.log(q)))))
            start += chunk
            y_last = math.exp(start * logy)
            remainder = y_last / (start * -math.expm1(logy))
            if remainder < 1e-19 * (head + hi_rest[0] + 1e-300) or start > 1 << 26:
                break
        # pad for floating-point rounding of the summands
        lo = (head + math.fsum(lo_rest)) * (1.0 - 1e-14)
        hi = (head + math.fsum(hi_rest) + remainder) * (1.0 + 1e-14)
        return lo, hi, 0.5 * (lo + hi)


def _necklace_density(q, k):
    """I_q(k) q^-k computed in floating point without forming q^k."""
    from .primes import divisors, mobius

    return math.fsum(mobius(d) * math.exp((k // d - k) * math.log(q)) for d in divisors(k)) / k


@lru_cache(maxsize=64)
def _irreducible_encodings(q, k):
    F = gf.field(q)
    return [gf.encode(F, f) for f in gf.irreducibles_of_degree(F, k)]


def _irreducible_rank(q, f):
    import bisect

    F = gf.field(q)
    return bisect.bisect_left(_irreducible_encodings(q, len(f) - 1), gf.encode(F, list(f)))


# ---------------------------------------------------------------------------
# Gaussian integers


class GaussianIntegers(Domain):
    id = "gaussian_integers"
    kappa = 1.0
    d_inf = 2.0

    def norm_classes(self, bound):
        p = primes_upto(bound)
        split = p[p % 4 == 1]
        inert = p[p % 4 == 3]
        inert = inert[inert * inert <= bound]
        norms = np.concatenate(([2], split, inert * inert)).astype(float)
        counts = np.concatenate(([1.0], np.full(split.size, 2.0), np.ones(inert.size)))
        order = np.argsort(norms, kind="stable")
        return norms[order], counts[order]

    def count_irreducibles(self, bound):
        bound = self._check_bound(bound)
        p = primes_upto(bound)
        inert = p[p % 4 == 3]
        return int(1 + 2 * np.count_nonzero(p % 4 == 1) + np.count_nonzero(inert * inert <= bound))

    def _labels(self, bound):
        p = primes_upto(bound).tolist()
        labels = [(2, "ramified", 0)]
        for r in p[1:]:
            if r % 4 == 1:
                labels += [(r, "split", 0), (r, "split", 1)]
            elif r * r <= bound:
                labels.append((r, "inert", 0))
        labels.sort(key=lambda t: (gaussian.norm_of_label(t), t[0], t[2]))
        return labels

    def list_irreducibles(self, bound):
        labels = self._labels(self._check_bound(bound))
        return [IrreducibleInfo(i + 1, gaussian.norm_of_label(t), t, self.id) for i, t in enumerate(labels)]

    def irreducible(self, label):
        label = gaussian.validate_label(label)
        norm = gaussian.norm_of_label(label)
        index = None
        if norm <= 1 << 24:
            # at most two ideals share a norm (the split pair), ordered by idx
            before = self.count_irreducibles(norm - 1) if norm > 2 else 0
            index = before + label[2] + 1
        return IrreducibleInfo(index, norm, label, self.id)

    def factor(self, element):
        """``element`` is an integer pair (a, b) or a sequence of (label, multiplicity)."""
        if isinstance(element, (tuple, list)) and len(element) == 2 and all(
            isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in element
        ):
            fac = gaussian.factor_gaussian(element)
        else:
            try:
                fac = [(gaussian.validate_label(lab), int(m)) for lab, m in element]
            except (TypeError, ValueError) as exc:
                raise DecodeError(f"bad Gaussian element {element!r}") from exc
            if any(m < 1 for _, m in fac) or len({lab for lab, _ in fac}) != len(fac):
                raise DecodeError("multiplicities must be positive and labels distinct")
            fac.sort(key=lambda t: (gaussian.norm_of_label(t[0]), t[0][0], t[0][2]))
        return FactoredElement(tuple((self.irreducible(lab), m) for lab, m in fac), self.descriptor)

    def multiply(self, factored):
        """A generator of the ideal (defined up to a unit)."""
        z = (1, 0)
        for p, m in factored.factors:
            for _ in range(m):
                z = gaussian.gmul(z, gaussian.generator(p.label))
        return z

    def global_series(self, s):
        if not s > 1.0:
            raise DomainError(f"A(s) of {self.id} diverges at s={s}")
        return zeta(s) * dirichlet_beta(s)

    def tail_power_sum(self, n, s, bound):
        """Split ideals above p = 1 mod 4 contribute 2 p^-sigma and inert ones
        p^-2sigma. The upper bound sums over all rational primes; the lower
        bound is 0."""
        sigma = n * s
        if sigma <= 1.0:
            raise DomainError(f"sum of alpha^{n} diverges at s={s}")
        root = math.isqrt(int(bound))
        hi = 2.0 * prime_tail_bounds(bound, sigma)[1] + prime_tail_bounds(max(root, 1), 2.0 * sigma)[1]
        est = 2.0 * (_class_sum(sigma, 1) - _class_partial(int(bound), sigma, 1))
        est += _class_sum(2.0 * sigma, 3) - _class_partial(root, 2.0 * sigma, 3)
        if 4e-16 * 3.0 * prime_zeta(sigma) > 0.05 * hi:
            est = 0.5 * hi  # the subtraction lost the tail
        return 0.0, hi, min(max(est, 0.0), hi)


def _class_sum(sigma, residue):
    """sum over primes p = residue mod 4 of p^-sigma."""
    odd = prime_zeta(sigma) - 2.0**-sigma
    chi = chi4_prime_sum(sigma)
    return 0.5 * (odd + chi) if residue == 1 else 0.5 * (odd - chi)


@lru_cache(maxsize=None)
def _class_partial(bound, sigma, residue):
    if bound < 3:
        return 0.0
    p = primes_upto(bound)
    p = p[p % 4 == residue].astype(float)
    return math.fsum(p ** (-sigma))


# ---------------------------------------------------------------------------
# Registry and module-level API

_SIMPLE = {"riemann": Riemann, "dedekind_psi": DedekindPsi, "euler_phi": EulerPhi, "divisor_count": DivisorCount, "gaussian_integers": GaussianIntegers}
DOMAIN_IDS = ("riemann", "dedekind_psi", "euler_phi", "divisor_count", "poly_fq(q)", "gaussian_integers")


@lru_cache(maxsize=None)
def _make(name):
    if name in _SIMPLE:
        return _SIMPLE[name]()
    m = re.fullmatch(r"poly_fq[(:]?\s*(\d+)\s*\)?", name)
    if m:
        return PolyFq(int(m.group(1)))
    raise InvalidArgument(f"unknown domain {name!r}; expected one of {DOMAIN_IDS}")


def get_domain(domain):
    """Resolve a domain object from an id string such as "riemann" or "poly_fq(2)"."""
    if isinstance(domain, Domain):
        return domain
    if isinstance(domain, SemigroupDescriptor):
        domain = domain.id
    if not isinstance(domain, str):
        raise InvalidArgument(f"cannot interpret {domain!r} as a domain")
    return _make(domain.strip().lower().replace(" ", ""))


def _norm_of(domain, p):
    if isinstance(p, IrreducibleInfo):
        return p.norm
    return p


def list_irreducibles(domain, norm_bound):
    return get_domain(domain).list_irreducibles(norm_bound)


def count_irreducibles(domain, norm_bound):
    return get_domain(domain).count_irreducibles(norm_bound)


def irreducible_count_by_degree(q, k):
    """Exact number of monic irreducibles of degree k over GF(q)."""
    if len(factor_int(q)) != 1:
        raise InvalidArgument(f"q={q} is not a prime power")
    return gf.necklace_count(q, k)


def factor_element(domain, element):
    return get_domain(domain).factor(element)


def weight(domain, p, m):
    """a(p^m)."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    return get_domain(domain).weight(_norm_of(domain, p), m)


def export_irreducibles_csv(domain, norm_bound, path):
    rows = list_irreducibles(domain, norm_bound)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "norm", "label"])
        for r in rows:
            label = r.label
            if isinstance(label, tuple) and all(isinstance(c, int) for c in label):
                label = " ".join(map(str, label))
            elif isinstance(label, tuple):
                label = ":".join(map(str, label))
            writer.writerow([r.index, r.norm, label])
    return path
