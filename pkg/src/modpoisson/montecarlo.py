"""Sampling X_s from Dirichlet series distributions.

Three samplers:

* ``per_prime_multiplicity``: independent multiplicities for every
  irreducible of norm <= cutoff, P(m >= n) = alpha_p^n. Biased by at most the
  omitted alpha mass (completely multiplicative domains only).
* ``degree_then_uniform``: for F_q[x], the degree is geometric and the
  polynomial is uniform among monics of that degree. Exact.
* ``inverse_cdf``: naturals only; binary search in cumulative weights
  a(n) n^-s over n <= n_max. Biased by the mass beyond n_max.

Randomness comes from Philox4x64-10 keyed by (seed, stream). Samples are cut
into blocks of ``BLOCK`` consecutive indices and block b uses stream b, so a
run is reproducible whatever the number of workers.
"""

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import chi2, norm

from . import gf
from .domains import FactoredElement, PolyFq, RationalPrimeDomain, get_domain
from .errors import InvalidArgument, ResourceError
from .primes import omega_tables, primes_upto
from .series import check_statistic, class_alphas, classes

BLOCK = 1 << 16
METHODS = ("per_prime_multiplicity", "inverse_cdf", "degree_then_uniform")
INVERSE_CDF_MIN_S = {"riemann": 1.3}
POLY_TABLE_ENTRIES = 1 << 17


def stream(seed, stream_id=0):
    """numpy Generator on Philox4x64-10 with key (seed, stream_id)."""
    seed, stream_id = int(seed), int(stream_id)
    if not 0 <= seed < 1 << 64 or not 0 <= stream_id < 1 << 64:
        raise InvalidArgument("seed and stream id must be 64-bit unsigned integers")
    return np.random.Generator(np.random.Philox(key=seed | (stream_id << 64)))


@dataclass(frozen=True)
class SamplerConfig:
    domain: str
    s: float
    method: str
    seed: int = 0
    prime_cutoff: int = None  # per_prime_multiplicity only
    max_entries: int = 1 << 25  # inverse_cdf table size cap (at most 10^8)
    max_bias: float = 1e-3  # inverse_cdf refuses tables leaving more mass than this

    def __post_init__(self):
        d = get_domain(self.domain)
        object.__setattr__(self, "domain", d.id)
        if self.method not in METHODS:
            raise InvalidArgument(f"method must be one of {METHODS}")
        if not self.s > d.kappa:
            raise InvalidArgument(f"s must exceed kappa = {d.kappa}")
        if not 0 <= int(self.seed) < 1 << 64:
            raise InvalidArgument("seed must be a 64-bit unsigned integer")
        if self.method == "degree_then_uniform" and not isinstance(d, PolyFq):
            raise InvalidArgument("degree_then_uniform samples F_q[x] only")
        if self.method == "per_prime_multiplicity":
            if not d.completely_multiplicative:
                raise InvalidArgument(f"per-prime sampling needs a completely multiplicative domain; {d.id} is not")
            if self.prime_cutoff is None or self.prime_cutoff < 2:
                raise InvalidArgument("per-prime sampling needs prime_cutoff >= 2")
        if self.method == "inverse_cdf":
            if not isinstance(d, RationalPrimeDomain):
                raise InvalidArgument("inverse_cdf samples the naturals only")
            if self.s < INVERSE_CDF_MIN_S.get(d.id, -math.inf):
                raise InvalidArgument(f"inverse_cdf refuses s < {INVERSE_CDF_MIN_S[d.id]} for {d.id}")
            if not 2 <= self.max_entries <= 10**8:
                raise InvalidArgument("max_entries must lie in [2, 10^8]")

    @property
    def bias_bound(self):
        """Total-variation distance between the sampled law and the law of X_s."""
        d = get_domain(self.domain)
        if self.method == "degree_then_uniform":
            return 0.0
        if self.method == "per_prime_multiplicity":
            return float(d.tail_power_sum(1, self.s, self.prime_cutoff)[1])
        return _natural_table(d.id, self.s, self.max_entries, self.max_bias)[2]


@dataclass(frozen=True)
class EmpiricalLaw:
    counts: np.ndarray  # counts[k] = number of samples with statistic k
    N: int
    statistic: str
    config: SamplerConfig

    def freq(self, k):
        return float(self.counts[k]) / self.N if 0 <= k < len(self.counts) else 0.0

    def sf(self, k):
        return float(self.counts[max(k, 0) :].sum()) / self.N

    def to_csv(self, path=None):
        header = {
            "seed": int(self.config.seed),
            "method": self.config.method,
            "bias_bound": self.config.bias_bound,
            "domain": self.config.domain,
            "s": self.config.s,
            "statistic": self.statistic,
            "N": self.N,
        }
        buf = io.StringIO()
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        buf.write("k,count\n")
        for k, c in enumerate(self.counts):
            buf.write(f"{k},{int(c)}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


# ---------------------------------------------------------------------------
# per-prime multiplicities


@lru_cache(maxsize=8)
def _irreducible_alphas(domain_id, s, cutoff):
    """alpha for every irreducible of norm <= cutoff, in enumeration order."""
    norms, counts = classes(domain_id, cutoff)
    return np.repeat(class_alphas(domain_id, s, cutoff), counts.astype(np.int64))


@lru_cache(maxsize=4)
def _irreducible_list(domain_id, cutoff):
    return tuple(get_domain(domain_id).list_irreducibles(cutoff))


def _per_prime_hits(a, gen, size):
    """Sparse draw of all multiplicities for ``size`` samples.

    Returns (sample index, irreducible index, multiplicity) for every pair
    with multiplicity >= 1. The number of samples divisible by p is
    Binomial(size, alpha_p) and they form a uniform subset."""
    m = gen.binomial(size, a)
    ones = np.flatnonzero(m == 1)
    many = np.flatnonzero(m > 1)
    samp = [gen.integers(0, size, ones.size)]
    irr = [ones]
    for i in many.tolist():
        samp.append(gen.choice(size, int(m[i]), replace=False))
        irr.append(np.full(int(m[i]), i))
    samp = np.concatenate(samp)
    irr = np.concatenate(irr).astype(np.int64)
    mult = gen.geometric(1.0 - a[irr]) if irr.size else np.zeros(0, dtype=np.int64)
    return samp, irr, mult


def _per_prime_block(config, block, size):
    a = _irreducible_alphas(config.domain, config.s, config.prime_cutoff)
    samp, irr, mult = _per_prime_hits(a, stream(config.seed, block), size)
    omega = np.bincount(samp, minlength=size)
    Omega = np.bincount(samp, weights=mult, minlength=size).astype(np.int64)
    return omega, Omega


def divisibility_indicators(config, N, which):
    """Boolean matrix (N, len(which)) of I{p_i | X} for irreducible indices
    ``which`` (0-based, enumeration order), per-prime sampler only."""
    if config.method != "per_prime_multiplicity":
        raise InvalidArgument("indicators need the per-prime sampler")
    a = _irreducible_alphas(config.domain, config.s, config.prime_cutoff)
    out = np.zeros((N, len(which)), dtype=bool)
    for b, lo in enumerate(range(0, N, BLOCK)):
        size = min(BLOCK, N - lo)
        samp, irr, _ = _per_prime_hits(a, stream(config.seed, b), size)
        for j, i in enumerate(which):
            out[lo + samp[irr == i], j] = True
    return out


# ---------------------------------------------------------------------------
# inverse CDF over the naturals


def _weights_table(d, n_max):
    """a(n) for n = 0..n_max (entry 0 unused) by sieving prime powers."""
    w = np.ones(n_max + 1)
    if d.id == "riemann":
        return w
    for p in primes_upto(n_max).tolist():
        pk, m, prev = p, 1, 1.0
        while pk <= n_max:
            cur = d.weight(p, m)
            w[pk::pk] *= cur / prev
            prev, pk, m = cur, pk * p, m + 1
    return w


@lru_cache(maxsize=4)
def _natural_table(domain_id, s, max_entries, max_bias, target=1e-7):
    """(cumulative weights, n_max, residual mass) with the smallest power-of-two
    table whose residual mass is below ``target``, up to ``max_entries``."""
    d = get_domain(domain_id)
    total = d.global_series(s)
    n_max = 1 << 12
    while True:
        n_max = min(n_max, max_entries)
        w = _weights_table(d, n_max)[1:] * np.arange(1, n_max + 1, dtype=float) ** (-s)
        tail = max(0.0, 1.0 - math.fsum(w) / total)
        if tail <= target or n_max >= max_entries:
            break
        n_max *= 4
    if tail > max_bias:
        raise ResourceError(f"inverse-CDF table of {n_max} entries leaves mass {tail:.3g} > {max_bias}")
    cum = np.cumsum(w)
    cum.setflags(write=False)
    return cum, n_max, tail


@lru_cache(maxsize=2)
def _natural_omega_tables(n_max):
    return omega_tables(n_max)


def _inverse_cdf_draw(config, gen, size):
    cum, n_max, _ = _natural_table(config.domain, config.s, config.max_entries, config.max_bias)
    u = gen.random(size) * cum[-1]
    return np.minimum(np.searchsorted(cum, u, side="right"), n_max - 1) + 1


def _inverse_cdf_block(config, block, size):
    n = _inverse_cdf_draw(config, stream(config.seed, block), size)
    _, n_max, _ = _natural_table(config.domain, config.s, config.max_entries, config.max_bias)
    om, Om = _natural_omega_tables(n_max)
    return om[n].astype(np.int64), Om[n].astype(np.int64)


# ---------------------------------------------------------------------------
# F_q[x]: degree then uniform


def _degree_draw(q, s, gen, size):
    """deg = k with probability (1 - q^{1-s}) q^{k(1-s)}."""
    return gen.geometric(-math.expm1((1.0 - s) * math.log(q)), size) - 1


def _poly_draw(q, s, gen, size):
    """Integer encodings q^deg + (uniform lower coefficients) of monic polynomials."""
    deg = _degree_draw(q, s, gen, size)
    small_top = int(math.floor(62 / math.log2(q)))
    small = deg <= small_top
    lower = np.zeros(size, dtype=np.int64)
    lower[small] = gen.integers(0, q ** deg[small].astype(np.int64))
    codes = (q ** np.minimum(deg, small_top).astype(np.int64) + lower).tolist()
    for i in np.flatnonzero(~small).tolist():
        k = int(deg[i])
        codes[i] = q**k + _big_uniform(gen, q**k)
    return deg, codes


def _big_uniform(gen, n):
    bits = n.bit_length()
    while True:
        words = gen.integers(0, 1 << 62, (bits + 61) // 62).tolist()
        v = 0
        for w in words:
            v = (v << 62) | w
        v &= (1 << bits) - 1
        if v < n:
            return v


def _digits(codes, q, width):
    out = np.zeros((codes.size, width), dtype=np.int64)
    c = codes.copy()
    for i in range(width):
        out[:, i] = c % q
        c //= q
    return out


@lru_cache(maxsize=8)
def _poly_tables(q):
    """(D, omega, Omega) indexed by encoding for all monic polynomials of
    degree <= D, where 2 q^D <= POLY_TABLE_ENTRIES.

    Smallest-irreducible-factor sieve: irreducibles are taken in (degree,
    encoding) order and each marks its multiples g h of degree <= D. A monic
    of degree j still unmarked when degree j is reached is irreducible."""
    F = gf.field(q)
    add = np.array(F.add, dtype=np.int64)
    mul = np.array(F.mul, dtype=np.int64)
    D = 0
    while 2 * q ** (D + 1) <= POLY_TABLE_ENTRIES:
        D += 1
    size = 2 * q**D
    spf = np.full(size, -1, dtype=np.int64)
    quot = np.zeros(size, dtype=np.int64)
    powers = q ** np.arange(D + 1, dtype=np.int64)
    # every monic h of degree <= D - 1 with its coefficient rows
    h_codes = np.concatenate([q**m + np.arange(q**m, dtype=np.int64) for m in range(D)])
    h_deg = np.concatenate([np.full(q**m, m) for m in range(D)])
    h_dig = _digits(h_codes, q, D + 1)
    for j in range(1, D + 1):
        level = q**j + np.arange(q**j, dtype=np.int64)
        for g in level[spf[level] < 0].tolist():
            spf[g] = g
            quot[g] = 1
            g_dig = gf.decode(F, g)
            keep = h_deg <= D - j
            H = h_dig[keep]
            prod = np.zeros_like(H)
            for i, gi in enumerate(g_dig):
                if gi:
                    shifted = np.zeros_like(H)
                    shifted[:, i:] = mul[gi][H[:, : D + 1 - i]]
                    prod = add[prod, shifted]
            codes = prod @ powers
            fresh = spf[codes] < 0
            spf[codes[fresh]] = g
            quot[codes[fresh]] = h_codes[keep][fresh]
    om = np.zeros(size, dtype=np.int8)
    Om = np.zeros(size, dtype=np.int8)
    for k in range(1, D + 1):
        level = q**k + np.arange(q**k, dtype=np.int64)
        qt = quot[level]
        Om[level] = Om[qt] + 1
        om[level] = om[qt] + (spf[qt] != spf[level])
    return D, om, Om


@lru_cache(maxsize=1 << 14)
def _poly_counts(q, code):
    F = gf.field(q)
    fac = gf.factor_poly(F, gf.decode(F, code))
    return len(fac), sum(e for _, e in fac)


def _poly_block(config, block, size):
    d = get_domain(config.domain)
    q = d.q
    D, om, Om = _poly_tables(q)
    deg, codes = _poly_draw(q, config.s, stream(config.seed, block), size)
    omega = np.empty(size, dtype=np.int64)
    Omega = np.empty(size, dtype=np.int64)
    small = deg <= D
    idx = np.array([c if k <= D else 0 for c, k in zip(codes, deg.tolist())], dtype=np.int64)
    omega[small], Omega[small] = om[idx[small]], Om[idx[small]]
    for i in np.flatnonzero(~small).tolist():
        omega[i], Omega[i] = _poly_counts(q, codes[i])
    return omega, Omega


def sample_codes(config, N):
    """Encodings of N sampled monic polynomials (degree_then_uniform only)."""
    if config.method != "degree_then_uniform":
        raise InvalidArgument("polynomial encodings come from degree_then_uniform only")
    q = get_domain(config.domain).q
    out = []
    for b, lo in enumerate(range(0, N, BLOCK)):
        out.extend(_poly_draw(q, config.s, stream(config.seed, b), min(BLOCK, N - lo))[1])
    return out


# ---------------------------------------------------------------------------
# public API


def sample_element(config, rng_stream):
    """One draw of X_s as a FactoredElement."""
    d = get_domain(config.domain)
    if config.method == "per_prime_multiplicity":
        a = _irreducible_alphas(d.id, config.s, config.prime_cutoff)
        hit = np.flatnonzero(rng_stream.random(a.size) < a)
        mult = rng_stream.geometric(1.0 - a[hit]) if hit.size else []
        irr = _irreducible_list(d.id, config.prime_cutoff)
        return FactoredElement(tuple((irr[i], int(m)) for i, m in zip(hit.tolist(), mult)), d.descriptor)
    if config.method == "inverse_cdf":
        return d.factor(int(_inverse_cdf_draw(config, rng_stream, 1)[0]))
    _, codes = _poly_draw(d.q, config.s, rng_stream, 1)
    return d.factor(gf.decode(d.field, codes[0]))


_BLOCK_FUNCS = {
    "per_prime_multiplicity": _per_prime_block,
    "inverse_cdf": _inverse_cdf_block,
    "degree_then_uniform": _poly_block,
}


def sample_statistics(config, block, size):
    """(omega, Omega) arrays for the samples of one block."""
    return _BLOCK_FUNCS[config.method](config, block, size)


def _block_counts(args):
    config, statistic, block, size = args
    omega, Omega = sample_statistics(config, block, size)
    return np.bincount(omega if statistic == "omega" else Omega)


def empirical_law(config, statistic, N, workers=1):
    """Counts of omega or Omega over N samples; identical for any ``workers``."""
    d = get_domain(config.domain)
    check_statistic(d, statistic)
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    jobs = [(config, statistic, b, min(BLOCK, N - lo)) for b, lo in enumerate(range(0, N, BLOCK))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_counts, jobs))
    else:
        parts = [_block_counts(j) for j in jobs]
    counts = np.zeros(max(len(p) for p in parts), dtype=np.int64)
    for p in parts:
        counts[: len(p)] += p
    return EmpiricalLaw(counts, int(N), statistic, config)


@dataclass(frozen=True)
class Comparison:
    tv_distance: float
    max_abs_gap: float
    z_scores: np.ndarray
    flagged: tuple  # bins where |gap| > 3 sigma + model_error + bias_bound
    model_error: float
    bias_bound: float
    extras: dict = field(default_factory=dict)


def compare_laws(empirical, exact, allow_mismatched_s=False):
    """TV distance and per-bin z-scores between an empirical law and a LatticePmf.

    Bins are k = 0..K of the exact law plus one bin for k > K."""
    if empirical.statistic != exact.statistic:
        raise InvalidArgument("statistics differ")
    dom = exact.truncation_model.get("domain")
    if dom is not None and dom != empirical.config.domain:
        raise InvalidArgument("domains differ")
    if not allow_mismatched_s and not math.isclose(empirical.config.s, exact.s, rel_tol=1e-12):
        raise InvalidArgument(f"s differs: {empirical.config.s} vs {exact.s}")
    K = exact.k_max
    p = np.append(np.asarray(exact.masses, dtype=float), exact.tail_mass)
    c = np.zeros(K + 2)
    n_bins = min(len(empirical.counts), K + 1)
    c[:n_bins] = empirical.counts[:n_bins]
    c[K + 1] = empirical.counts[K + 1 :].sum()
    f = c / empirical.N
    gap = f - p
    sigma = np.sqrt(np.maximum(p * (1.0 - p), 1e-300) / empirical.N)
    z = gap / sigma
    bias = empirical.config.bias_bound
    margin = 3.0 * sigma + exact.model_error + bias
    flagged = tuple(int(k) for k in np.flatnonzero(np.abs(gap) > margin))
    tv = 0.5 * math.fsum(np.abs(gap))
    return Comparison(tv, float(np.abs(gap).max()), z, flagged, exact.model_error, bias)


def multinomial_test(observed, probs):
    """Pearson chi-square p-value of observed counts against probabilities
    (the last category may collect the remainder)."""
    observed = np.asarray(observed, dtype=float)
    probs = np.asarray(probs, dtype=float)
    expected = observed.sum() * probs
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return float(chi2.sf(stat, len(probs) - 1)), stat


def z_interval(count, N, level=0.95):
    """Normal-approximation interval for a binomial frequency."""
    f = count / N
    half = norm.ppf(0.5 + level / 2) * math.sqrt(max(f * (1 - f), 1e-300) / N)
    return f - half, f + half
