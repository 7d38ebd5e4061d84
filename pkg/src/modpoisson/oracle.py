"""Exact laws of omega(X_s) and Omega(X_s) for truncated independent models.

The law of X_s makes the multiplicities of distinct irreducibles independent:
P(p | X_s) = alpha_p(s), and for completely multiplicative domains the
multiplicity is geometric, P(m) = alpha^m (1 - alpha). Irreducibles of norm
<= cutoff are convolved exactly. The rest is either dropped (``tail=None``,
error = omitted alpha mass) or replaced by a Poisson-type law with a
certified total-variation error (``tail="poisson"``).

Two independent evaluations are offered: a product-tree convolution of
truncated pmfs and the lattice Fourier inversion of the generating function.
"""

import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom, nbinom, poisson

from .analytics import _Omega_summands, _omega_summands
from .domains import get_domain
from .errors import InvalidArgument, NumericError
from .series import check_statistic, class_alphas, classes

FLUSH = 1e-300
DROP_TARGET = 1e-22  # per-chunk mass allowed to fall off when capping multiplicities
CHUNK = 1 << 15
TAIL_MODES = (None, "poisson")


@dataclass(frozen=True)
class LatticePmf:
    statistic: str
    s: float
    masses: np.ndarray  # P(xi = k) for k = 0..K
    truncation_model: dict = field(default_factory=dict)
    model_error: float = 0.0  # TV bound between this model and the true law
    tail_mass: float = 0.0  # model mass above K (plus flushed/dropped mass)
    support_offset: int = 0

    @property
    def k_max(self):
        return len(self.masses) - 1

    def pmf(self, k):
        return float(self.masses[k]) if 0 <= k <= self.k_max else 0.0

    def cdf(self, k):
        """P(xi <= k)."""
        if k < 0:
            return 0.0
        return math.fsum(self.masses[: min(k, self.k_max) + 1])

    def sf(self, k):
        """P(xi >= k) for k <= K + 1."""
        if k <= 0:
            return 1.0
        if k > self.k_max + 1:
            raise InvalidArgument(f"P(xi >= {k}) is beyond the computed range K={self.k_max}")
        return math.fsum(self.masses[k:]) + self.tail_mass

    def mean(self):
        return math.fsum(np.arange(self.k_max + 1) * self.masses)

    def var(self):
        ks = np.arange(self.k_max + 1)
        m = self.mean()
        return math.fsum((ks - m) ** 2 * self.masses)

    def header(self):
        return {
            "statistic": self.statistic,
            "s": self.s,
            "support_offset": self.support_offset,
            "truncation_model": self.truncation_model,
            "model_error": self.model_error,
            "tail_mass": self.tail_mass,
        }

    def to_csv(self, path=None):
        """CSV (k, mass) preceded by a '#'-prefixed JSON header line."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        buf.write("k,mass\n")
        for k, m in enumerate(self.masses):
            buf.write(f"{k},{float(m):.17g}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


# ---------------------------------------------------------------------------
# truncated polynomial arithmetic (nonnegative coefficients, so no cancellation)


def _pair_products(A, B, K):
    """Row-wise products of truncated polynomials, keeping degrees <= K."""
    C = np.zeros_like(A)
    nz = np.flatnonzero(A.any(axis=0))
    top = nz[-1] if nz.size else 0
    for j in range(top + 1):
        C[:, j:] += A[:, j : j + 1] * B[:, : K + 1 - j]
    return C


def _tree_product(P, K):
    while P.shape[0] > 1:
        if P.shape[0] % 2:
            one = np.zeros((1, K + 1))
            one[0, 0] = 1.0
            P = np.vstack([P, one])
        P = _pair_products(P[0::2], P[1::2], K)
    return P[0]


def _mul(a, b, K):
    return _pair_products(a[None, :], b[None, :], K)[0]


def _poly_pow(row, c, K):
    out = np.zeros(K + 1)
    out[0] = 1.0
    base = row
    while c:
        if c & 1:
            out = _mul(out, base, K)
        c >>= 1
        if c:
            base = _mul(base, base, K)
    return out


def _class_rows(statistic, a, counts, K, mult_cap):
    """Per-class pmf rows of width K + 1 and the mass cut off by an early degree cap.

    Mass above K is not counted as cut off: it is the model's own tail."""
    rows = np.zeros((len(a), K + 1))
    if statistic == "omega":
        deg = int(min(K, counts.max()))
        ks = np.arange(deg + 1)
        rows[:, : deg + 1] = binom.pmf(ks[None, :], counts[:, None], a[:, None])
        return rows, 0.0
    if mult_cap is not None:
        ks = np.arange(K + 1)
        geo = np.where(ks[None, :] <= mult_cap, (1.0 - a[:, None]) * a[:, None] ** ks[None, :], 0.0)
        for i, c in enumerate(counts.astype(np.int64)):
            rows[i] = geo[i] if c == 1 else _poly_pow(geo[i], int(c), K)
        return rows, 0.0
    # smallest degree whose dropped mass sum c alpha^(m+1) / (1 - alpha) is negligible
    m = math.ceil(math.log(DROP_TARGET) / math.log(float(a.max()))) + int(counts.max()) - 1
    deg = int(min(K, max(1, m)))
    ks = np.arange(deg + 1)
    rows[:, : deg + 1] = nbinom.pmf(ks[None, :], counts[:, None], 1.0 - a[:, None])
    dropped = 0.0
    if deg < K:
        dropped = math.fsum(nbinom.cdf(K, counts, 1.0 - a) - nbinom.cdf(deg, counts, 1.0 - a))
    return rows, dropped


def _convolve_model(d, statistic, s, K, cutoff, mult_cap):
    norms, counts = classes(d.id, cutoff)
    a = class_alphas(d.id, s, cutoff)
    acc = np.zeros(K + 1)
    acc[0] = 1.0
    dropped = 0.0
    for lo in range(0, len(a), CHUNK):
        rows, drop = _class_rows(statistic, a[lo : lo + CHUNK], counts[lo : lo + CHUNK], K, mult_cap)
        dropped += drop
        acc = _mul(acc, _tree_product(rows, K), K)
    return acc, dropped, int(counts.sum())


def _tail_law(d, statistic, s, cutoff, K):
    """Law of the contribution of irreducibles above the cutoff and its TV error."""
    t1 = d.tail_power_sum(1, s, cutoff)
    t2 = d.tail_power_sum(2, s, cutoff)
    ks = np.arange(K + 1)
    if statistic == "omega":
        # Le Cam: TV(sum of Bernoullis, Poisson(sum alpha)) <= sum alpha^2
        row = poisson.pmf(ks, t1[2])
        err = t2[1] + (t1[1] - t1[0])
    else:
        # omitted part is exactly sum_n n Poisson(T_n / n); keep jumps 1 and 2
        t3 = d.tail_power_sum(3, s, cutoff)
        a_b = float(d.alpha(float(cutoff), s))
        row = _mul(poisson.pmf(ks, t1[2]), np.where(ks % 2 == 0, poisson.pmf(ks // 2, t2[2] / 2.0), 0.0), K)
        err = t3[1] / (3.0 * (1.0 - a_b)) + (t1[1] - t1[0]) + (t2[1] - t2[0]) / 2.0
    return row, err, (t1[2], t2[2])


def _model_error_omitted(d, s, cutoff):
    return d.tail_power_sum(1, s, cutoff)[1]


def _exact(domain, statistic, s, k_max, prime_cutoff, mult_cap, tail):
    d = get_domain(domain)
    check_statistic(d, statistic)
    if not s > d.kappa:
        raise InvalidArgument(f"s must exceed kappa = {d.kappa}")
    if prime_cutoff < 2:
        raise InvalidArgument("prime_cutoff must be >= 2")
    if tail not in TAIL_MODES:
        raise InvalidArgument(f"tail must be one of {TAIL_MODES}")
    if k_max < 0:
        raise InvalidArgument("k_max must be >= 0")
    if prime_cutoff > d.max_bound:
        raise InvalidArgument(f"prime_cutoff above the enumeration cap {d.max_bound:g}")
    K = int(k_max)
    if statistic == "omega" and tail is None:
        n_irr = int(classes(d.id, prime_cutoff)[1].sum())
        if K > n_irr:
            warnings.warn(f"k_max={K} exceeds the {n_irr} irreducibles of the model; clamped", stacklevel=3)
            K = n_irr
    masses, dropped, n_irr = _convolve_model(d, statistic, s, K, prime_cutoff, mult_cap)
    model = {"domain": d.id, "prime_cutoff": prime_cutoff, "irreducibles": n_irr, "mult_cap": mult_cap, "tail": tail}
    if tail == "poisson":
        row, err, params = _tail_law(d, statistic, s, prime_cutoff, K)
        masses = _mul(masses, row, K)
        model["tail_params"] = list(params)
    else:
        err = _model_error_omitted(d, s, prime_cutoff)
    if statistic == "Omega" and mult_cap is not None:
        a = class_alphas(d.id, s, prime_cutoff)
        counts = classes(d.id, prime_cutoff)[1]
        err += math.fsum(counts * a ** (mult_cap + 1) / (1.0 - a))
    small = masses < FLUSH
    flushed = float(masses[small].sum())
    masses = np.where(small, 0.0, masses)
    err += dropped + flushed
    tail_mass = max(0.0, 1.0 - math.fsum(masses))
    masses.setflags(write=False)
    return LatticePmf(statistic, s, masses, model, err, tail_mass)


def pmf_omega_exact(domain, s, k_max, prime_cutoff, tail=None):
    """Law of omega(X_s) in the model of irreducibles with norm <= prime_cutoff
    (a Poisson-binomial convolution)."""
    return _exact(domain, "omega", s, k_max, prime_cutoff, None, tail)


def pmf_Omega_exact(domain, s, k_max, prime_cutoff, mult_cap=None, tail=None):
    """Law of Omega(X_s): geometric multiplicities, optionally capped at mult_cap."""
    return _exact(domain, "Omega", s, k_max, prime_cutoff, mult_cap, tail)


def pmf_exact(domain, statistic, s, k_max, prime_cutoff, tail=None):
    if statistic == "omega":
        return pmf_omega_exact(domain, s, k_max, prime_cutoff, tail)
    return pmf_Omega_exact(domain, s, k_max, prime_cutoff, tail=tail)


# ---------------------------------------------------------------------------
# lattice Fourier inversion


def log_mgf(domain, statistic, s, z, prime_cutoff, tail=None):
    """ln E e^{z xi} for the truncated model, vectorized over an array z."""
    d = get_domain(domain)
    check_statistic(d, statistic)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    ez = np.exp(z)
    w = ez - 1.0
    norms, counts = classes(d.id, prime_cutoff)
    a_all = class_alphas(d.id, s, prime_cutoff)
    out = np.zeros(z.shape, dtype=complex)
    # blocks of classes x nodes kept near 2^20 entries
    step = max(1, (1 << 20) // max(1, z.size))
    for lo in range(0, len(a_all), step):
        a = a_all[lo : lo + step][:, None]
        c = counts[lo : lo + step][:, None]
        if statistic == "omega":
            part = (c * (_omega_summands(a, w[None, :]) + a * w[None, :])).sum(axis=0)
        else:
            part = (c * (_Omega_summands(a, ez[None, :]) + w[None, :] * a / (1.0 - a))).sum(axis=0)
        out += part
    if tail == "poisson":
        t1 = d.tail_power_sum(1, s, prime_cutoff)[2]
        out += t1 * w
        if statistic == "Omega":
            t2 = d.tail_power_sum(2, s, prime_cutoff)[2]
            out += t2 / 2.0 * (ez * ez - 1.0)
    return complex(out[0]) if scalar else out


def _check_tilt(d, statistic, h):
    if statistic == "Omega" and not h < math.log(d.d_inf):
        raise InvalidArgument(f"h = {h} outside the strip h < ln {d.d_inf}")


def _trapezoid(integrand, tol=1e-13, n0=16, n_max=1 << 16):
    """(1/pi) Re int_0^pi f(u) du by the trapezoid rule, doubling the nodes.

    For the periodic integrands used here the rule converges geometrically."""
    n = n0
    f = integrand(np.linspace(0.0, math.pi, n + 1)).real
    ends = 0.5 * (f[0] + f[-1])
    interior = [math.fsum(f[1:-1])]
    prev = (interior[0] + ends) / n
    while n < n_max:
        n *= 2
        u_new = (np.arange(n // 2) * 2 + 1) * math.pi / n
        interior.append(math.fsum(integrand(u_new).real))
        cur = (math.fsum(interior) + ends) / n
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise NumericError(f"trapezoid rule did not reach {tol:g} with {n_max} nodes", achieved=abs(cur - prev))


def fourier_point(domain, statistic, s, k, h, prime_cutoff, tail=None, tol=1e-13):
    """P(xi = k) = (1/2pi) int e^{-k(h+iu)} phi(h+iu) du over [-pi, pi]."""
    d = get_domain(domain)
    if k < 0:
        raise InvalidArgument("k must be >= 0")
    _check_tilt(d, statistic, h)

    def integrand(u):
        z = h + 1j * u
        return np.exp(log_mgf(d, statistic, s, z, prime_cutoff, tail) - k * z)

    return max(0.0, _trapezoid(integrand, tol))


def fourier_tail(domain, statistic, s, k, h, prime_cutoff, tail=None, tol=1e-13):
    """P(xi >= k) = (1/2pi) int e^{-k(h+iu)} phi(h+iu) / (1 - e^{-(h+iu)}) du, h > 0."""
    d = get_domain(domain)
    if not h > 0:
        raise InvalidArgument("the tail inversion needs h > 0")
    if k < 0:
        raise InvalidArgument("k must be >= 0")
    _check_tilt(d, statistic, h)

    def integrand(u):
        z = h + 1j * u
        return np.exp(log_mgf(d, statistic, s, z, prime_cutoff, tail) - k * z) / (1.0 - np.exp(-z))

    return min(1.0, max(0.0, _trapezoid(integrand, tol)))


# ---------------------------------------------------------------------------


def poisson_tail_gap(pmf, t):
    """max_k |P(xi >= k) - P(N >= k)| for N ~ Poisson(t) over k = 1..K+1.

    The two laws share the lattice and the normalization (xi - t)/sqrt(t), so
    this is the sup of the normalized tail gap."""
    ks = np.arange(1, pmf.k_max + 2)
    ref = poisson.sf(ks - 1, t)
    ours = np.array([pmf.sf(int(k)) for k in ks])
    gaps = np.abs(ours - ref)
    j = int(np.argmax(gaps))
    return float(gaps[j]), int(ks[j])
