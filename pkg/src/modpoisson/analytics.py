"""Mod-Poisson analytics: rate function, residue functions psi for omega and
Omega, and the large-deviation, moderate-deviation and Berry-Esseen
predictions built from them.

Residues are computed as an explicit sum over irreducibles of norm <= B plus a
power-series tail in the prime sums T_n = sum_{b(p) > B} alpha_p^n, whose
brackets give a certified error.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .domains import get_domain
from .errors import InvalidArgument, ResourceError, SingularityError, StripViolation
from .series import be_constant, check_statistic, class_alphas, classes, mod_poisson_params

SINGULAR_TOL = 1e-8
KINDS = ("point", "upper_tail", "lower_tail")


@dataclass(frozen=True)
class ResidueEval:
    statistic: str
    z: complex
    at_s: float
    value: complex
    trunc_error: float


@dataclass(frozen=True)
class DeviationEstimate:
    statistic: str
    kind: str
    s: float
    x: float
    h: float
    t_s: float
    rate: float
    main_term: float
    boundary_factor: float
    residue_correction: float
    estimate: float
    k: int  # lattice threshold the estimate refers to
    x_eff: float  # k / t_s

    @property
    def uncorrected(self):
        """The same estimate with psi(h) replaced by 1."""
        return self.main_term * self.boundary_factor


def legendre_fenchel_poisson(x):
    """F(x) = x ln x - x + 1 for x > 0 and +inf otherwise."""
    if not x > 0:
        return math.inf
    return x * math.log(x) - x + 1.0


# ---------------------------------------------------------------------------
# residues


def _fsum_complex(values):
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _omega_summands(a, w):
    """ln(1 + a w) - a w, with a series for small |a w|."""
    x = a * w
    small = np.abs(x) < 1e-3
    series = x * x * (-0.5 + x * (1.0 / 3 + x * (-0.25 + x * (0.2 - x / 6.0))))
    with np.errstate(all="ignore"):
        direct = np.log(1.0 + x) - x
    return np.where(small, series, direct)


def _Omega_summands(a, ez):
    """ln((1 - a)/(1 - a e^z)) - (e^z - 1) a/(1 - a) = sum_{n>=2} a^n ((e^{nz}-1)/n - (e^z-1))."""
    w = ez - 1.0
    small = np.abs(a * ez) < 1e-3
    series = np.zeros(np.broadcast(a, ez).shape, dtype=complex)
    an, ezn = a * a, ez * ez
    for n in range(2, 8):
        series = series + an * ((ezn - 1.0) / n - w)
        an, ezn = an * a, ezn * ez
    # (1 - a e^z)/(1 - a) = 1 - u with u = a w/(1 - a), so psi(0) = 1 exactly
    with np.errstate(all="ignore"):
        u = w * a / (1.0 - a)
        direct = -np.log1p(-u) - u
    return np.where(small, series, direct)


def _escalate(d, bound):
    nxt = bound * 16
    if nxt > d.max_bound:
        return None
    return nxt


def _log_residue_omega(d, w, s, bound):
    """(ln psi_s, error bound on ln psi_s) as a function of w = e^z - 1."""
    while True:
        a = class_alphas(d.id, s, bound)
        a_max = float(d.alpha(float(bound), s))
        if a_max * abs(w) < 0.5:
            break
        bound = _escalate(d, bound)
        if bound is None:
            raise ResourceError(f"|e^z - 1| = {abs(w):.3g} too large for the truncation cap")
    counts = classes(d.id, bound)[1]
    near = np.abs(1.0 + a * w) / (1.0 - a)  # equals |e^z A_p + 1|
    if near.size and near.min() < SINGULAR_TOL:
        raise SingularityError("z lies on the singular set of psi")
    terms = counts * _omega_summands(a, w)
    direct = _fsum_complex(terms)
    lo2, hi2, t2 = d.tail_power_sum(2, s, bound)
    lo3, hi3, t3 = d.tail_power_sum(3, s, bound)
    tail = -w * w / 2.0 * t2 + w**3 / 3.0 * t3
    aw = abs(w)
    remainder = hi2 * aw**4 * a_max**2 / (4.0 * (1.0 - a_max * aw))
    err = aw**2 / 2.0 * (hi2 - lo2) + aw**3 / 3.0 * (hi3 - lo3) + remainder
    err += 4e-16 * float(np.abs(terms).sum())
    return direct + tail, err, bound


def _log_residue_Omega(d, ez, s, bound):
    """(ln psi_s, error bound) as a function of e^z."""
    r = abs(ez)
    while True:
        a = class_alphas(d.id, s, bound)
        a_max = float(d.alpha(float(bound), s))
        if a_max * r < 0.5:
            break
        bound = _escalate(d, bound)
        if bound is None:
            raise ResourceError(f"|e^z| = {r:.3g} too large for the truncation cap")
    counts = classes(d.id, bound)[1]
    terms = counts * _Omega_summands(a, ez)
    direct = _fsum_complex(terms)
    w = ez - 1.0
    tails = {n: d.tail_power_sum(n, s, bound) for n in (2, 3)}
    tail = sum(tails[n][2] * ((ez**n - 1.0) / n - w) for n in (2, 3))
    hi2 = tails[2][1]
    remainder = hi2 * (r**4 * a_max**2 / (4.0 * (1.0 - r * a_max)) + a_max**2 / (1.0 - a_max) * (0.25 + abs(w)))
    err = sum((tails[n][1] - tails[n][0]) * ((r**n + 1.0) / n + abs(w)) for n in (2, 3)) + remainder
    err += 4e-16 * float(np.abs(terms).sum())
    return direct + tail, err, bound


def _finish(statistic, z, s, log_value, err):
    value = cmath.exp(log_value)
    return ResidueEval(statistic, z, s, value, abs(value) * math.expm1(err))


def residue_omega(domain, z, s=None, rel_tol=1e-8, bound=None):
    """psi_s(z) = exp(sum_p [ln(1 + alpha_p(s)(e^z - 1)) - alpha_p(s)(e^z - 1)]).

    ``s`` defaults to kappa (the limiting residue)."""
    d = get_domain(domain)
    s = d.kappa if s is None else s
    if s < d.kappa:
        raise InvalidArgument(f"s must be >= kappa = {d.kappa}")
    z = complex(z)
    w = complex(np.expm1(z)) if z.imag == 0 else cmath.exp(z) - 1.0
    bound = bound or d.direct_bound
    while True:
        log_value, err, bound = _log_residue_omega(d, w, s, bound)
        if err <= rel_tol or _escalate(d, bound) is None:
            break
        bound = _escalate(d, bound)
    out = _finish("omega", z, s, log_value, err)
    if err > rel_tol:
        raise ResourceError(f"residue truncation error {err:.3g} above tolerance", best=out)
    return out


def residue_Omega(domain, z, s=None, rel_tol=1e-8, bound=None):
    """psi_s(z) = exp(sum_{n>=2} P_n(s) [(e^{nz} - 1)/n - (e^z - 1)]) on Re z < ln d."""
    d = get_domain(domain)
    check_statistic(d, "Omega")
    s = d.kappa if s is None else s
    if s < d.kappa:
        raise InvalidArgument(f"s must be >= kappa = {d.kappa}")
    z = complex(z)
    if not z.real < math.log(d.d_inf):
        raise StripViolation(f"Re z = {z.real} outside the strip Re z < ln {d.d_inf}")
    bound = bound or d.direct_bound
    while True:
        log_value, err, bound = _log_residue_Omega(d, cmath.exp(z), s, bound)
        if err <= rel_tol or _escalate(d, bound) is None:
            break
        bound = _escalate(d, bound)
    out = _finish("Omega", z, s, log_value, err)
    if err > rel_tol:
        raise ResourceError(f"residue truncation error {err:.3g} above tolerance", best=out)
    return out


def residue(domain, statistic, z, s=None, rel_tol=1e-8):
    if statistic == "omega":
        return residue_omega(domain, z, s, rel_tol)
    return residue_Omega(domain, z, s, rel_tol)


def psi_at_level(domain, statistic, x, s=None, rel_tol=1e-8):
    """Real psi(ln x) for x >= 0; x = 0 is the limit h -> -inf."""
    d = get_domain(domain)
    s = d.kappa if s is None else s
    if x > 0:
        return residue(d, statistic, math.log(x), s, rel_tol).value.real
    if statistic == "omega":
        log_value, _, _ = _log_residue_omega(d, -1.0 + 0j, s, d.direct_bound)
    else:
        log_value, _, _ = _log_residue_Omega(d, 0j, s, d.direct_bound)
    return math.exp(log_value.real)


# ---------------------------------------------------------------------------
# estimates


def _t_value(d, statistic, s):
    return mod_poisson_params(d, statistic, s).t_s.estimate


def _boundary(kind, x):
    if kind == "point":
        return 1.0
    if kind == "upper_tail":
        return 1.0 / (1.0 - 1.0 / x)
    return 1.0 / -math.expm1(-abs(math.log(x)))


def _check_level(d, statistic, kind, x):
    if kind not in KINDS:
        raise InvalidArgument(f"kind must be one of {KINDS}")
    if kind == "point" and not x > 0:
        raise InvalidArgument("point estimates need x > 0")
    if kind == "upper_tail" and not x > 1:
        raise InvalidArgument("upper_tail estimates need x > 1")
    if kind == "lower_tail" and not 0 < x < 1:
        raise InvalidArgument("lower_tail estimates need 0 < x < 1")
    if statistic == "Omega" and not x < d.d_inf:
        raise StripViolation(f"Omega estimates need x < d = {d.d_inf}")


def lattice_threshold(t, x, kind):
    """Lattice point k for level t x: nearest for points, ceiling for upper
    tails, floor for lower tails (so the event {xi >= k} or {xi <= k} equals
    {xi >= t x} or {xi <= t x})."""
    level = t * x
    if kind == "point":
        return int(math.floor(level + 0.5))
    if kind == "upper_tail":
        return int(math.ceil(level - 1e-12))
    return int(math.floor(level + 1e-12))


def ld_estimate(domain, statistic, s, x, kind, snap=True, rel_tol=1e-8):
    """Large-deviation estimate e^{-t F(x)} / sqrt(2 pi t x) * boundary * psi(ln x).

    With ``snap`` the level is moved to the lattice point k of the event and
    the formula is evaluated at x_eff = k / t_s."""
    d = get_domain(domain)
    check_statistic(d, statistic)
    if not s > d.kappa:
        raise InvalidArgument(f"s must exceed kappa = {d.kappa}")
    _check_level(d, statistic, kind, x)
    t = _t_value(d, statistic, s)
    if snap:
        k = lattice_threshold(t, x, kind)
        x_eff = k / t
        try:
            _check_level(d, statistic, kind, x_eff)
        except InvalidArgument as exc:
            raise InvalidArgument(f"lattice point k={k} leaves the admissible range: {exc}") from exc
    else:
        k, x_eff = None, x
    h = math.log(x_eff)
    rate = legendre_fenchel_poisson(x_eff)
    main = math.exp(-t * rate) / math.sqrt(2.0 * math.pi * t * x_eff)
    boundary = _boundary(kind, x_eff)
    psi = psi_at_level(d, statistic, x_eff, rel_tol=rel_tol)
    return DeviationEstimate(statistic, kind, s, x, h, t, rate, main, boundary, psi, main * boundary * psi, k, x_eff)


def berry_esseen_bound(domain, statistic, s):
    """pi C / sqrt(t_s) with C = P_2(kappa) (omega) or sum_n n P_{n+1}(kappa)
    (Omega); C is taken at the upper end of its certified bracket."""
    d = get_domain(domain)
    check_statistic(d, statistic)
    if not s > d.kappa:
        raise InvalidArgument(f"s must exceed kappa = {d.kappa}")
    const = be_constant(d, statistic).upper
    return math.pi * const / math.sqrt(_t_value(d, statistic, s))


def moderate_estimate(domain, statistic, s, y, kind, threshold=1.0, rel_tol=1e-8):
    """Poisson(t_s) tail at t_s + sqrt(t_s) y, times psi(h) when |y| > threshold.

    The tail is taken at the lattice point k (ceiling for upper, floor for
    lower tails) and h = ln(k / t_s)."""
    d = get_domain(domain)
    check_statistic(d, statistic)
    if not s > d.kappa:
        raise InvalidArgument(f"s must exceed kappa = {d.kappa}")
    if kind not in ("upper_tail", "lower_tail"):
        raise InvalidArgument("kind must be upper_tail or lower_tail")
    t = _t_value(d, statistic, s)
    x = 1.0 + y / math.sqrt(t)
    if kind == "upper_tail" and not x >= 1.0:
        raise InvalidArgument("upper_tail needs y >= 0")
    if kind == "lower_tail" and not 0.0 < x <= 1.0:
        raise InvalidArgument("lower_tail needs -sqrt(t_s) < y <= 0")
    if statistic == "Omega" and not x < d.d_inf:
        raise StripViolation(f"Omega needs x < d = {d.d_inf}")
    k = lattice_threshold(t, x, kind)
    x_eff = k / t
    side = "upper" if kind == "upper_tail" else "lower"
    main = poisson_pmf_tail(t, k, side)
    psi = 1.0
    if abs(y) > threshold:
        if statistic == "Omega" and not x_eff < d.d_inf:
            raise StripViolation(f"lattice point k={k} leaves the strip")
        psi = psi_at_level(d, statistic, x_eff, rel_tol=rel_tol)
    h = math.log(x_eff) if x_eff > 0 else -math.inf
    return DeviationEstimate(statistic, kind, s, x, h, t, legendre_fenchel_poisson(x_eff), main, 1.0, psi, main * psi, k, x_eff)


# ---------------------------------------------------------------------------
# Poisson reference law


def _log_terms(lam, ks):
    return -lam + ks * math.log(lam) - gammaln(ks + 1.0)


def _sum_up(lam, k):
    """sum_{j >= k} pmf(j) for k > lam (terms decrease)."""
    total, start = [], k
    width = int(10 * math.sqrt(lam)) + 64
    while True:
        ks = np.arange(start, start + width, dtype=float)
        vals = np.exp(_log_terms(lam, ks))
        total.append(math.fsum(vals))
        if vals[-1] <= 1e-18 * max(total[0], 1e-300) or vals[-1] == 0.0:
            return math.fsum(total)
        start += width


def _sum_down(lam, k):
    """sum_{j <= k} pmf(j) for k < lam (terms decrease going down)."""
    ks = np.arange(0, k + 1, dtype=float)
    return math.fsum(np.exp(_log_terms(lam, ks)))


def poisson_pmf_tail(lam, k, side):
    """Poisson(lam) mass at k ("pmf"), P(N >= k) ("upper") or P(N <= k) ("lower")."""
    if not lam > 0:
        raise InvalidArgument("lambda must be positive")
    if k < 0 or int(k) != k:
        raise InvalidArgument("k must be a nonnegative integer")
    k = int(k)
    if side == "pmf":
        return math.exp(_log_terms(lam, float(k)))
    if side == "upper":
        if k == 0:
            return 1.0
        if k > lam:
            return min(_sum_up(lam, k), 1.0)
        return max(1.0 - poisson_pmf_tail(lam, k - 1, "lower"), 0.0)
    if side == "lower":
        if k < lam:
            return min(_sum_down(lam, k), 1.0)
        return max(1.0 - _sum_up(lam, k + 1), 0.0)
    raise InvalidArgument("side must be pmf, upper or lower")
