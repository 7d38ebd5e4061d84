import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modpoisson import series
from modpoisson.domains import get_domain
from modpoisson.errors import DivergenceError, DomainError, ResourceError, UnsupportedStatistic
from modpoisson.primes import primes_upto

DOMAINS = ["riemann", "dedekind_psi", "euler_phi", "divisor_count", "poly_fq(2)", "poly_fq(3)", "gaussian_integers"]
A0 = ["riemann", "poly_fq(2)", "poly_fq(3)", "gaussian_integers"]

# brute-force prime sums, used as an independent oracle below
PRIMES = primes_upto(10**7).astype(float)


def _brute(f):
    return math.fsum(f(PRIMES))


def test_local_factor_examples():
    assert series.local_factor("riemann", 2, 1, 2.0) == pytest.approx(1 / 3, rel=1e-15)
    assert series.local_factor("dedekind_psi", 2, 1, 2.0) == pytest.approx(1.5, rel=1e-15)
    assert series.local_factor("riemann", 3, 2, 2.0) == pytest.approx(1 / 72, rel=1e-15)
    # divisor count closed form (2 p^s - 1)/(p^s - 1)^2
    assert series.local_factor("divisor_count", 3, 1, 2.0) == pytest.approx(17 / 64, rel=1e-15)


@pytest.mark.parametrize("name", ["riemann", "dedekind_psi", "euler_phi", "divisor_count"])
@pytest.mark.parametrize("p", [2, 3, 7])
@pytest.mark.parametrize("a", [1, 2, 3])
def test_local_factor_vs_direct_sum(name, p, a):
    d = get_domain(name)
    s = d.kappa + 0.7
    direct = math.fsum(d.weight(p, m) / float(p) ** (m * s) for m in range(a, 120))
    assert series.local_factor(name, p, a, s) == pytest.approx(direct, rel=1e-13)


def test_alpha_examples():
    assert series.alpha_p("riemann", 2, 2.0) == pytest.approx(0.25)
    assert series.alpha_p("dedekind_psi", 2, 2.0) == pytest.approx(0.6)
    assert series.alpha_p("divisor_count", 2, 1.0) == pytest.approx(0.75)


@pytest.mark.parametrize("name", ["riemann", "dedekind_psi", "euler_phi", "divisor_count"])
@given(p=st.sampled_from([2, 3, 5, 11, 101]), ds=st.floats(0.05, 3.0))
def test_alpha_is_A_over_one_plus_A(name, p, ds):
    s = get_domain(name).kappa + ds
    A = series.local_factor(name, p, 1, s)
    a = series.alpha_p(name, p, s)
    assert 0 <= a < 1
    assert a == pytest.approx(A / (1 + A), rel=1e-12)


def test_global_series_examples():
    assert series.global_series("poly_fq(2)", 2.0) == pytest.approx(2.0, rel=1e-15)
    assert series.global_series("riemann", 2.0) == pytest.approx(math.pi**2 / 6, rel=1e-14)
    assert series.global_series("divisor_count", 2.0) == pytest.approx((math.pi**2 / 6) ** 2, rel=1e-14)
    assert series.global_series("divisor_count", 2.0) == pytest.approx(2.705808084277845, rel=1e-14)
    with pytest.raises(DomainError):
        series.global_series("riemann", 1.0)


@pytest.mark.parametrize("s", [2.5, 3.0, 4.0])
def test_global_series_vs_mpmath(s):
    z = mpmath.zeta
    assert series.global_series("dedekind_psi", s) == pytest.approx(float(z(s) * z(s - 1) / z(2 * s)), rel=1e-13)
    assert series.global_series("euler_phi", s) == pytest.approx(float(z(s - 1) / z(s)), rel=1e-13)
    beta = mpmath.dirichlet(s, [0, 1, 0, -1])
    assert series.global_series("gaussian_integers", s) == pytest.approx(float(z(s) * beta), rel=1e-13)


def test_prime_power_sum_frozen_values():
    v = series.prime_power_sum("riemann", 2, 1.0, rel_tol=1e-9)
    assert v.contains(0.45224742004106549850, rel_slack=1e-14)
    assert v.tail_bound <= 1e-9 * v.value
    assert series.power_sum("euler_phi", 2, 2.0).estimate == pytest.approx(0.2444773042, rel=1e-9)
    assert series.power_sum("dedekind_psi", 2, 2.0).estimate == pytest.approx(0.6330320101, rel=1e-9)
    assert series.power_sum("divisor_count", 2, 1.0).estimate == pytest.approx(1.1869322630, rel=1e-9)


def test_prime_power_sum_stated_bounds():
    assert series.power_sum("euler_phi", 2, 2.0).upper < 0.55
    assert series.power_sum("dedekind_psi", 2, 2.0).upper < 1.06
    assert series.power_sum("divisor_count", 2, 1.0).upper < 2.2
    assert series.power_sum("riemann", 2, 1.0).upper < math.pi**2 / 6
    assert series.geometric_sum("riemann", 1.0, 2).upper < 1.67


def test_prime_power_sums_vs_brute_force():
    # euler_phi: alpha = 1/(p+1) at s = 2; dedekind: (p+1)/(p^2+1); divisor: (2p-1)/p^2 at s=1
    brute = {
        ("euler_phi", 2.0): _brute(lambda p: (1 / (p + 1)) ** 2),
        ("dedekind_psi", 2.0): _brute(lambda p: ((p + 1) / (p * p + 1)) ** 2),
        ("divisor_count", 1.0): _brute(lambda p: ((2 * p - 1) / (p * p)) ** 2),
    }
    for (name, s), value in brute.items():
        t = series.power_sum(name, 2, s, bound=10**7)
        # the tail beyond 10^7 is positive and below 4/(10^7 ln 10^7)
        slack = 4 / (1e7 * math.log(1e7))
        assert value * (1 - 1e-14) <= t.value <= t.estimate <= t.upper <= value + slack


@pytest.mark.parametrize("name", DOMAINS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_tail_soundness(name, n):
    d = get_domain(name)
    s = d.kappa + 0.3
    if name.startswith("poly"):
        b1, b2 = d.q**5, d.q**10
    else:
        b1, b2 = 1 << 12, 1 << 13
    coarse = series.power_sum(name, n, s, bound=b1)
    fine = series.power_sum(name, n, s, bound=b2)
    assert coarse.value <= fine.value * (1 + 1e-14)
    assert fine.upper <= coarse.upper * (1 + 1e-14)
    assert coarse.contains(fine.estimate, rel_slack=1e-15)


@pytest.mark.parametrize("name", A0)
@pytest.mark.parametrize("n", [2, 3, 5])
def test_completely_multiplicative_power_sums(name, n):
    s = 1.3
    lhs = series.power_sum(name, n, s).estimate
    rhs = series.power_sum(name, 1, n * s).estimate
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_riemann_power_sum_vs_mpmath():
    for s in (1.05, 1.2, 2.0):
        t = series.power_sum("riemann", 1, s)
        ref = float(mpmath.primezeta(s))
        assert t.value <= ref * (1 + 1e-14) <= t.upper * (1 + 2e-14)
        assert t.estimate == pytest.approx(ref, rel=1e-12)


def test_mod_poisson_params():
    om = series.mod_poisson_params("riemann", "omega", 2.0)
    assert om.t_s.estimate == pytest.approx(0.45224742004, rel=1e-10)
    assert om.strip == (-math.inf, math.inf)
    Om = series.mod_poisson_params("riemann", "Omega", 2.0)
    # sum_n P(2n) from mpmath
    ref = float(mpmath.nsum(lambda n: mpmath.primezeta(2 * n), [1, mpmath.inf]))
    assert Om.t_s.estimate == pytest.approx(ref, rel=1e-10)
    assert Om.t_s.estimate == pytest.approx(0.5516932976, rel=1e-9)
    assert Om.strip[1] == pytest.approx(math.log(2))
    with pytest.raises(UnsupportedStatistic):
        series.mod_poisson_params("euler_phi", "Omega", 3.0)
    with pytest.raises(DomainError):
        series.mod_poisson_params("riemann", "omega", 1.0)


def test_poly_t_s_exact_degree_sum():
    # sum_k I_2(k) 4^-k with exact necklace counts
    from fractions import Fraction

    from modpoisson.domains import irreducible_count_by_degree

    exact = sum(Fraction(irreducible_count_by_degree(2, k), 4**k) for k in range(1, 200))
    t = series.mod_poisson_params("poly_fq(2)", "omega", 2.0).t_s
    assert t.estimate == pytest.approx(float(exact), rel=1e-14)
    assert float(exact) == pytest.approx(0.6154716839876926, rel=1e-15)


def test_omega_berry_esseen_constant():
    c = series.be_constant("riemann", "Omega")
    ref = float(mpmath.nsum(lambda n: n * mpmath.primezeta(n + 1), [1, mpmath.inf]))
    assert c.estimate == pytest.approx(ref, rel=1e-9)
    assert c.estimate == pytest.approx(1.3750649948, rel=1e-9)


def test_divergence_errors():
    with pytest.raises(DivergenceError):
        series.power_sum("riemann", 1, 1.0)
    with pytest.raises(DivergenceError):
        series.power_sum("dedekind_psi", 2, 1.9)
    with pytest.raises(DivergenceError):
        series.geometric_sum("riemann", 1.0, 1)


def test_resource_error_carries_best():
    with pytest.raises(ResourceError) as info:
        series.prime_power_sum("riemann", 1, 1.01, rel_tol=1e-15, max_bound=1 << 20)
    assert info.value.best is not None and info.value.best.tail_bound > 0


@pytest.mark.parametrize("name", DOMAINS)
def test_euler_product_identity(name):
    d = get_domain(name)
    s = d.kappa + 0.5
    target = math.log(series.global_series(name, s))
    prev = None
    for bound in (1 << 8, 1 << 12, 1 << 16):
        if name.startswith("poly") and bound > d.direct_bound:
            continue
        gap = target - math.log(series.euler_product_partial(name, s, bound))
        assert -1e-12 <= gap <= series.euler_product_gap_bound(name, s, bound) + 1e-12
        if prev is not None:
            assert gap <= prev + 1e-12
        prev = gap


@pytest.mark.parametrize("name", DOMAINS)
@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("l", [5, 50, 500])
def test_a4_inequality(name, n, l):
    d = get_domain(name)
    s = d.kappa + (0.4 if n == 1 else 0.0)
    C, tail = series.a4_constant(name, n, l, s)
    b_l, same = series.norm_at_index(name, l)
    # direct tail sum over indices > l, brute force to a large bound plus its certified tail
    big = 1 << 22 if not name.startswith("poly") else d.q ** min(30, d.direct_degree)
    norms, counts = series.classes(d.id, big)
    a = np.asarray(d.alpha(norms, s))
    cum = np.cumsum(counts)
    keep = cum > l
    first = np.argmax(keep)
    direct = (cum[first] - l) * a[first] ** n + math.fsum(counts[first + 1 :] * a[first + 1 :] ** n)
    direct += d.tail_power_sum(n, s, big)[0]
    assert direct <= C / b_l ** (n * (s - d.kappa + 1)) * (1 + 1e-12)


@pytest.mark.parametrize("name", ["riemann", "dedekind_psi", "euler_phi", "divisor_count"])
def test_a5_partial_sums_settle(name):
    sums = series.a5_partial_sums(name, [1 << 14, 1 << 17, 1 << 20])
    steps = np.abs(np.diff(sums))
    assert steps[1] < steps[0]
    assert steps[1] < 1e-3 * abs(sums[-1])


def test_mertens_ratio_examples():
    assert 0.5 < series.mertens_ratio("poly_fq(2)", 1.1) < 1.1
    assert 0.5 < series.mertens_ratio("riemann", 1.05) < 1.1
    # P(3)/ln zeta(3) from mpmath
    ref = float(mpmath.primezeta(3) / mpmath.log(mpmath.zeta(3)))
    assert series.mertens_ratio("riemann", 3.0) == pytest.approx(ref, rel=1e-12)
    assert ref == pytest.approx(0.949621, abs=1e-6)
