"""Exact-arithmetic tests: continued fractions, bridges, the two-frequency
family, and brute-force divisor verification.  Expected values are either
integer-exact or recomputed by independent in-test oracles."""

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kamlab.arithmetic import (
    BridgeSelection,
    ContinuedFraction,
    FrequencyPair,
    GrowthSpec,
    beta_estimate,
    cf_expand,
    check_rho_diophantine,
    construct_omega_chi,
    frequency_from_record,
    frequency_to_record,
    is_cd_bridge,
    select_cd_bridges,
    torus_norm,
    validate_bridge_selection,
    verify_omega_chi,
    verify_small_divisors,
)
from kamlab.errors import (
    CapExceeded,
    GrowthOverflow,
    PrecisionExhausted,
    TooFewConvergents,
)


def golden_cf(depth=20):
    return ContinuedFraction((1,) * depth)


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

def test_cf_golden_mean_quotients():
    x = (math.sqrt(5) - 1) / 2
    cf = cf_expand(x, depth=6, precision_bits=48)
    assert cf.quotients == (1, 1, 1, 1, 1, 1)
    assert [c[1] for c in cf.convergents] == [1, 1, 2, 3, 5, 8, 13]


def test_cf_rational_terminates():
    cf = cf_expand(Fraction(3, 7), depth=10)
    assert cf.terminated
    assert cf.quotients == (2, 3)
    assert cf.fraction() == Fraction(3, 7)


def test_cf_float_near_rational_exhausts():
    with pytest.raises(PrecisionExhausted):
        cf_expand(0.5, depth=20, precision_bits=60)


def test_cf_e_minus_2():
    with mpmath.workprec(200):
        x = mpmath.e - 2
        cf = cf_expand(x, depth=8, precision_bits=180)
    assert cf.quotients == (1, 2, 1, 1, 4, 1, 1, 6)
    # oracle: exact rational reconstruction approximates e - 2 to 1/q_8^2
    approx = cf.fraction(8)
    with mpmath.workprec(200):
        err = abs((mpmath.e - 2) - mpmath.mpf(approx.numerator) / approx.denominator)
        assert err < mpmath.mpf(1) / cf.q(8) ** 2


def test_cf_depth_budget_validated():
    with pytest.raises(PrecisionExhausted):
        cf_expand(0.3183098861, depth=40, precision_bits=64)


def _centered_residue(a, m):
    r = a % m
    return min(r, m - r)


@pytest.mark.parametrize("quotients", [
    (1,) * 17,
    (1, 2) * 8,
    (2, 1, 1, 2) * 4,
    (1, 1, 1, 1, 5, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1),
])
def test_best_approximation_exact(quotients):
    # with the rational stand-in p_m/q_m, ||q alpha|| = centered(q p_m mod q_m)/q_m,
    # so both classical laws are integer-exact statements
    cf = ContinuedFraction(quotients)
    m = cf.depth
    pm, qm = cf.p(m), cf.q(m)
    for n in range(2, m - 1):
        qn, qn1 = cf.q(n), cf.q(n + 1)
        best = _centered_residue(cf.q(n - 1) * pm, qm)
        for q in range(1, qn):
            assert _centered_residue(q * pm, qm) >= best
        r = _centered_residue(qn * pm, qm)
        assert r * (qn + qn1) >= qm      # lower bound 1/(q_n + q_{n+1})
        assert r * qn1 <= qm             # upper bound 1/q_{n+1}


@given(st.lists(st.integers(1, 9), min_size=3, max_size=10))
@settings(max_examples=60, deadline=None)
def test_cf_recurrence_properties(quots):
    cf = ContinuedFraction(tuple(quots))
    conv = cf.convergents
    for j in range(2, len(conv)):
        p, q = conv[j]
        assert p == quots[j - 1] * conv[j - 1][0] + conv[j - 2][0]
        assert q == quots[j - 1] * conv[j - 1][1] + conv[j - 2][1]
        assert math.gcd(p, q) == 1
        assert q > conv[j - 1][1] or j == 1
    assert conv[0] == (0, 1)


def test_torus_norm():
    assert torus_norm(0.75) == pytest.approx(0.25)
    assert torus_norm(3.0) == 0.0
    assert torus_norm(-0.4) == pytest.approx(0.4)
    assert torus_norm(Fraction(7, 3)) == Fraction(1, 3)


@given(st.fractions(min_value=-10, max_value=10))
@settings(max_examples=100, deadline=None)
def test_torus_norm_properties(x):
    v = torus_norm(x)
    assert 0 <= v <= Fraction(1, 2)
    assert torus_norm(-x) == v
    assert torus_norm(x + 3) == v


# ---------------------------------------------------------------------------
# beta and Diophantine checks
# ---------------------------------------------------------------------------

def test_beta_estimate_golden():
    pair = FrequencyPair(golden_cf(40))
    val = beta_estimate(pair, 50)
    # the max is attained at k=1 where ||alpha|| = phi^-2 exactly
    phi = (1 + math.sqrt(5)) / 2
    assert val == pytest.approx(2 * math.log(phi), abs=1e-9)
    # per-convergent terms decrease
    cf = golden_cf(40)
    terms = []
    for n in range(1, 8):
        qn = cf.q(n)
        dist = abs(cf.fraction(40) * qn - round(cf.fraction(40) * qn))
        terms.append(math.log(1 / float(dist)) / qn)
    assert all(terms[i + 1] < terms[i] + 1e-12 for i in range(len(terms) - 1))


def test_beta_estimate_huge_quotient():
    cf = ContinuedFraction((1, 2, 3, 10 ** 6, 1, 1, 1, 1))
    assert cf.q(3) == 10
    pair = FrequencyPair(cf)
    val = beta_estimate(pair, 10)
    assert val >= math.log(10 ** 6) / 11


def test_beta_estimate_monotone_and_small_K():
    cf = ContinuedFraction((1, 2, 3, 10 ** 6, 1, 1, 1, 1))
    pair = FrequencyPair(cf)
    vals = [beta_estimate(pair, K) for K in (1, 3, 10, 20)]
    assert all(vals[i + 1] >= vals[i] for i in range(len(vals) - 1))
    # K=1 sees only the k=1 term
    single = -math.log(float(torus_norm(float(cf.fraction()))))
    assert vals[0] == pytest.approx(single, rel=1e-6)


def _oracle_rho_check(rho, alpha_floats, gamma, tau, K):
    """Independent exhaustive check with mpmath."""
    worst = None
    d = len(alpha_floats)
    rng = range(-K, K + 1)
    import itertools
    for k in itertools.product(rng, repeat=d):
        if sum(abs(x) for x in k) > K:
            continue
        with mpmath.workprec(120):
            v = 2 * mpmath.mpf(rho)
            for ki, ai in zip(k, alpha_floats):
                v += ki * mpmath.mpf(ai)
            dist = float(abs(v - mpmath.nint(v)))
        bound = gamma / (1 + sum(abs(x) for x in k)) ** tau
        ok = dist >= bound
        if worst is None or dist / bound < worst[0]:
            worst = (dist / bound, k, ok)
    return worst


def test_check_rho_diophantine_vs_oracle():
    pair = FrequencyPair(golden_cf(40))
    rep = check_rho_diophantine(0.25, pair, gamma=0.1, tau=2.0, K=100)
    alpha_f = pair.float_vector()
    worst = _oracle_rho_check(0.25, alpha_f, 0.1, 2.0, 100)
    assert rep.passed == worst[2]
    assert tuple(rep.extras["offender"]) == tuple(worst[1])


def test_check_rho_diophantine_resonant():
    pair = FrequencyPair(golden_cf(40))
    alpha = pair.float_vector()[0]
    k0 = 3
    rho = (k0 * alpha / 2) % 1.0
    rep = check_rho_diophantine(rho, pair, gamma=0.01, tau=2.0, K=10)
    assert not rep.passed
    assert abs(rep.extras["offender"][0]) == k0


def test_check_rho_diophantine_K0():
    # K=0 reduces to the k=0 test ||2 rho|| >= gamma; here ||0.6|| = 0.4
    pair = FrequencyPair(golden_cf(30))
    bad = check_rho_diophantine(0.3, pair, gamma=0.5, tau=2.0, K=0)
    assert not bad.passed
    assert bad.extras["value"] == pytest.approx(0.4)
    good = check_rho_diophantine(0.3, pair, gamma=0.3, tau=2.0, K=0)
    assert good.passed


# ---------------------------------------------------------------------------
# bridges
# ---------------------------------------------------------------------------

def test_bridges_fibonacci():
    cf = golden_cf(34)
    sel = select_cd_bridges(cf, 4)
    assert sel.Q[0] == 1
    rows = validate_bridge_selection(cf, sel)
    assert all(r.passed for r in rows)
    # independent re-derivation of the dichotomy from the raw definition
    q = [c[1] for c in cf.convergents]
    A = sel.A_param
    for j in range(len(sel.indices) - 1):
        a, b = sel.indices[j], sel.indices[j + 1]
        jumped = q[a + 1] ** A.denominator >= (q[a] ** A.numerator)
        if not jumped:
            assert is_cd_bridge(q, a, b, A, A, A ** 3)
            if j >= 1:
                assert is_cd_bridge(q, sel.indices[j - 1] + 1, a, A, A, A ** 3)
    # U within the window bound
    u_tilde = 0.0
    for n in range(1, len(q) - 1):
        if q[n] > 1 and q[n + 1] > 2:
            u_tilde = max(u_tilde, math.log(math.log(q[n + 1])) / math.log(q[n]))
    assert sel.U_estimate <= u_tilde + 4 * math.log(4) / math.log(2) + 1e-9


def test_bridges_huge_jump_lands_in_qbar():
    cf = ContinuedFraction((1,) * 10 + (10 ** 9,) + (1, 1, 1, 1))
    sel = select_cd_bridges(cf, 4)
    rows = validate_bridge_selection(cf, sel)
    assert all(r.passed for r in rows)
    big = cf.q(11)
    assert big in sel.Q_bar


def test_bridges_too_few():
    with pytest.raises(TooFewConvergents):
        select_cd_bridges(ContinuedFraction((1, 2)), 4)


@given(st.lists(st.integers(1, 50), min_size=8, max_size=24))
@settings(max_examples=40, deadline=None)
def test_bridges_random_validated(quots):
    cf = ContinuedFraction(tuple(quots))
    try:
        sel = select_cd_bridges(cf, 4)
    except TooFewConvergents:
        return
    rows = validate_bridge_selection(cf, sel)
    assert all(r.passed for r in rows)


# ---------------------------------------------------------------------------
# the explicit two-frequency family
# ---------------------------------------------------------------------------

def test_omega_step1_values():
    om = construct_omega_chi(5, steps=1)
    assert om.quotients_tilde == (2,)
    assert om.quotients_prime == (37,)
    assert om.q_tilde(1) == 2 and om.q_prime(1) == 37
    assert 2 ** 5 < 37 < 4 * 2 ** 5
    assert math.gcd(2, 37) == 1


def test_omega_exact_growth_step2():
    om = construct_omega_chi(5, steps=2, growth=GrowthSpec("exp", None))
    qt2, qp2 = om.q_tilde(2), om.q_prime(2)
    with mpmath.workprec(128):
        e37 = int(mpmath.floor(mpmath.exp(37)))
    assert qt2 > e37
    # independent integer pass over all four properties at step 2
    assert math.gcd(qt2, 37) == 1
    assert qt2 ** 5 < qp2 < 4 * qt2 ** 5
    assert math.gcd(qp2, qt2) == 1
    rows = verify_omega_chi(om)
    assert all(r.passed for r in rows)


def test_omega_exact_growth_overflows_at_step3():
    with pytest.raises(GrowthOverflow) as exc:
        construct_omega_chi(5, steps=3, growth=GrowthSpec("exp", None))
    assert exc.value.feasible_steps == 2


def test_omega_surrogate_five_steps():
    om = construct_omega_chi(5, steps=5, growth=GrowthSpec("poly", 2))
    rows = verify_omega_chi(om)
    assert all(r.passed for r in rows)
    # direct spot re-verification, independent of the module helper
    for n in range(1, 6):
        qt, qp = om.q_tilde(n), om.q_prime(n)
        qp_prev = om.q_prime(n - 1)
        assert qt > qp_prev ** 2 or n == 1
        assert qt ** 5 < qp
        assert qp < 4 * qt ** 5
        assert math.gcd(qt, qp_prev) == 1
        assert math.gcd(qp, qt) == 1


def test_omega_liouville_trend():
    om = construct_omega_chi(5, steps=2, growth=GrowthSpec("exp", None))
    ratio = math.log(math.log(om.q_tilde(2))) / math.log(om.q_tilde(1))
    assert ratio > 5.0


# ---------------------------------------------------------------------------
# small divisors
# ---------------------------------------------------------------------------

def _lattice_oracle(om, n, prec_dps=80):
    """Independent mpmath enumeration of min ||k at + l ap||."""
    qt_n = om.q_tilde(n)
    with mpmath.workprec(512):
        at = mpmath.mpf(om.cf_tilde.fraction().numerator) / om.cf_tilde.fraction().denominator
        ap = mpmath.mpf(om.cf_prime.fraction().numerator) / om.cf_prime.fraction().denominator
        best = None
        for k in range(-(qt_n - 1), qt_n):
            rem = qt_n - 1 - abs(k)
            for l in range(-rem, rem + 1):
                if k == 0 and l == 0:
                    continue
                v = k * at + l * ap
                dist = abs(v - mpmath.nint(v))
                if best is None or dist < best:
                    best = dist
        return float(best)


def test_small_divisors_lattice():
    om = construct_omega_chi(5, steps=3, growth=GrowthSpec("poly", 1))
    assert om.q_tilde(2) == 113
    for n in (1, 2):
        rep = verify_small_divisors(om, n, "lattice")
        assert rep.passed
        assert rep.extras["empirical_min"] >= rep.extras["bound"]
    oracle_min = _lattice_oracle(om, 2)
    rep2 = verify_small_divisors(om, 2, "lattice")
    assert rep2.extras["empirical_min"] == pytest.approx(oracle_min, rel=1e-9)


def test_small_divisors_cap():
    om = construct_omega_chi(5, steps=3, growth=GrowthSpec("poly", 1))
    with pytest.raises(CapExceeded) as exc:
        verify_small_divisors(om, 3, "lattice", cap=5000)
    assert exc.value.largest_feasible == 2


def test_small_divisors_rho_resonant():
    om = construct_omega_chi(5, steps=2, growth=GrowthSpec("poly", 1))
    pair = om.to_frequency_pair()
    a = pair.float_vector()
    rho = ((2 * a[0] + 1 * a[1]) / 2) % 1.0
    rep = verify_small_divisors(om, 1, "rho", rho=rho, gamma=0.1, tau=2.5, cap=60)
    assert not rep.passed
    assert rep.extras["empirical_min"] == 0.0


def test_small_divisors_rho_generic():
    om = construct_omega_chi(5, steps=2, growth=GrowthSpec("poly", 1))
    rep = verify_small_divisors(om, 1, "rho", rho=0.33, gamma=0.1, tau=2.5, cap=60)
    assert rep.passed
    assert rep.extras["empirical_min"] > 0
    assert rep.extras["empirical_constant"] > 0


# ---------------------------------------------------------------------------
# frequency records
# ---------------------------------------------------------------------------

def test_frequency_records_roundtrip():
    om = construct_omega_chi(5, steps=2, growth=GrowthSpec("poly", 2))
    rec = frequency_to_record(om)
    om2 = frequency_from_record(rec)
    assert om2.quotients_tilde == om.quotients_tilde
    assert om2.quotients_prime == om.quotients_prime
    pair = FrequencyPair(golden_cf(10), ("0.414213562373095",), 128)
    rec2 = frequency_to_record(pair)
    pair2 = frequency_from_record(rec2)
    assert pair2.alpha_tilde.quotients == pair.alpha_tilde.quotients
    assert pair2.float_vector() == pytest.approx(pair.float_vector())


def test_rational_independence_assertion():
    pair = FrequencyPair(golden_cf(30), ("0.41421356237309514547462185873883",), 96)
    assert pair.assert_rational_independent(8)
