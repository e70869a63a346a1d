"""Exact frequency arithmetic.

Continued fractions over big integers, denominator-bridge subsequence
selection, Liouville-type exponents, the explicit two-frequency family with
coprime partial-quotient surgery, and brute-force small-divisor verification.
Everything here is integer/rational exact unless a value is explicitly
declared with a finite precision budget; results below that budget raise
:class:`~kamlab.errors.PrecisionExhausted` rather than returning noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath

from .errors import (
    CapExceeded,
    HypothesisViolated,
    NoWitness,
    GrowthOverflow,
    PrecisionExhausted,
    TooFewConvergents,
)

__all__ = [
    "ContinuedFraction",
    "FrequencyPair",
    "BridgeSelection",
    "GrowthSpec",
    "OmegaChiFrequency",
    "CheckRow",
    "VerificationReport",
    "cf_expand",
    "torus_norm",
    "beta_estimate",
    "select_cd_bridges",
    "validate_bridge_selection",
    "construct_omega_chi",
    "verify_omega_chi",
    "check_rho_diophantine",
    "verify_small_divisors",
    "frequency_to_record",
    "frequency_from_record",
]


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients a_1, a_2, ... (a_0 separate) with cached convergents.

    Convergents follow p_0=0, p_1=1, q_0=1, q_1=a_1 and
    p_j = a_j p_{j-1} + p_{j-2}, q_j = a_j q_{j-1} + q_{j-2}; they approximate
    the fractional part, so the value at depth n is a_0 + p_n/q_n.
    ``terminated`` flags an exactly rational input with finite expansion.
    """

    quotients: tuple
    a0: int = 0
    terminated: bool = False

    def __post_init__(self):
        for a in self.quotients:
            if a < 1:
                raise ValueError("partial quotients must be positive integers")

    @cached_property
    def convergents(self):
        """List of (p_j, q_j) for j = 0 .. len(quotients)."""
        out = [(0, 1)]
        if not self.quotients:
            return out
        out.append((1, self.quotients[0]))
        for a in self.quotients[1:]:
            p = a * out[-1][0] + out[-2][0]
            q = a * out[-1][1] + out[-2][1]
            out.append((p, q))
        return out

    @property
    def depth(self):
        return len(self.quotients)

    def p(self, n):
        return self.convergents[n][0]

    def q(self, n):
        return self.convergents[n][1]

    def fraction(self, n=None):
        """Exact value a_0 + p_n/q_n at convergent depth n (deepest if None)."""
        if n is None:
            n = self.depth
        p, q = self.convergents[n]
        return Fraction(self.a0) + Fraction(p, q)

    def tail_bound(self, n=None):
        """Exact upper bound on |x - value_at(n)| for any continuation x.

        At full depth the continuation is unknown, so the bound is the width
        of the interval of all possible continuations, < 1/q_n^2.  At smaller
        n the sharper 1/(q_n q_{n+1}) applies.
        """
        if n is None:
            n = self.depth
        if self.terminated and n == self.depth:
            return Fraction(0)
        if n < self.depth:
            return Fraction(1, self.q(n) * self.q(n + 1))
        return Fraction(1, self.q(n) ** 2)


def _euclid_cf(x: Fraction, depth: int):
    """Finite continued fraction of an exact rational in [0, 1)."""
    out = []
    cur = x
    for _ in range(depth):
        if cur == 0:
            return out, True
        inv = 1 / cur
        a = inv.numerator // inv.denominator
        out.append(a)
        cur = inv - a
    return out, cur == 0


def _to_fraction_exact(x):
    """Exact rational value of a float / mpf / decimal string / Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        v = Fraction(man) * Fraction(2) ** exp
        return -v if sign else v
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact fraction")


def cf_expand(x, depth, precision_bits=256):
    """Continued fraction of x in (0, 1) to the requested depth.

    x may be an exact Fraction (expansion may terminate, flagged), or a
    float / mpmath float / decimal string carrying ``precision_bits`` of
    trusted precision.  The expansion runs interval-exactly on the two
    endpoints of the uncertainty window and raises PrecisionExhausted when
    the window straddles a quotient boundary before ``depth`` is reached.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if 2 * depth >= precision_bits:
        raise PrecisionExhausted(
            f"depth {depth} needs more than precision_bits={precision_bits}"
        )
    if isinstance(x, Fraction):
        if not 0 < x < 1:
            raise ValueError("x must lie in (0, 1)")
        quots, term = _euclid_cf(x, depth)
        return ContinuedFraction(tuple(quots), a0=0, terminated=term)
    xf = _to_fraction_exact(x)
    err = Fraction(1, 2 ** (precision_bits - 1))
    lo, hi = xf - err, xf + err
    if not (0 < lo and hi < 1):
        raise ValueError("x must lie in (0, 1) beyond its uncertainty")
    quots = []
    for _ in range(depth):
        if lo == hi:
            rest, term = _euclid_cf(lo, depth - len(quots))
            return ContinuedFraction(tuple(quots + rest), a0=0, terminated=term)
        if lo <= 0:
            raise PrecisionExhausted(
                f"residual uncertainty spans a quotient boundary at depth {len(quots)}"
            )
        inv_hi, inv_lo = 1 / hi, 1 / lo
        a_hi, a_lo = int(inv_hi), int(inv_lo)
        if a_hi != a_lo:
            raise PrecisionExhausted(
                f"residual uncertainty spans a quotient boundary at depth {len(quots)}"
            )
        quots.append(a_hi)
        lo, hi = inv_hi - a_hi, inv_lo - a_hi
    return ContinuedFraction(tuple(quots), a0=0, terminated=False)


def torus_norm(x):
    """Distance to the nearest integer, min_j |x - j|, exact on Fractions."""
    if isinstance(x, Fraction):
        frac = x - int(x)
        if frac < 0:
            frac += 1
        return min(frac, 1 - frac)
    if isinstance(x, mpmath.mpf):
        frac = x - mpmath.floor(x)
        return min(frac, 1 - frac)
    frac = x - math.floor(x)
    return min(frac, 1.0 - frac)


# ---------------------------------------------------------------------------
# frequency vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyPair:
    """Frequency vector (alpha_tilde, alpha') on the d-torus.

    The first coordinate is always a ContinuedFraction; the remaining ones
    are ContinuedFraction objects or exact decimal strings trusted to
    ``precision_bits``.  All coordinates must lie in (0, 1).
    """

    alpha_tilde: ContinuedFraction
    alpha_prime: tuple = ()
    precision_bits: int = 256

    @property
    def dim(self):
        return 1 + len(self.alpha_prime)

    def _coords(self):
        return (self.alpha_tilde,) + tuple(self.alpha_prime)

    def fraction_vector(self):
        """Exact rational stand-ins plus per-coordinate tail bounds."""
        vals, errs = [], []
        for c in self._coords():
            if isinstance(c, ContinuedFraction):
                vals.append(c.fraction())
                errs.append(c.tail_bound())
            else:
                vals.append(Fraction(str(c)))
                errs.append(Fraction(1, 2 ** self.precision_bits))
        return vals, errs

    def fixed_point(self, bits=None):
        """Coordinates as floor(alpha * 2^bits) with integer error bounds."""
        if bits is None:
            bits = self.precision_bits
        vals, errs = self.fraction_vector()
        scaled = [(v.numerator << bits) // v.denominator for v in vals]
        errints = [1 + int(e * (1 << bits)) + 1 for e in errs]
        return scaled, errints, bits

    def float_vector(self):
        vals, _ = self.fraction_vector()
        return [float(v) for v in vals]

    def assert_rational_independent(self, radius):
        """Check <k, alpha> not in Z for all 0 < |k| <= radius (l^1).

        Finite certification only; raises PrecisionExhausted if some tested
        combination is below the precision budget.
        """
        scaled, errs, bits = self.fixed_point()
        mod = 1 << bits
        for k in _l1_ball(self.dim, radius):
            s = sum(ki * ai for ki, ai in zip(k, scaled)) % mod
            dist = min(s, mod - s)
            err = sum(abs(ki) * ei for ki, ei in zip(k, errs))
            if dist <= err:
                raise PrecisionExhausted(
                    f"<k, alpha> indistinguishable from an integer at k={k}"
                )
        return True


def _l1_ball(d, radius, include_zero=False):
    """All integer vectors with 0 < l1 norm <= radius (optionally with 0)."""
    if include_zero:
        yield (0,) * d
    if d == 1:
        for k in range(1, radius + 1):
            yield (k,)
            yield (-k,)
        return
    for k1 in range(-radius, radius + 1):
        rem = radius - abs(k1)
        for rest in _l1_ball(d - 1, rem, include_zero=True):
            if k1 == 0 and all(r == 0 for r in rest):
                continue
            yield (k1,) + rest


def beta_estimate(alpha: FrequencyPair, K: int):
    """max over 0 < |k| <= K of ln(1 / ||<k, alpha>||) / |k|  (l^1 norm).

    Finite-K lower estimate of the Liouville exponent; monotone nondecreasing
    in K by construction.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    scaled, errs, bits = alpha.fixed_point()
    mod = 1 << bits
    best = -math.inf
    for k in _l1_ball(alpha.dim, K):
        s = sum(ki * ai for ki, ai in zip(k, scaled)) % mod
        dist = min(s, mod - s)
        err = sum(abs(ki) * ei for ki, ei in zip(k, errs))
        if dist <= err:
            raise PrecisionExhausted(f"||<k, alpha>|| below working precision at k={k}")
        norm_l1 = sum(abs(ki) for ki in k)
        term = (bits * math.log(2) - math.log(dist)) / norm_l1
        if term > best:
            best = term
    return best


# ---------------------------------------------------------------------------
# denominator bridges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BridgeSelection:
    """Selected subsequence Q_j = q_{n_j} with companions Qbar_j = q_{n_j + 1}."""

    A_param: Fraction
    indices: tuple
    Q: tuple
    Q_bar: tuple
    U_estimate: float


def _pow_cmp(base: int, expo: Fraction, value: int):
    """Sign of base**expo - value, exact for rational exponents."""
    if base <= 0 or value <= 0:
        raise ValueError("positive integers required")
    lhs = base ** expo.numerator
    rhs = value ** expo.denominator
    return (lhs > rhs) - (lhs < rhs)


def _le_pow(value: int, base: int, expo: Fraction):
    """value <= base**expo, exact."""
    return _pow_cmp(base, expo, value) >= 0


def _ge_pow(value: int, base: int, expo: Fraction):
    """value >= base**expo, exact."""
    return _pow_cmp(base, expo, value) <= 0


def is_cd_bridge(qseq, l, n, A: Fraction, B: Fraction, C: Fraction):
    """Exact test of the bridge conditions for the pair (q_l, q_n)."""
    for j in range(l, n):
        if not _le_pow(qseq[j + 1], qseq[j], A):
            return False
    return _ge_pow(qseq[n], qseq[l], B) and _le_pow(qseq[n], qseq[l], C)


def select_cd_bridges(cf: ContinuedFraction, A_param=4) -> BridgeSelection:
    """Select the working subsequence (Q_j) of denominators.

    Greedy path search over exactly-verified feasibility: every returned
    selection satisfies Q_0 = 1, Q_{j+1} <= Qbar_j^(A^4), and for each j
    either Qbar_j >= Q_j^A or the pairs (Qbar_{j-1}, Q_j) and (Q_j, Q_{j+1})
    are both (A, A, A^3) bridges.  All power comparisons are integer-exact.
    """
    A = Fraction(A_param).limit_denominator(64)
    if A < 2:
        raise HypothesisViolated("A_param must be >= 2")
    if cf.depth < 3:
        raise TooFewConvergents("need at least 3 convergents")
    q = [c[1] for c in cf.convergents]
    N = len(q) - 1
    A3, A4 = A ** 3, A ** 4

    jump = [not _le_pow(q[m + 1], q[m], A) for m in range(N)]
    # prefix counts for "no jump inside [x, y)" queries
    pre = [0]
    for m in range(N):
        pre.append(pre[-1] + (1 if jump[m] else 0))

    def calm_range(x, y):
        # no jump at any m in [x, y)
        if y <= x:
            return True
        return pre[y] - pre[x] == 0

    def legal(a, b):
        if not _le_pow(q[b], q[a + 1], A4):
            return False
        if a < N and not jump[a]:
            if not calm_range(a, b):
                return False
            if not (_ge_pow(q[b], q[a], A) and _le_pow(q[b], q[a], A3)):
                return False
        if b < N and not jump[b]:
            if not calm_range(a + 1, b):
                return False
            if not (_ge_pow(q[b], q[a + 1], A) and _le_pow(q[b], q[a + 1], A3)):
                return False
        return True

    # furthest-reach DP over the DAG of legal hops
    reach = [0] * (N + 1)
    succ = [None] * (N + 1)
    for a in range(N - 1, -1, -1):
        reach[a] = a
        for b in range(a + 1, N + 1):
            if legal(a, b):
                cand = max(b, reach[b])
                better = cand > reach[a]
                equal = cand == reach[a] and succ[a] is not None
                if better:
                    reach[a] = cand
                    succ[a] = b
                elif equal:
                    # prefer a successor with q_b >= q_a^A, then the smallest
                    cur = succ[a]
                    cur_big = _ge_pow(q[cur], q[a], A)
                    new_big = _ge_pow(q[b], q[a], A)
                    if (new_big and not cur_big) or (new_big == cur_big and b < cur):
                        succ[a] = b
    path = [0]
    while succ[path[-1]] is not None and path[-1] < N:
        path.append(succ[path[-1]])
    if len(path) < 2:
        raise TooFewConvergents("no legal bridge hop from q_0; deepen the expansion")

    Q = tuple(q[j] for j in path)
    Qbar = tuple(q[j + 1] for j in path if j + 1 <= N)
    u = 0.0
    for j in range(len(path) - 1):
        if Q[j] <= 1 or Q[j + 1] <= 2:
            continue
        term = math.log(math.log(Q[j + 1])) / math.log(Q[j])
        u = max(u, term, 0.0)
    return BridgeSelection(A, tuple(path), Q, Qbar, u)


def validate_bridge_selection(cf: ContinuedFraction, sel: BridgeSelection):
    """Independent brute-force check of every invariant of a selection.

    Returns a list of CheckRow; all rows pass for a valid selection.
    """
    q = [c[1] for c in cf.convergents]
    A = sel.A_param
    rows = []
    idx = sel.indices
    rows.append(CheckRow("Q0-equals-1", 0, 0, 0, float(sel.Q[0]), 1.0, sel.Q[0] == 1))
    for j in range(len(idx) - 1):
        ok = _le_pow(q[idx[j + 1]], q[idx[j] + 1], A ** 4)
        rows.append(CheckRow("Q-growth-cap", j, idx[j], idx[j + 1],
                             _safe_float(q[idx[j + 1]]),
                             _safe_float(q[idx[j] + 1]) ** float(A ** 4)
                             if q[idx[j] + 1].bit_length() * float(A ** 4) < 900
                             else math.inf, ok))
        if _ge_pow(q[idx[j] + 1], q[idx[j]], A):
            rows.append(CheckRow("dichotomy-jump", j, idx[j], 0, 1.0, 1.0, True))
        else:
            ok_out = is_cd_bridge(q, idx[j], idx[j + 1], A, A, A ** 3)
            rows.append(CheckRow("dichotomy-bridge-out", j, idx[j], idx[j + 1],
                                 1.0 if ok_out else 0.0, 1.0, ok_out))
            if j >= 1:
                ok_in = is_cd_bridge(q, idx[j - 1] + 1, idx[j], A, A, A ** 3)
                rows.append(CheckRow("dichotomy-bridge-in", j, idx[j - 1] + 1, idx[j],
                                     1.0 if ok_in else 0.0, 1.0, ok_in))
    return rows


# ---------------------------------------------------------------------------
# the explicit two-frequency family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthSpec:
    """Growth target G for the denominator surgery.

    kind "exp" is the exact e^q target (integer-infeasible after two steps),
    "capped-exp" is e^min(q, cap), "poly" is q^m.  digit_budget limits the
    decimal size of any constructed integer.
    """

    kind: str = "poly"
    param: int = 2
    digit_budget: int = 200_000

    def __post_init__(self):
        if self.kind not in ("exp", "capped-exp", "poly"):
            raise ValueError(f"unknown growth kind {self.kind!r}")
        if self.kind in ("capped-exp", "poly") and (self.param is None or self.param < 1):
            raise ValueError("growth parameter must be a positive integer")

    def target(self, qprev: int) -> int:
        """Integer lower-bound target G(qprev) >= 1."""
        if self.kind == "poly":
            return qprev ** self.param
        e_arg = qprev if self.kind == "exp" else min(qprev, self.param)
        # e^q has about q * log10(e) digits; compare in integers to avoid
        # float overflow on astronomically large arguments
        if e_arg * 4343 > self.digit_budget * 10000:
            raise GrowthOverflow(
                f"e^{e_arg} needs more digits than the budget {self.digit_budget}"
            )
        with mpmath.workprec(int(e_arg * 1.442695040888963) + 64):
            val = mpmath.exp(e_arg)
            return int(mpmath.ceil(val))

    def to_record(self):
        return {"kind": self.kind, "param": self.param, "digit_budget": self.digit_budget}


@dataclass(frozen=True)
class OmegaChiFrequency:
    """Two-frequency vector built by coprime partial-quotient surgery.

    For every constructed step n the exact integer properties hold:
      (a) qt_n > G(qp_{n-1})   (growth target)
      (b) qt_n^5 < qp_n < 4 qt_n^chi
      (c) gcd(qt_n, qp_{n-1}) = 1
      (d) gcd(qp_n, qt_n) = 1
    where qt / qp are the denominators of the two coordinates.
    """

    chi: Fraction
    growth: GrowthSpec
    quotients_tilde: tuple
    quotients_prime: tuple
    witnesses: tuple = ()

    @property
    def steps(self):
        return len(self.quotients_tilde)

    @cached_property
    def cf_tilde(self):
        return ContinuedFraction(self.quotients_tilde)

    @cached_property
    def cf_prime(self):
        return ContinuedFraction(self.quotients_prime)

    def q_tilde(self, n):
        return self.cf_tilde.q(n)

    def q_prime(self, n):
        return self.cf_prime.q(n)

    def to_frequency_pair(self, precision_bits=256):
        return FrequencyPair(self.cf_tilde, (self.cf_prime,), precision_bits)


@dataclass(frozen=True)
class _Witness:
    n: int
    t_tilde: int
    s_tilde: int
    k_tilde: int
    t_prime: int
    s_prime: int
    k_prime: int


def _smallest_coprime_at_least(lo: int, m: int, hi=None):
    """Smallest k >= lo with gcd(k, m) = 1 (and k <= hi when given)."""
    k = max(1, lo)
    while hi is None or k <= hi:
        if math.gcd(k, m) == 1:
            return k
        k += 1
    return None


def _chi_upper_holds(qp: int, qt: int, chi: Fraction):
    """qp < 4 * qt^chi, exact for rational chi."""
    # qp^den < 4^den * qt^num
    return qp ** chi.denominator < (4 ** chi.denominator) * (qt ** chi.numerator)


def _div_floor_pow_chi(c: int, qt: int, chi: Fraction, div: int):
    """floor(c * qt^chi / div) for rational chi >= 1 (exact via integer root)."""
    if chi.denominator == 1:
        return (c * qt ** chi.numerator) // div
    # integer den-th root of c^den * qt^num / div^den, floor
    val = (c ** chi.denominator) * (qt ** chi.numerator) // (div ** chi.denominator)
    r = _integer_root(val, chi.denominator)
    return r


def _safe_float(x):
    """float(x) for possibly huge integers, overflowing to inf."""
    try:
        return float(x)
    except OverflowError:
        return math.inf


def _integer_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) by integer Newton iteration."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n < 2 or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k + 1)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def construct_omega_chi(chi, steps, growth: GrowthSpec = GrowthSpec()) -> OmegaChiFrequency:
    """Build the two-frequency family step by step.

    Step 1 is exactly a_tilde_1 = 2, a_prime_1 = 37.  Each later step finds a
    Bezout pair (t, s) aligning the previous denominators, then the smallest
    coprime witness k pushing the new denominator past the growth target
    (first coordinate) or into the window [2 qt^5, 3 qt^chi] (second
    coordinate).  All four properties are re-verified exactly before the
    step is accepted; on GrowthOverflow the feasible prefix is reported.
    """
    chi = Fraction(chi)
    if chi < 5:
        raise HypothesisViolated("chi must be >= 5")
    if steps < 1:
        raise ValueError("steps must be >= 1")

    qt = [1, 2]          # q_tilde_0, q_tilde_1
    qp = [1, 37]         # q_prime_0, q_prime_1
    at = [2]
    ap = [37]
    wits = []

    def _digits_ok(x):
        if x.bit_length() * 0.30103 > growth.digit_budget:
            raise GrowthOverflow(
                f"integer would exceed {growth.digit_budget} digits",
                feasible_steps=len(at),
            )

    for n in range(2, steps + 1):
        try:
            gtarget = growth.target(qp[n - 1])
        except GrowthOverflow as e:
            raise GrowthOverflow(str(e), feasible_steps=n - 1) from None

        # first coordinate: t qt_{n-1} + qt_{n-2} = s qp_{n-1}
        inv = pow(qt[n - 1], -1, qp[n - 1])
        t_t = (-qt[n - 2] * inv) % qp[n - 1]
        s_t = (t_t * qt[n - 1] + qt[n - 2]) // qp[n - 1]
        assert t_t * qt[n - 1] + qt[n - 2] == s_t * qp[n - 1]
        lo = -(-2 * gtarget // qt[n - 1])  # ceil
        k_t = _smallest_coprime_at_least(lo, qp[n - 1])
        a_t = t_t + k_t
        qt_n = a_t * qt[n - 1] + qt[n - 2]
        _digits_ok(qt_n)
        if not (qt_n > gtarget and math.gcd(qt_n, qp[n - 1]) == 1):
            raise NoWitness(f"first-coordinate step {n} failed its own checks")

        # second coordinate: t' qp_{n-1} + qp_{n-2} = s' qt_n
        inv2 = pow(qp[n - 1], -1, qt_n)
        t_p = (-qp[n - 2] * inv2) % qt_n
        s_p = (t_p * qp[n - 1] + qp[n - 2]) // qt_n
        assert t_p * qp[n - 1] + qp[n - 2] == s_p * qt_n
        lo2 = -(-2 * qt_n ** 5 // qp[n - 1])
        hi2 = _div_floor_pow_chi(3, qt_n, chi, qp[n - 1])
        k_p = _smallest_coprime_at_least(lo2, qt_n, hi=hi2)
        if k_p is None:
            raise NoWitness(f"no coprime witness in window at step {n}")
        a_p = t_p + k_p
        qp_n = a_p * qp[n - 1] + qp[n - 2]
        _digits_ok(qp_n)
        if not (qt_n ** 5 < qp_n and _chi_upper_holds(qp_n, qt_n, chi)
                and math.gcd(qp_n, qt_n) == 1):
            raise NoWitness(f"second-coordinate step {n} failed its own checks")

        qt.append(qt_n)
        qp.append(qp_n)
        at.append(a_t)
        ap.append(a_p)
        wits.append(_Witness(n, t_t, s_t, k_t, t_p, s_p, k_p))

    return OmegaChiFrequency(chi, growth, tuple(at), tuple(ap), tuple(wits))


def verify_omega_chi(freq: OmegaChiFrequency):
    """Independent gcd/comparison pass over properties (a)-(d).

    Recomputes the denominators from the quotients alone and checks every
    step with exact integer arithmetic.  The growth property (a) applies
    from step 2 on; step 1 is pinned to the base values (2, 37), which
    satisfy the window and coprimality properties but sit below e^(q'_0).
    Returns a list of CheckRow.
    """
    qt = [c[1] for c in ContinuedFraction(freq.quotients_tilde).convergents]
    qp = [c[1] for c in ContinuedFraction(freq.quotients_prime).convergents]
    rows = []
    for n in range(1, freq.steps + 1):
        if n >= 2:
            g = freq.growth.target(qp[n - 1])
            rows.append(CheckRow("omega-a-growth", n, 0, 0, _safe_float(qt[n]),
                                 _safe_float(g), qt[n] > g))
        ok_lo = qt[n] ** 5 < qp[n]
        ok_hi = _chi_upper_holds(qp[n], qt[n], freq.chi)
        rows.append(CheckRow("omega-b-window-lo", n, 0, 0, _safe_float(qp[n]),
                             _safe_float(qt[n] ** 5), ok_lo))
        rows.append(CheckRow("omega-b-window-hi", n, 0, 0, 1.0 if ok_hi else 0.0, 1.0, ok_hi))
        rows.append(CheckRow("omega-c-coprime", n, 0, 0,
                             float(math.gcd(qt[n], qp[n - 1])), 1.0,
                             math.gcd(qt[n], qp[n - 1]) == 1))
        rows.append(CheckRow("omega-d-coprime", n, 0, 0,
                             float(math.gcd(qp[n], qt[n])), 1.0,
                             math.gcd(qp[n], qt[n]) == 1))
    return rows


# ---------------------------------------------------------------------------
# Diophantine checks and small divisors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRow:
    check: str
    n: int
    k: object
    l: object
    value: float
    bound: float
    passed: bool


@dataclass
class VerificationReport:
    check: str
    rows: list = field(default_factory=list)
    passed: bool = True
    extras: dict = field(default_factory=dict)

    def add(self, row: CheckRow):
        self.rows.append(row)
        if not row.passed:
            self.passed = False


def check_rho_diophantine(rho, alpha: FrequencyPair, gamma, tau, K):
    """Test ||2 rho + <k, alpha>|| >= gamma / (1 + |k|)^tau for all |k| <= K.

    Includes k = 0.  Returns a VerificationReport whose extras carry the
    minimizing lattice point (ratio value/bound, lexicographic tie-break).
    """
    if gamma <= 0 or tau <= 0 or K < 0:
        raise HypothesisViolated("need gamma > 0, tau > 0, K >= 0")
    scaled, errs, bits = alpha.fixed_point()
    mod = 1 << bits
    if isinstance(rho, Fraction):
        r2 = (2 * rho.numerator * mod) // rho.denominator
        rerr = 1
    else:
        rf = Fraction(repr(float(rho)))
        r2 = (2 * rf.numerator * mod) // rf.denominator
        rerr = 2
    report = VerificationReport("rho-diophantine")
    worst = None
    for k in _l1_ball(alpha.dim, K, include_zero=True) if K >= 0 else []:
        norm_l1 = sum(abs(ki) for ki in k)
        if norm_l1 > K:
            continue
        s = (r2 + sum(ki * ai for ki, ai in zip(k, scaled))) % mod
        dist = min(s, mod - s)
        err = rerr + sum(abs(ki) * ei for ki, ei in zip(k, errs))
        value = dist / mod
        bound = gamma / (1 + norm_l1) ** tau
        ok = (dist - err) / mod >= bound
        ratio = value / bound
        if worst is None or ratio < worst[0] or (ratio == worst[0] and k < worst[1]):
            worst = (ratio, k, value, bound, ok)
    if worst is not None:
        report.add(CheckRow("rho-diophantine", 0, worst[1], 0, worst[2], worst[3], worst[4]))
        report.extras["offender"] = worst[1]
        report.extras["value"] = worst[2]
        report.extras["bound"] = worst[3]
    return report


def verify_small_divisors(freq: OmegaChiFrequency, n, mode, rho=None,
                          gamma=0.1, tau=2.5, cap=5000, precision_bits=256):
    """Exhaustive small-divisor verification for the two-frequency family.

    mode "lattice": checks ||k at + l ap|| >= 1/(2 qp_n) for all
    0 < |k| + |l| < qt_n by exact fixed-point enumeration.
    mode "rho": reports the empirical minimum of ||<k, alpha> +- 2 rho||
    over |k| <= sqrt(qt_{n+1}) and the implied constant against the shape
    gamma^(tau+1) / qp_n^(tau^2).
    """
    if mode not in ("lattice", "rho"):
        raise ValueError("mode must be 'lattice' or 'rho'")
    if n < 1 or n > freq.steps:
        raise ValueError(f"step n={n} outside constructed range 1..{freq.steps}")
    pair = freq.to_frequency_pair(precision_bits)
    scaled, errs, bits = pair.fixed_point()
    mod = 1 << bits
    at_i, ap_i = scaled
    et_i, ep_i = errs
    report = VerificationReport(f"small-divisor-{mode}")

    if mode == "lattice":
        qt_n = freq.q_tilde(n)
        if qt_n > cap:
            feas = max((m for m in range(1, freq.steps + 1) if freq.q_tilde(m) <= cap),
                       default=None)
            raise CapExceeded(
                f"qt_{n} = {qt_n} exceeds cap {cap}", largest_feasible=feas)
        qp_n = freq.q_prime(n)
        half = mod >> 1
        qp2 = 2 * qp_n
        # certified comparison threshold: dist - err >= mod / (2 qp_n)
        lap = [(l * ap_i) % mod for l in range(qt_n)]
        min_num, min_kl = None, None
        uncertain = None
        for k in range(-(qt_n - 1), qt_n):
            rem = qt_n - 1 - abs(k)
            base = (k * at_i) % mod
            err_k = abs(k) * et_i
            for l in range(-rem, rem + 1):
                if k == 0 and l == 0:
                    continue
                s = base + lap[l] if l >= 0 else base - lap[-l]
                if s >= mod:
                    s -= mod
                elif s < 0:
                    s += mod
                dist = s if s <= half else mod - s
                err = err_k + abs(l) * ep_i
                if (dist - err) * qp2 < mod:
                    if (dist + err) * qp2 < mod:
                        report.add(CheckRow("lattice-floor", n, k, l,
                                            dist / mod, 1.0 / qp2, False))
                    else:
                        uncertain = (k, l)
                if min_num is None or dist < min_num:
                    min_num, min_kl = dist, (k, l)
        if uncertain is not None and report.passed:
            raise PrecisionExhausted(
                f"cannot certify divisor at (k, l)={uncertain} with {bits} bits")
        min_val = min_num / mod if min_num is not None else math.inf
        report.extras["empirical_min"] = min_val
        report.extras["argmin"] = min_kl
        report.extras["bound"] = 1.0 / qp2
        if report.passed:
            report.add(CheckRow("lattice-floor", n, min_kl[0] if min_kl else 0,
                                min_kl[1] if min_kl else 0,
                                min_val, 1.0 / qp2, True))
        return report

    # mode == "rho"
    if rho is None:
        raise HypothesisViolated("mode 'rho' requires rho")
    if n + 1 > freq.steps:
        raise ValueError("mode 'rho' needs step n+1 constructed")
    kmax = _integer_root(freq.q_tilde(n + 1), 2)
    if kmax > cap:
        kmax = cap
        report.extras["capped"] = True
    rf = Fraction(repr(float(rho)))
    r2 = (2 * rf.numerator * mod) // rf.denominator
    qp_n = freq.q_prime(n)
    min_val, min_k = None, None
    for k1 in range(-kmax, kmax + 1):
        rem = kmax - abs(k1)
        for k2 in range(-rem, rem + 1):
            base = (k1 * at_i + k2 * ap_i) % mod
            for sign in (1, -1):
                s = (base + sign * r2) % mod
                dist = min(s, mod - s)
                err = abs(k1) * et_i + abs(k2) * ep_i + 2
                val = 0.0 if dist <= err else dist / mod
                if min_val is None or val < min_val:
                    min_val, min_k = val, (k1, k2, sign)
    with mpmath.workprec(128):
        shape = float(mpmath.mpf(gamma) ** (tau + 1) / mpmath.mpf(qp_n) ** (tau * tau))
    c_emp = (min_val / shape) if shape > 0 else math.inf
    report.extras["empirical_min"] = min_val
    report.extras["argmin"] = min_k
    report.extras["bound_shape"] = shape
    report.extras["empirical_constant"] = c_emp
    report.add(CheckRow("rho-uniform-floor", n, min_k[:2] if min_k else 0,
                        min_k[2] if min_k else 0, min_val, shape, min_val > 0.0))
    return report


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def frequency_to_record(obj):
    """Self-describing dict for frequencies (JSON-compatible, big-int safe)."""
    if isinstance(obj, ContinuedFraction):
        return {"kind": "cf", "a0": obj.a0, "quotients": list(obj.quotients),
                "terminated": obj.terminated}
    if isinstance(obj, OmegaChiFrequency):
        return {
            "kind": "omega-chi",
            "chi": [obj.chi.numerator, obj.chi.denominator],
            "growth": obj.growth.to_record(),
            "steps": obj.steps,
            "quotients_tilde": list(obj.quotients_tilde),
            "quotients_prime": list(obj.quotients_prime),
            "witnesses": [[w.n, w.t_tilde, w.s_tilde, w.k_tilde,
                           w.t_prime, w.s_prime, w.k_prime] for w in obj.witnesses],
        }
    if isinstance(obj, FrequencyPair):
        prime = []
        for c in obj.alpha_prime:
            if isinstance(c, ContinuedFraction):
                prime.append(frequency_to_record(c))
            else:
                prime.append({"kind": "real", "digits": str(c),
                              "precision_bits": obj.precision_bits})
        return {"kind": "pair", "alpha_tilde": frequency_to_record(obj.alpha_tilde),
                "alpha_prime": prime, "precision_bits": obj.precision_bits}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def frequency_from_record(rec):
    kind = rec.get("kind")
    if kind == "cf":
        return ContinuedFraction(tuple(rec["quotients"]), a0=rec.get("a0", 0),
                                 terminated=rec.get("terminated", False))
    if kind == "real":
        return rec["digits"]
    if kind == "omega-chi":
        wits = tuple(_Witness(*w) for w in rec.get("witnesses", []))
        return OmegaChiFrequency(
            Fraction(rec["chi"][0], rec["chi"][1]),
            GrowthSpec(**rec["growth"]),
            tuple(rec["quotients_tilde"]),
            tuple(rec["quotients_prime"]),
            wits,
        )
    if kind == "pair":
        prime = tuple(frequency_from_record(r) if isinstance(r, dict) and
                      r.get("kind") == "cf" else (r["digits"] if isinstance(r, dict) else r)
                      for r in rec["alpha_prime"])
        return FrequencyPair(frequency_from_record(rec["alpha_tilde"]), prime,
                             rec.get("precision_bits", 256))
    raise ValueError(f"unknown frequency record kind {kind!r}")
