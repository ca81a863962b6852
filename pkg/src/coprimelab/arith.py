"""Exact and enclosed evaluation of the colouring's number-theoretic constants.

All infinite Euler products are split into an exactly evaluated truncated part
(primes <= P) and a two-sided tail bound, packaged as an Interval that is
guaranteed to contain the true real value.  Elementary inequalities only:

    -2t <= log(1 - t) <= -t            for 0 <= t <= 1/2          (log bounds)
    -t - t^2 <= log(1 - t) <= -t       for 0 <= t <= 1/2          (sharper lower)
    sum over odd k >= m of k^-s <= (m-1)^(1-s) / (2(s-1))         (midpoint rule)

The last line uses convexity of t^-s; every prime beyond any truncation point
P >= 2 is odd, which is where the extra factor 1/2 over the plain integral
bound comes from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext, ROUND_HALF_EVEN
from fractions import Fraction

import numpy as np

from .errors import DomainError

# Truncated products with P at most this bound are accumulated as exact
# rationals; larger ones switch to 128-bit fixed-point with directed rounding.
EXACT_PRODUCT_LIMIT = 10_000
_FIXED_BITS = 128
_FIXED_ONE = 1 << _FIXED_BITS

ARITHMETIC_EXACT = "exact-rational"
ARITHMETIC_FIXED = f"fixed-point-{_FIXED_BITS}bit-directed"


# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with rational endpoints; an enclosure."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval: {self.lo} > {self.hi}")

    @staticmethod
    def point(value) -> "Interval":
        q = Fraction(value)
        return Interval(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value) -> bool:
        q = Fraction(value)
        return self.lo <= q <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __add__(self, other):
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __rsub__(self, other):
        return _as_interval(other) + (-self)

    def __mul__(self, other):
        other = _as_interval(other)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise DomainError("reciprocal of an interval containing zero")
        return Interval(1 / self.hi, 1 / self.lo)


def _as_interval(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval.point(value)


# ---------------------------------------------------------------------------
# primes


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, ascending."""

    limit: int
    primes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)


def _sieve_bools(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    return is_prime


def primes_up_to(limit: int) -> PrimeTable:
    if limit < 2:
        raise DomainError(f"prime table needs limit >= 2, got {limit}")
    values = np.nonzero(_sieve_bools(limit))[0]
    return PrimeTable(limit, tuple(int(p) for p in values))


def smallest_prime_factors(limit: int) -> np.ndarray:
    """spf[k] = least prime factor of k, for 0 <= k <= limit (spf[0]=spf[1]=0)."""
    if limit < 1:
        raise DomainError("spf table needs limit >= 1")
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if spf[p] == 0:
            block = spf[p::p]
            block[block == 0] = p
    return spf


def _odd_prime_factors(n: int) -> list[int]:
    out = []
    while n % 2 == 0:
        n //= 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 2
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# directed product accumulation


class ProductAccumulator:
    """Running product of positive rationals with a guaranteed enclosure.

    Exact mode keeps a single Fraction; fixed mode keeps floor/ceil scaled
    integers so very long products stay cheap.  Either way result() brackets
    the true product.
    """

    def __init__(self, exact: bool):
        self.exact = exact
        if exact:
            self.value = Fraction(1)
        else:
            self.lo = _FIXED_ONE
            self.hi = _FIXED_ONE

    def multiply(self, num: int, den: int) -> None:
        if num < 0 or den <= 0:
            raise ValueError("factors must be nonnegative with positive denominator")
        if self.exact:
            self.value *= Fraction(num, den)
        else:
            self.lo = (self.lo * num) // den
            self.hi = -((-self.hi * num) // den)

    def result(self) -> Interval:
        if self.exact:
            return Interval(self.value, self.value)
        return Interval(
            Fraction(self.lo, _FIXED_ONE), Fraction(self.hi, _FIXED_ONE)
        )

    @property
    def mode(self) -> str:
        return ARITHMETIC_EXACT if self.exact else ARITHMETIC_FIXED


def _accumulator_for(P: int) -> ProductAccumulator:
    return ProductAccumulator(exact=P <= EXACT_PRODUCT_LIMIT)


def prime_power_tail_sum(P: int, s: int) -> Fraction:
    """Upper bound for sum of p^-s over primes p > P (s >= 2, P >= 2).

    Every prime > P is odd and >= the first odd integer m > P; odd-integer
    midpoint rule gives (m-1)^(1-s) / (2(s-1)).
    """
    if P < 2 or s < 2:
        raise DomainError("tail sum defined for P >= 2, s >= 2")
    m = P + 1 if P % 2 == 0 else P + 2
    return Fraction(1, 2 * (s - 1) * (m - 1) ** (s - 1))


def _tail_interval_one_minus(a: int, P: int, s: int = 2) -> Interval:
    """Enclosure of the tail product over primes p > P of (1 - a/p^s).

    Valid whenever a/p^s <= 1/2 for every prime p > P; the caller must ensure
    that.  Uses exp(-2t) >= 1 - 2t on the lower side and 1 as the upper.
    """
    tail_sum = prime_power_tail_sum(P, s)
    lo = 1 - 2 * a * tail_sum
    if lo < 0:
        lo = Fraction(0)
    return Interval(Fraction(lo), Fraction(1))


def _check_tail_validity(a: int, P: int, s: int = 2) -> None:
    # smallest possible prime in the tail is the first odd integer > P
    m = P + 1 if P % 2 == 0 else P + 2
    if 2 * a > m**s:
        raise DomainError(
            f"tail bound invalid: factor {a}/p^{s} exceeds 1/2 at p={m}; raise P"
        )


# ---------------------------------------------------------------------------
# single-line and pair-line probabilities


def line_white_trunc(x: int, P: int) -> Fraction:
    """Exact truncated product over p <= P of (1 - min(p,x)/p^2)."""
    if x < 1 or P < 2:
        raise DomainError(f"need x >= 1 and P >= 2, got x={x}, P={P}")
    value = Fraction(1)
    for p in primes_up_to(P):
        m = min(p, x)
        value *= Fraction(p * p - m, p * p)
    return value


def line_white_prob(x: int, P: int) -> Interval:
    """Enclosure of the full product over all primes of (1 - min(p,x)/p^2).

    Factors up to max(P, x) are taken exactly so every tail prime has
    min(p,x) = x; the tail is then a clean product of (1 - x/p^2) terms.
    """
    if x < 1 or P < 2:
        raise DomainError(f"need x >= 1 and P >= 2, got x={x}, P={P}")
    Q = max(P, x)
    _check_tail_validity(x, Q)
    acc = _accumulator_for(Q)
    for p in primes_up_to(Q):
        m = min(p, x)
        acc.multiply(p * p - m, p * p)
    return acc.result() * _tail_interval_one_minus(x, Q)


def pair_line_trunc(d: int, x: int, P: int) -> Fraction:
    """Exact truncated product for the two-line joint probability."""
    if d < 1:
        raise DomainError("pair separation must be >= 1")
    if d > x:
        raise DomainError(f"separation d={d} exceeds x={x}")
    if P < 2:
        raise DomainError("P >= 2 required")
    value = Fraction(1)
    for p in primes_up_to(P):
        m = min(p, x)
        a = m if d % p == 0 else 2 * m
        value *= Fraction(p * p - a, p * p)
        if value == 0:
            break
    return value


def pair_line_prob(d: int, x: int, P: int) -> Interval:
    """Enclosure of E[X_0 X_d]: both lines at distance d white, window width x.

    Odd separations give the exact zero interval (the residue classes mod 2 of
    the two lines differ, so one of them always meets the mod-2 coset).
    """
    if d < 1:
        raise DomainError("pair separation must be >= 1")
    if d > x:
        raise DomainError(f"separation d={d} exceeds x={x}")
    if d % 2 == 1:
        if x >= 2:
            return Interval.point(0)
        raise DomainError("need x >= 2 for the mod-2 argument")
    if P < 2:
        raise DomainError("P >= 2 required")
    Q = max(P, x)
    _check_tail_validity(2 * x, Q)
    acc = _accumulator_for(Q)
    for p in primes_up_to(Q):
        m = min(p, x)
        a = m if d % p == 0 else 2 * m
        acc.multiply(p * p - a, p * p)
    return acc.result() * _tail_interval_one_minus(2 * x, Q)


# ---------------------------------------------------------------------------
# theta, phi and their identities


def theta(d: int) -> Fraction:
    """Product over odd primes p dividing d of (p-1)/(p-2); d must be even."""
    if d < 2 or d % 2 == 1:
        raise DomainError(f"theta defined for even d >= 2, got {d}")
    value = Fraction(1)
    for p in _odd_prime_factors(d):
        value *= Fraction(p - 1, p - 2)
    return value


def phi_sqf(k: int) -> Fraction:
    """Product over primes p dividing k of 1/(p-2), for odd squarefree k >= 1."""
    if k < 1 or k % 2 == 0:
        raise DomainError(f"phi_sqf defined for odd k >= 1, got {k}")
    value = Fraction(1)
    n = k
    f = 3
    while f * f <= n:
        if n % f == 0:
            n //= f
            if n % f == 0:
                raise DomainError(f"{k} is not squarefree (repeated factor {f})")
            value *= Fraction(1, f - 2)
        f += 2
    if n > 1:
        value *= Fraction(1, n - 2)
    return value


def theta_divisor_identity_check(d: int) -> bool:
    """True iff theta(d) equals the sum of phi over odd squarefree divisors of d."""
    if d < 2 or d % 2 == 1:
        raise DomainError(f"identity stated for even d >= 2, got {d}")
    odd_primes = _odd_prime_factors(d)
    total = Fraction(0)
    for mask in range(1 << len(odd_primes)):
        term = Fraction(1)
        for i, p in enumerate(odd_primes):
            if mask >> i & 1:
                term *= Fraction(1, p - 2)
        total += term
    return total == theta(d)


def twin_prime_tail_sum(P: int) -> Fraction:
    """Upper bound for sum of (p-1)^-2 over primes p > P >= 3.

    p-1 runs over even integers >= m-1 where m is the first odd integer > P;
    midpoint rule over even integers gives 1/(2(m-2)).
    """
    if P < 3:
        raise DomainError("twin tail needs P >= 3")
    m = P + 1 if P % 2 == 0 else P + 2
    return Fraction(1, 2 * (m - 2))


def twin_prime_constant(P: int) -> Interval:
    """Enclosure of the product over odd primes of (1 - (p-1)^-2)."""
    if P < 3:
        raise DomainError(f"need P >= 3, got {P}")
    acc = _accumulator_for(P)
    for p in primes_up_to(P):
        if p == 2:
            continue
        q = p - 1
        acc.multiply(q * q - 1, q * q)
    tail_sum = twin_prime_tail_sum(P)
    tail = Interval(max(Fraction(0), 1 - 2 * tail_sum), Fraction(1))
    return acc.result() * tail


def _phi_terms(N: int):
    """Yield (k, unit_denominator) with phi_sqf(k) = 1/unit for odd squarefree k <= N."""
    if N < 1:
        raise DomainError("N >= 1 required")
    yield 1, 1
    if N < 3:
        return
    spf = smallest_prime_factors(N)
    for k in range(3, N + 1, 2):
        n = k
        unit = 1
        squarefree = True
        while n > 1:
            p = int(spf[n])
            n //= p
            if n % p == 0:
                squarefree = False
                break
            unit *= p - 2
        if squarefree:
            yield k, unit


def phi_partial_sum(N: int, weighted: bool) -> Fraction:
    """Exact sum of phi_sqf(k) (or phi_sqf(k)/k) over odd squarefree k <= N.

    Exact rationals get expensive beyond N around 10^4; use
    phi_partial_sum_interval for large N.
    """
    total = Fraction(0)
    for k, unit in _phi_terms(N):
        total += Fraction(1, unit * k) if weighted else Fraction(1, unit)
    return total


def phi_partial_sum_interval(N: int, weighted: bool) -> Interval:
    """Directed fixed-point enclosure of phi_partial_sum, cheap for large N."""
    lo = 0
    hi = 0
    for k, unit in _phi_terms(N):
        den = unit * k if weighted else unit
        lo += _FIXED_ONE // den
        hi += -((-_FIXED_ONE) // den)
    return Interval(Fraction(lo, _FIXED_ONE), Fraction(hi, _FIXED_ONE))


# ---------------------------------------------------------------------------
# zeta


def zeta_inverse(d: int, P: int) -> Interval:
    """Enclosure of the product over all primes of (1 - p^-d)."""
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    if P < 2:
        raise DomainError(f"need P >= 2, got {P}")
    acc = _accumulator_for(P)
    for p in primes_up_to(P):
        pd = p**d
        acc.multiply(pd - 1, pd)
    tail_sum = prime_power_tail_sum(P, d)
    tail = Interval(max(Fraction(0), 1 - 2 * tail_sum), Fraction(1))
    return acc.result() * tail


# ---------------------------------------------------------------------------
# the second-moment upper bound


@dataclass(frozen=True)
class SecondMomentReport:
    """Chebyshev upper bound on the no-white-line probability for n lines.

    r_upper bounds the probability for the full infinite-prime model: the f
    and pair enclosures carry explicit tails for every prime beyond P, and
    truncating the sampler at any P only makes white lines more likely, so the
    bound also covers every truncated model.
    """

    n: int
    x: int
    P: int
    f_enclosure: Interval
    offdiag_sum: Interval
    diag_term: Interval
    r_upper: Fraction
    arithmetic: str

    def csv_row(self) -> str:
        return ",".join(
            [
                str(self.n),
                str(self.x),
                str(self.P),
                decimal_str(self.f_enclosure.lo),
                decimal_str(self.f_enclosure.hi),
                decimal_str(self.r_upper),
            ]
        )


SECOND_MOMENT_CSV_HEADER = "n,x,P,f_lo,f_hi,r_upper"


def pair_ratio_base(x: int, P: int) -> Interval:
    """Enclosure of the product over odd primes of (1-2m/p^2)/(1-m/p^2)^2, m=min(p,x).

    This is the separation-independent part of the pair/line-squared ratio;
    multiplying by 2*theta(d) gives the full ratio for even separation d <= x.
    The tail factors are 1 + O(x^2/p^4), so the enclosure stays tight at
    moderate P, unlike the quotient of the two separate enclosures.
    """
    if x < 2:
        raise DomainError("need x >= 2")
    if P < 2:
        raise DomainError("P >= 2 required")
    Q = max(P, x)
    _check_tail_validity(2 * x, Q)
    acc = _accumulator_for(Q)
    for p in primes_up_to(Q):
        if p == 2:
            continue
        m = min(p, x)
        acc.multiply((p * p - 2 * m) * p * p, (p * p - m) ** 2)
    # |log factor| <= 4 (x/p^2)^2 once x/p^2 <= 1/4, which the validity check
    # above guarantees for every tail prime
    eps = 4 * x * x * prime_power_tail_sum(Q, 4)
    if eps >= 1:
        raise DomainError("tail too wide; raise P")
    tail = Interval(1 - eps, 1 / (1 - eps))
    return acc.result() * tail


def pair_over_line_sq(d: int, x: int, P: int) -> Interval:
    """Enclosure of pair(d,x)/line(x)^2 for even separation d."""
    if d < 2 or d % 2 == 1:
        raise DomainError("ratio defined for even d >= 2")
    if d > x:
        raise DomainError(f"separation d={d} exceeds x={x}")
    return pair_ratio_base(x, P) * (2 * theta(d))


def second_moment_bound(n: int, x: int, P: int | None = None) -> SecondMomentReport:
    """Upper bound for the probability that none of n consecutive lines of
    width x is fully white, via the exact finite second-moment identity."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if x < n:
        raise DomainError(f"need x >= n, got x={x} < n={n}")
    if P is None:
        P = 32 * x

    f_enc = line_white_prob(x, P)
    base = pair_ratio_base(x, P)
    weight = Fraction(0)
    for d in range(2, n + 1, 2):
        weight += (n - d) * theta(d)
    offdiag = base * (Fraction(4 * weight, n * n))
    diag = f_enc.reciprocal() * Fraction(1, n)
    total = offdiag + diag - 1
    r_upper = total.hi if total.hi > 0 else Fraction(0)
    mode = ARITHMETIC_EXACT if P <= EXACT_PRODUCT_LIMIT else ARITHMETIC_FIXED
    return SecondMomentReport(n, x, P, f_enc, offdiag, diag, r_upper, mode)


# ---------------------------------------------------------------------------
# checked properties with fitted constants


def check_inverse_f_log_bound(x_max: int = 10_000, factor: int = 12) -> dict:
    """Verify 1/f(x) <= factor * log(x) for every integer x in [2, x_max].

    f is decreasing and log increasing, so checking 1/f(hi) <= factor*log(lo)
    on a geometric grid certifies the whole range.  Returns both sides at the
    tightest grid point plus the largest observed 1/(f(x) log x).
    """
    grid = [2, 3, 4, 5, 6, 8]
    g = 8
    while g < x_max:
        g = min(x_max, max(g + 1, int(g * 1.3)))
        grid.append(g)
    ok = True
    worst = None
    fitted = Fraction(0)
    prev = 2
    for xg in grid:
        P = max(2 * xg, 64)
        f_lo = line_white_prob(xg, P).lo
        bound = Fraction(1) / f_lo
        # rational lower bound on log(prev): shave the float a little
        log_lo = Fraction(math.log(prev)) * Fraction(999_999, 1_000_000)
        ratio = bound / log_lo
        if fitted < ratio:
            fitted = ratio
            worst = (prev, xg, float(bound), float(factor * log_lo))
        if bound > factor * log_lo:
            ok = False
        prev = xg
    return {
        "ok": ok,
        "factor": factor,
        "fitted_constant": float(fitted),
        "worst": worst,
    }


# ---------------------------------------------------------------------------
# formatting


def decimal_str(value, sig: int = 12) -> str:
    """Decimal string with `sig` significant digits, round half to even."""
    q = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = sig
        ctx.rounding = ROUND_HALF_EVEN
        d = Decimal(q.numerator) / Decimal(q.denominator)
        return format(d, "f")
