"""Factorization infrastructure and the order-r von Mangoldt machinery.

The central objects:

  * FactorSieve      least-prime-factor table over [2, X], built segment by
                     segment; factoring any n <= X costs O(log n) divisions.

  * Lambda_r(n) = sum_{d|n} mu(d) (log(n/d))^r

    the order-r von Mangoldt function.  Moebius inversion gives
    sum_{d|n} Lambda_r(d) = (log n)^r, and Lambda_r(n) vanishes identically
    whenever n has more than r distinct prime factors, which is what makes
    it a detector for the condition omega(n) <= r.

    Float tables are computed by the support-aware recurrence

        Lambda_{r+1}(n) = Lambda_r(n) log n + sum_{de=n} Lambda_r(d) Lambda_1(e)

    seeded from Lambda_1 on prime powers, so entries with omega(n) > r are
    exact 0.0 (every summand is a structural zero), never cancellation noise.

    Exact values are kept symbolically as integer combinations of monomials
    in log p: a map  (p_1, p_1, p_3, ...) -> coefficient  encodes
    coeff * log(p_1)^2 log(p_3) ... .  All cancellation happens in integer
    arithmetic, so Lambda_r(n) = 0 is decidable exactly.

  * The four-term combinatorial partition, for parameters R (small-divisor
    cap) and Q (small-l cap):

        Lambda_r(n) = S1 - S2 + S3 + S4
        S1 = sum_{d|n, d<=R}            mu(d) (log(n/d))^r
        S2 = sum_{lm|n, m<=R, l<=Q}     mu(m) Lambda_r(l)
        S3 = sum_{lm|n, l<=Q}           mu(m) Lambda_r(l)
        S4 = sum_{lm|n, m>R, l>Q}       mu(m) Lambda_r(l)

    For Q < n <= QR the last two sums vanish and the identity collapses to
    the two-term form S1 - S2.  The dyadic decomposition splits S2 over
    blocks (L, 2L] x (M, 2M] with 2L <= Q, 2M <= R, halving from the top so
    the blocks tile the (l, m) ranges exactly.

Parameter defaults follow the bilinear-sum optimization Q = X^{9/13},
R = X^{4/13} (with the dyadic m-cap M <= X^{1/26} arising in that analysis).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .errors import CertificationError, PrecisionError, ValidationError

SEGMENT_SIZE = 1 << 22
MAX_SIEVE_LIMIT = (1 << 31) - 1

AlmostPrimeMode = Literal["distinct", "with-multiplicity"]


# ---------------------------------------------------------------------------
# least-prime-factor sieve
# ---------------------------------------------------------------------------

def _simple_primes(limit: int) -> np.ndarray:
    """Primes up to `limit` inclusive by a plain boolean sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


class FactorSieve:
    """Least-prime-factor table for [2, X]; lpf[p] == p exactly for primes."""

    def __init__(self, limit: int, lpf: np.ndarray):
        self.limit = limit
        self.lpf = lpf
        self._primes: np.ndarray | None = None

    @classmethod
    def build(cls, limit: int, use_cache: bool = True) -> "FactorSieve":
        if limit < 2:
            raise ValidationError("sieve limit must be at least 2")
        if limit > MAX_SIEVE_LIMIT:
            raise ValidationError(f"sieve limit {limit} exceeds capacity {MAX_SIEVE_LIMIT}")
        cache_path = None
        cache_dir = os.environ.get("KOHNEN_SIEVE_CACHE")
        if use_cache and cache_dir:
            os.makedirs(cache_dir, exist_ok=True)
            cache_path = os.path.join(cache_dir, f"lpf_x{limit}_seg{SEGMENT_SIZE}_v1.npy")
            if os.path.exists(cache_path):
                return cls(limit, np.load(cache_path))
        lpf = np.zeros(limit + 1, dtype=np.uint32)
        root_primes = _simple_primes(math.isqrt(limit))
        for lo in range(2, limit + 1, SEGMENT_SIZE):
            hi = min(lo + SEGMENT_SIZE, limit + 1)
            for p in root_primes:
                p = int(p)
                start = max(p, ((lo + p - 1) // p) * p)
                if start >= hi:
                    continue
                seg = lpf[start:hi:p]
                seg[seg == 0] = p
        # anything still unmarked is a prime > sqrt(limit)
        rest = np.flatnonzero(lpf[2:] == 0) + 2
        lpf[rest] = rest
        if cache_path:
            np.save(cache_path, lpf)
        return cls(limit, lpf)

    def _check_range(self, n: int) -> None:
        if not 1 <= n <= self.limit:
            raise ValidationError(f"n={n} outside sieve range [1, {self.limit}]")

    def primes(self) -> np.ndarray:
        if self._primes is None:
            idx = np.arange(self.limit + 1, dtype=np.uint32)
            hits = np.flatnonzero(self.lpf == idx).astype(np.int64)
            self._primes = hits[hits >= 2]
        return self._primes

    def is_prime(self, n: int) -> bool:
        self._check_range(n)
        return n >= 2 and int(self.lpf[n]) == n

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorization [(p, e), ...] with p ascending."""
        self._check_range(n)
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(self.lpf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def omega(self, n: int) -> int:
        return len(self.factorize(n))

    def bigomega(self, n: int) -> int:
        return sum(e for _, e in self.factorize(n))

    def mobius(self, n: int) -> int:
        fac = self.factorize(n)
        if any(e > 1 for _, e in fac):
            return 0
        return -1 if len(fac) % 2 else 1

    def divisors(self, n: int) -> list[int]:
        divs = [1]
        for p, e in self.factorize(n):
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)

    # -- whole-range tables (vectorized) ------------------------------------

    def omega_table(self, upto: int | None = None) -> np.ndarray:
        upto = self.limit if upto is None else upto
        self._check_range(max(upto, 2))
        out = np.zeros(upto + 1, dtype=np.int8)
        for p in self.primes():
            p = int(p)
            if p > upto:
                break
            out[p::p] += 1
        return out

    def bigomega_table(self, upto: int | None = None) -> np.ndarray:
        upto = self.limit if upto is None else upto
        self._check_range(max(upto, 2))
        out = np.zeros(upto + 1, dtype=np.int8)
        for p in self.primes():
            p = int(p)
            if p > upto:
                break
            pk = p
            while pk <= upto:
                out[pk::pk] += 1
                pk *= p
        return out

    def mobius_table(self, upto: int | None = None) -> np.ndarray:
        upto = self.limit if upto is None else upto
        self._check_range(max(upto, 2))
        out = np.ones(upto + 1, dtype=np.int8)
        for p in self.primes():
            p = int(p)
            if p > upto:
                break
            out[p::p] *= -1
            sq = p * p
            if sq <= upto:
                out[sq::sq] = 0
        out[0] = 0
        return out


@dataclass(frozen=True)
class ArithmeticInfo:
    factorization: tuple[tuple[int, int], ...]
    omega: int
    bigomega: int
    mobius: int


def arithmetic_functions(sieve: FactorSieve, n: int) -> ArithmeticInfo:
    """Factorization together with omega, Omega and mu; n = 1 is the empty case."""
    if n == 1:
        return ArithmeticInfo((), 0, 0, 1)
    fac = tuple(sieve.factorize(n))
    om = len(fac)
    bo = sum(e for _, e in fac)
    mu = 0 if any(e > 1 for _, e in fac) else (-1 if om % 2 else 1)
    return ArithmeticInfo(fac, om, bo, mu)


def build_factor_sieve(limit: int, use_cache: bool = True) -> FactorSieve:
    return FactorSieve.build(limit, use_cache=use_cache)


# ---------------------------------------------------------------------------
# symbolic log-monomial arithmetic
# ---------------------------------------------------------------------------
#
# A "log polynomial" is a dict mapping a sorted tuple of primes (with
# repetition) to an integer coefficient:  {(2, 2, 3): 5} means
# 5 * log(2)^2 * log(3).  The empty dict is the exact zero.

LogPoly = dict[tuple[int, ...], int]


@lru_cache(maxsize=None)
def _compositions(r: int, k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Exponent vectors e (len k, sum r) with multinomial coefficients r!/prod e_i!."""
    out: list[tuple[int, ...]] = []

    def rec(i: int, rem: int, cur: tuple[int, ...]):
        if i == k - 1:
            out.append(cur + (rem,))
            return
        for e in range(rem + 1):
            rec(i + 1, rem - e, cur + (e,))

    rec(0, r, ())
    res = []
    rf = math.factorial(r)
    for e in out:
        m = rf
        for ei in e:
            m //= math.factorial(ei)
        res.append((e, m))
    return tuple(res)


def log_power_poly(factorization: Sequence[tuple[int, int]], r: int) -> LogPoly:
    """(log n)^r = (sum_i e_i log p_i)^r expanded into log-prime monomials."""
    if r == 0:
        return {(): 1}
    primes = [p for p, _ in factorization]
    exps = [e for _, e in factorization]
    if not primes:
        return {}
    acc: LogPoly = {}
    for evec, mult in _compositions(r, len(primes)):
        c = mult
        for base, ei in zip(exps, evec):
            if ei:
                c *= base**ei
        if c:
            key = tuple(x for p, ei in zip(primes, evec) for x in (p,) * ei)
            acc[key] = acc.get(key, 0) + c
    return acc


def logpoly_add(acc: LogPoly, other: LogPoly, scale: int = 1) -> None:
    """In-place acc += scale * other, dropping cancelled monomials."""
    for key, c in other.items():
        v = acc.get(key, 0) + scale * c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)


def logpoly_eval(poly: LogPoly) -> float:
    total = 0.0
    for key, c in poly.items():
        m = float(c)
        for p in key:
            m *= math.log(p)
        total += m
    return total


@dataclass(frozen=True)
class LambdaValue:
    """Order-r von Mangoldt value: float approximation plus exact symbolic form.

    `exact` is empty exactly when the value is identically zero.
    """

    float: float
    exact: LogPoly


def lambda_r_exact(r: int, factorization: Sequence[tuple[int, int]]) -> LambdaValue:
    """Lambda_r(n) from the divisor sum, carried out in exact integer arithmetic.

    Only squarefree divisors d survive mu(d), so the sum runs over subsets of
    the prime support; each (log(n/d))^r term is expanded multinomially.  The
    structural vanishing for omega(n) > r emerges from genuine cancellation.
    """
    if r < 1:
        raise ValidationError("lambda_r_exact requires r >= 1")
    k = len(factorization)
    if k == 0:
        return LambdaValue(0.0, {})
    primes = [p for p, _ in factorization]
    exps = [e for _, e in factorization]
    comps = _compositions(r, k)
    acc: LogPoly = {}
    for bits in range(1 << k):
        mu = -1 if bin(bits).count("1") % 2 else 1
        cvec = [exps[i] - ((bits >> i) & 1) for i in range(k)]
        for evec, mult in comps:
            c = mult
            for base, ei in zip(cvec, evec):
                if ei:
                    c *= base**ei
            if c:
                key = tuple(x for p, ei in zip(primes, evec) for x in (p,) * ei)
                v = acc.get(key, 0) + mu * c
                if v:
                    acc[key] = v
                else:
                    acc.pop(key, None)
    return LambdaValue(logpoly_eval(acc), acc)


@lru_cache(maxsize=1 << 20)
def _lambda_float_cached(r: int, factorization: tuple[tuple[int, int], ...]) -> float:
    return lambda_r_exact(r, factorization).float


def lambda_r_table(r: int, upto: int, sieve: FactorSieve) -> np.ndarray:
    """Float table of Lambda_r(n) for 0 <= n <= upto via the support-aware recurrence."""
    if upto > sieve.limit:
        raise PrecisionError(
            f"lambda_r_table needs sieve limit >= {upto}", max_usable=sieve.limit
        )
    lam1 = _lambda1_table(upto, sieve)
    lam = lam1
    for _ in range(r - 1):
        lam = _lambda_step(lam, lam1, upto)
    return lam


def _lambda1_table(upto: int, sieve: FactorSieve) -> np.ndarray:
    lam = np.zeros(upto + 1, dtype=np.float64)
    for p in sieve.primes():
        p = int(p)
        if p > upto:
            break
        lp = math.log(p)
        pk = p
        while pk <= upto:
            lam[pk] = lp
            pk *= p
    return lam


def _lambda_step(lam: np.ndarray, lam1: np.ndarray, upto: int) -> np.ndarray:
    """Lambda_{r+1} = Lambda_r * log + Lambda_r (*) Lambda_1 (Dirichlet convolution).

    The convolution only runs over prime-power shifts e (the support of
    Lambda_1), so entries whose omega exceeds the new order stay exact zeros.
    """
    n = np.arange(upto + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logn = np.log(n)
    logn[0] = 0.0
    out = lam * logn
    pp = np.flatnonzero(lam1[2:] > 0.0) + 2
    for e in pp:
        e = int(e)
        m = upto // e
        out[e :: e] += lam1[e] * lam[1 : m + 1]
    return out


# ---------------------------------------------------------------------------
# Vaughan-type partition and dyadic decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VaughanParams:
    """Range parameters: small-l cap Q, small-divisor cap R, X = Q*R, order r."""

    Q: float
    R: float
    r: int

    def __post_init__(self):
        if self.Q <= 1 or self.R <= 1:
            raise ValidationError("VaughanParams requires Q > 1 and R > 1")
        if self.r < 1:
            raise ValidationError("VaughanParams requires r >= 1")

    @property
    def X(self) -> float:
        return self.Q * self.R

    @classmethod
    def from_X(cls, X: float, r: int) -> "VaughanParams":
        """Default split Q = X^{9/13}, R = X^{4/13}."""
        return cls(Q=X ** (9.0 / 13.0), R=X ** (4.0 / 13.0), r=r)


@dataclass(frozen=True)
class VaughanTerms:
    """The four sums with Lambda_r(n) = s1 - s2 + s3 + s4."""

    s1: float
    s2: float
    s3: float
    s4: float

    def reassembled(self) -> float:
        return self.s1 - self.s2 + self.s3 + self.s4


def _squarefree_divisors(
    factorization: Sequence[tuple[int, int]],
) -> list[tuple[int, int, tuple[int, ...]]]:
    """(d, mu(d), prime-subset) for every squarefree divisor d."""
    out = [(1, 1, ())]
    for p, _ in factorization:
        out += [(d * p, -mu, ps + (p,)) for d, mu, ps in out]
    return out


def _divisors_with_factorization(
    factorization: Sequence[tuple[int, int]],
) -> list[tuple[int, tuple[tuple[int, int], ...]]]:
    out: list[tuple[int, tuple[tuple[int, int], ...]]] = [(1, ())]
    for p, e in factorization:
        cur = []
        for d, fac in out:
            pk = 1
            for k in range(e + 1):
                cur.append((d * pk, fac + ((p, k),) if k else fac))
                pk *= p
        out = cur
    return out


def _cofactor(factorization, sub: Sequence[tuple[int, int]]):
    sub_map = dict(sub)
    out = []
    for p, e in factorization:
        rem = e - sub_map.get(p, 0)
        if rem:
            out.append((p, rem))
    return tuple(out)


def vaughan_terms(
    n: int, r: int, params: VaughanParams, sieve: FactorSieve
) -> VaughanTerms:
    """Evaluate the four sums of the partition at n (float path)."""
    if n == 1:
        return VaughanTerms(0.0, 0.0, 0.0, 0.0)
    fac = tuple(sieve.factorize(n))
    Q, R = params.Q, params.R
    s1 = 0.0
    for d, mu, _ in _squarefree_divisors(fac):
        if d <= R:
            s1 += mu * math.log(n / d) ** r
    s2 = s3 = s4 = 0.0
    for l, lfac in _divisors_with_factorization(fac):
        if len(lfac) > r:
            continue  # Lambda_r(l) = 0
        lam = _lambda_float_cached(r, lfac)
        if lam == 0.0:
            continue
        cof = _cofactor(fac, lfac)
        for m, mu, _ in _squarefree_divisors(cof):
            if l <= Q:
                s3 += mu * lam
                if m <= R:
                    s2 += mu * lam
            elif m > R:
                s4 += mu * lam
    return VaughanTerms(s1, s2, s3, s4)


def vaughan_terms_symbolic(
    n: int, r: int, params: VaughanParams, sieve: FactorSieve
) -> tuple[LogPoly, LogPoly, LogPoly, LogPoly]:
    """The four sums as exact log-monomial polynomials."""
    if n == 1:
        return {}, {}, {}, {}
    fac = tuple(sieve.factorize(n))
    Q, R = params.Q, params.R
    s1: LogPoly = {}
    for d, mu, sub in _squarefree_divisors(fac):
        if d <= R:
            quot = _cofactor(fac, [(p, 1) for p in sub])
            logpoly_add(s1, log_power_poly(quot, r), mu)
    s2: LogPoly = {}
    s3: LogPoly = {}
    s4: LogPoly = {}
    for l, lfac in _divisors_with_factorization(fac):
        if len(lfac) > r:
            continue
        lam = lambda_r_exact(r, lfac).exact
        if not lam:
            continue
        cof = _cofactor(fac, lfac)
        for m, mu, _ in _squarefree_divisors(cof):
            if l <= Q:
                logpoly_add(s3, lam, mu)
                if m <= R:
                    logpoly_add(s2, lam, mu)
            elif m > R:
                logpoly_add(s4, lam, mu)
    return s1, s2, s3, s4


def vaughan_two_term(
    n: int, r: int, params: VaughanParams, sieve: FactorSieve
) -> tuple[float, float]:
    """Two-term form valid for Q < n <= QR; recomputes S3, S4 to assert vanishing."""
    if not (params.Q < n <= params.X):
        raise ValidationError(
            f"two-term identity needs Q < n <= Q*R (n={n}, Q={params.Q:.6g}, QR={params.X:.6g})"
        )
    terms = vaughan_terms(n, r, params, sieve)
    tol = 1e-9 * max(1.0, math.log(n)) ** r
    if abs(terms.s3) > tol or abs(terms.s4) > tol:
        raise CertificationError(
            f"S3/S4 failed to vanish on the two-term range at n={n}: {terms}"
        )
    return terms.s1, terms.s2


@dataclass(frozen=True)
class DyadicDecomposition:
    """star_r = S1; blocks tile S2 over (L, 2L] x (M, 2M] with 2L <= Q, 2M <= R."""

    star_r: float
    blocks: dict[tuple[float, float], float]

    def reassembled(self) -> float:
        return self.star_r - sum(self.blocks.values())


def dyadic_levels(cap: float, cover_one: bool) -> list[float]:
    """Halving levels cap/2, cap/4, ... ; each block (level, 2*level].

    With cover_one=False the levels stop once they reach 1 from above
    (integers >= 2 are covered); with cover_one=True they continue until the
    lowest block contains 1.
    """
    levels = []
    v = cap / 2.0
    while True:
        levels.append(v)
        if (v < 1.0) if cover_one else (v <= 1.0):
            break
        v /= 2.0
    return levels


def dyadic_decomposition(
    n: int, r: int, params: VaughanParams, sieve: FactorSieve
) -> DyadicDecomposition:
    """Split S2 over dyadic blocks; Lambda_r(n) = star_r - sum(blocks) on (Q, QR]."""
    if not (params.Q < n <= params.X):
        raise ValidationError(
            f"dyadic decomposition needs Q < n <= Q*R (n={n}, Q={params.Q:.6g}, QR={params.X:.6g})"
        )
    fac = tuple(sieve.factorize(n))
    Q, R = params.Q, params.R
    s1 = 0.0
    for d, mu, _ in _squarefree_divisors(fac):
        if d <= R:
            s1 += mu * math.log(n / d) ** r
    l_levels = dyadic_levels(Q, cover_one=False)
    m_levels = dyadic_levels(R, cover_one=True)
    blocks: dict[tuple[float, float], float] = {
        (L, M): 0.0 for L in l_levels for M in m_levels
    }
    for l, lfac in _divisors_with_factorization(fac):
        if len(lfac) > r or l > Q or l < 2:
            continue
        lam = _lambda_float_cached(r, lfac)
        if lam == 0.0:
            continue
        L = next(lv for lv in l_levels if lv < l <= 2 * lv)
        cof = _cofactor(fac, lfac)
        for m, mu, _ in _squarefree_divisors(cof):
            if m > R:
                continue
            M = next(mv for mv in m_levels if mv < m <= 2 * mv)
            blocks[(L, M)] += mu * lam
    return DyadicDecomposition(s1, blocks)


# ---------------------------------------------------------------------------
# almost primes
# ---------------------------------------------------------------------------

def almost_prime_mask(
    upto: int, r: int, mode: AlmostPrimeMode, sieve: FactorSieve
) -> np.ndarray:
    """Boolean mask over [0, upto]: n >= 2 with omega(n) <= r (distinct mode)
    or Omega(n) <= r (with-multiplicity mode)."""
    if upto > sieve.limit:
        raise PrecisionError(
            f"almost primes need sieve limit >= {upto}", max_usable=sieve.limit
        )
    if mode == "distinct":
        counts = sieve.omega_table(upto)
    elif mode == "with-multiplicity":
        counts = sieve.bigomega_table(upto)
    else:
        raise ValidationError(f"unknown almost-prime mode: {mode!r}")
    mask = counts <= r
    mask[:2] = False
    return mask


def almost_primes(
    upto: int, r: int, mode: AlmostPrimeMode, sieve: FactorSieve
) -> np.ndarray:
    """Ascending n <= upto with at most r prime factors; n = 1 excluded."""
    return np.flatnonzero(almost_prime_mask(upto, r, mode, sieve)).astype(np.int64)
