"""Desk-scale probes of the sign-change program for normalized coefficients.

The probes operate on a constructed plus-space form and a factor sieve:

  * partial sums  S(x) = sum_{n <= x, n almost prime} w(n) a_f(n) with
    optional principal-character (mod 4) weight and linear smoothing, and a
    log-log least-squares exponent fit of |S(x)|;
  * sign-change scans over almost primes and over primes, with per-interval
    flags for geometric intervals (x^{rho^t}, x^{rho^{t-1}}];
  * second moments  sum a_f(n)^2 over Y^delta < n < Y, ratio against
    Y / log Y;
  * a growth probe tracking running maxima of |a_f(n)| and the fitted
    exponent of the record sequence;
  * the smoothed weighted sum P(X) = sum b_n c(n) Lambda_r(n) with
    b_n = (1 - n/X) psi0(n), split into the truncated-divisor part, the
    dyadic-block parts, and the small-n remainder.

All summations run in ascending n with Kahan compensation, so results are
deterministic and independent of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import PrecisionError, UndefinedFitError, ValidationError
from .forms import HalfIntegralForm
from .sieve import (
    AlmostPrimeMode,
    FactorSieve,
    VaughanParams,
    almost_prime_mask,
    dyadic_decomposition,
    dyadic_levels,
    lambda_r_table,
)

Character = Literal["none", "dirichlet-mod-4"]
Smoothing = Literal["none", "linear"]

# Growth exponent below which the almost-prime sign-change argument goes
# through without any further coefficient hypothesis.
GROWTH_SUFFICIENCY_THRESHOLD = 1.0 / 156.0


@dataclass(frozen=True)
class SumSample:
    x: float
    value: float
    count: int


@dataclass(frozen=True)
class ExponentFit:
    theta_hat: float
    intercept: float
    residual: float
    points: tuple[tuple[float, float], ...]
    skipped_zero_samples: int = 0


@dataclass(frozen=True)
class GeometricInterval:
    lower: float
    upper: float
    has_change: bool
    qualifying_terms: int


@dataclass(frozen=True)
class SignChangeReport:
    total_changes: int
    change_positions: tuple[tuple[int, int], ...]
    intervals: tuple[GeometricInterval, ...]

    @property
    def interval_flags(self) -> tuple[bool, ...]:
        return tuple(iv.has_change for iv in self.intervals)

    @property
    def flagged_intervals(self) -> int:
        return sum(iv.has_change for iv in self.intervals)


@dataclass(frozen=True)
class SecondMoment:
    Y: float
    delta: float
    total: float
    ratio: float
    count: int


@dataclass(frozen=True)
class GrowthReport:
    records: tuple[tuple[int, float], ...]
    exponent: float
    envelope_constant: float
    below_sufficiency_threshold: bool


@dataclass(frozen=True)
class SmoothedP:
    value: float
    star_r_part: float
    block_parts: dict[tuple[float, float], float]
    remainder_small_n: float
    reassembly_rel_error: float


def _kahan_add(total: float, comp: float, term: float) -> tuple[float, float]:
    y = term - comp
    t = total + y
    return t, (t - total) - y


def _require_precision(form: HalfIntegralForm, x: float, what: str) -> None:
    if x >= form.precision:
        raise PrecisionError(
            f"{what} needs coefficients beyond precision {form.precision}; "
            f"max usable x is {form.precision - 1}",
            max_usable=form.precision - 1,
        )


# ---------------------------------------------------------------------------
# partial sums and exponent fit
# ---------------------------------------------------------------------------

def partial_sum_series(
    form: HalfIntegralForm,
    r: int,
    mode: AlmostPrimeMode,
    xs: Sequence[float],
    sieve: FactorSieve,
    character: Character = "none",
    smoothing: Smoothing = "none",
) -> list[SumSample]:
    """S(x) for each x, ascending n, Kahan-compensated.

    The weight is w(n) = psi0(n) for the principal character mod 4 (1 on odd
    n) when requested, times (1 - n/x) under linear smoothing.
    """
    if r < 1:
        raise ValidationError("partial sums require r >= 1")
    if not xs:
        return []
    xs_sorted = sorted(float(x) for x in xs)
    _require_precision(form, xs_sorted[-1], "partial sum")
    top = int(xs_sorted[-1])
    mask = almost_prime_mask(top, r, mode, sieve)
    if character == "dirichlet-mod-4":
        mask = mask.copy()
        mask[0::2] = False
    elif character != "none":
        raise ValidationError(f"unknown character option {character!r}")
    if smoothing not in ("none", "linear"):
        raise ValidationError(f"unknown smoothing option {smoothing!r}")
    a = form.normalized_array()
    qualifying = np.flatnonzero(mask)
    samples: list[SumSample] = []
    if smoothing == "linear":
        # the weight depends on x, so each sample is its own pass
        for x in xs_sorted:
            total = comp = 0.0
            count = 0
            for n in qualifying:
                if n > x:
                    break
                count += 1
                total, comp = _kahan_add(total, comp, a[n] * (1.0 - n / x))
            samples.append(SumSample(x, total, count))
        return samples
    total = comp = 0.0
    count = 0
    pos = 0
    for x in xs_sorted:
        while pos < len(qualifying) and qualifying[pos] <= x:
            n = qualifying[pos]
            count += 1
            total, comp = _kahan_add(total, comp, a[n])
            pos += 1
        samples.append(SumSample(x, total, count))
    return samples


def exponent_fit(samples: Sequence[SumSample]) -> ExponentFit:
    """Ordinary least squares on (log x, log |S(x)|); zero-S samples skipped."""
    points = [(math.log(s.x), math.log(abs(s.value))) for s in samples if s.value != 0.0]
    skipped = len(samples) - len(points)
    if len(points) < 2:
        raise UndefinedFitError(
            f"exponent fit needs >= 2 samples with S != 0, got {len(points)}"
        )
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    xbar = xs.mean()
    ybar = ys.mean()
    sxx = float(np.sum((xs - xbar) ** 2))
    if sxx == 0.0:
        raise UndefinedFitError("exponent fit needs at least two distinct x values")
    slope = float(np.sum((xs - xbar) * (ys - ybar)) / sxx)
    intercept = ybar - slope * xbar
    residual = float(np.sum((ys - slope * xs - intercept) ** 2))
    return ExponentFit(slope, intercept, residual, tuple(points), skipped)


# ---------------------------------------------------------------------------
# sign changes
# ---------------------------------------------------------------------------

def geometric_intervals(x: float, ratio: float = 0.9) -> list[tuple[float, float]]:
    """Intervals (x^{ratio^t}, x^{ratio^{t-1}}] for t = 1, 2, ... covering (1, x]."""
    if not 0.0 < ratio < 1.0:
        raise ValidationError("interval ratio must lie in (0, 1)")
    out = []
    upper_exp = 1.0
    while True:
        lower_exp = upper_exp * ratio
        out.append((x**lower_exp, x**upper_exp))
        if x**lower_exp < 2.0:
            break
        upper_exp = lower_exp
    return out


def _scan_sign_changes(
    positions: np.ndarray, signs: np.ndarray, x: float, ratio: float
) -> SignChangeReport:
    flips = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    pairs = tuple(
        (int(positions[i]), int(positions[i + 1])) for i in flips
    )
    intervals = []
    for lo, hi in geometric_intervals(x, ratio):
        inside = (positions > lo) & (positions <= hi)
        n_terms = int(np.count_nonzero(inside))
        has = bool(
            np.any(inside & (signs > 0)) and np.any(inside & (signs < 0))
        )
        intervals.append(GeometricInterval(lo, hi, has, n_terms))
    return SignChangeReport(len(pairs), pairs, tuple(intervals))


def sign_change_count(
    form: HalfIntegralForm,
    r: int,
    mode: AlmostPrimeMode,
    x: float,
    sieve: FactorSieve,
    interval_ratio: float = 0.9,
) -> SignChangeReport:
    """Adjacent-pair sign changes among almost primes with nonzero coefficient.

    Zero coefficients (including the structural plus-space zeros) are
    skipped, never counted as changes.  An interval is flagged when both
    signs occur among its qualifying terms, which is equivalent to an
    adjacent change pair lying entirely inside it.
    """
    _require_precision(form, x, "sign-change scan")
    mask = almost_prime_mask(int(x), r, mode, sieve)
    signs_all = form.sign_array()
    positions = np.flatnonzero(mask)
    signs = signs_all[positions]
    keep = signs != 0
    return _scan_sign_changes(positions[keep], signs[keep], float(x), interval_ratio)


def prime_sign_changes(
    form: HalfIntegralForm,
    x: float,
    sieve: FactorSieve,
    interval_ratio: float = 0.9,
) -> SignChangeReport:
    """Sign-change scan restricted to primes."""
    _require_precision(form, x, "prime sign-change scan")
    primes = sieve.primes()
    positions = primes[primes <= int(x)]
    signs = form.sign_array()[positions]
    keep = signs != 0
    return _scan_sign_changes(positions[keep], signs[keep], float(x), interval_ratio)


# ---------------------------------------------------------------------------
# second moment and growth
# ---------------------------------------------------------------------------

def second_moment(
    form: HalfIntegralForm,
    r: int,
    mode: AlmostPrimeMode,
    Y: float,
    delta: float,
    sieve: FactorSieve,
) -> SecondMoment:
    """sum of a_f(n)^2 over almost primes with Y^delta < n < Y, and its ratio
    against Y / log Y."""
    if not 0.0 < delta < 1.0:
        raise ValidationError("second moment requires 0 < delta < 1")
    _require_precision(form, Y, "second moment")
    lower = Y**delta
    mask = almost_prime_mask(int(math.ceil(Y)) - 1, r, mode, sieve)
    a = form.normalized_array()
    total = comp = 0.0
    count = 0
    for n in np.flatnonzero(mask):
        if n <= lower:
            continue
        if n >= Y:
            break
        count += 1
        total, comp = _kahan_add(total, comp, a[n] * a[n])
    ratio = total / (Y / math.log(Y))
    return SecondMoment(Y, delta, total, ratio, count)


def ramanujan_growth(form: HalfIntegralForm, x: float) -> GrowthReport:
    """Running maxima of |a_f(n)| for n <= x and the record-sequence exponent.

    The report flags whether the fitted exponent falls below the
    sufficiency threshold 1/156, and records the envelope constant
    C = max |a_f(n)| / n^{0.3}.
    """
    _require_precision(form, x, "growth probe")
    a = form.normalized_array()
    top = int(x)
    records: list[tuple[int, float]] = []
    best = 0.0
    env = 0.0
    for n in range(1, top + 1):
        v = abs(a[n])
        if v > best:
            best = v
            records.append((n, v))
        if v:
            env = max(env, v / n**0.3)
    if len(records) >= 2:
        xs = np.log([float(n) for n, _ in records])
        ys = np.log([v for _, v in records])
        xbar, ybar = xs.mean(), ys.mean()
        sxx = float(np.sum((xs - xbar) ** 2))
        slope = float(np.sum((xs - xbar) * (ys - ybar)) / sxx) if sxx else 0.0
    else:
        slope = 0.0
    return GrowthReport(
        tuple(records),
        slope,
        env,
        slope < GROWTH_SUFFICIENCY_THRESHOLD,
    )


# ---------------------------------------------------------------------------
# smoothed weighted sum with decomposition
# ---------------------------------------------------------------------------

def smoothed_P(
    form: HalfIntegralForm,
    r: int,
    X: float,
    sieve: FactorSieve,
    params: VaughanParams | None = None,
    reassembly_tol: float = 1e-6,
) -> SmoothedP:
    """P(X) = sum_{n <= X} (1 - n/X) psi0(n) c(n) Lambda_r(n) and its split.

    For n > Q the weight Lambda_r(n) is replaced by its exact two-term
    decomposition, dyadically blocked; the n <= Q range enters as an explicit
    remainder.  Reassembly must match the direct sum to reassembly_tol
    (relative), which exercises the whole decomposition end to end.
    """
    _require_precision(form, X, "smoothed sum")
    if params is None:
        params = VaughanParams.from_X(X, r)
    top = int(X)
    lam = lambda_r_table(r, top, sieve)
    c = form.coeffs
    Q = params.Q

    def weight(n: int) -> float:
        if n % 2 == 0:
            return 0.0
        return 1.0 - n / X

    direct = comp = 0.0
    remainder = rcomp = 0.0
    star = scomp = 0.0
    blocks: dict[tuple[float, float], float] = {
        (L, M): 0.0
        for L in dyadic_levels(params.Q, cover_one=False)
        for M in dyadic_levels(params.R, cover_one=True)
    }
    bcomp: dict[tuple[float, float], float] = {k: 0.0 for k in blocks}
    for n in range(1, top + 1):
        w = weight(n)
        if w == 0.0:
            continue
        fn = float(c[n])
        if fn == 0.0:
            continue
        term = w * fn
        direct, comp = _kahan_add(direct, comp, term * lam[n])
        if n <= Q:
            remainder, rcomp = _kahan_add(remainder, rcomp, term * lam[n])
        else:
            dec = dyadic_decomposition(n, r, params, sieve)
            star, scomp = _kahan_add(star, scomp, term * dec.star_r)
            for key, v in dec.blocks.items():
                if v:
                    blocks[key], bcomp[key] = _kahan_add(blocks[key], bcomp[key], term * v)
    reassembled = remainder + star - sum(blocks.values())
    scale = max(abs(direct), 1.0)
    rel = abs(reassembled - direct) / scale
    if rel > reassembly_tol:
        raise ValidationError(
            f"smoothed-sum decomposition failed to reassemble: "
            f"direct={direct!r}, split={reassembled!r}, rel={rel:.3e}"
        )
    return SmoothedP(direct, star, blocks, remainder, rel)
