"""Central values of quadratic twists of the discriminant L-function.

Setup.  With tau(n) the discriminant-form coefficients and chi_D the
Kronecker character of a fundamental discriminant D, the completed twisted
L-function

    Lambda_D(w) = (|D| / 2pi)^w Gamma(w) sum_n tau(n) chi_D(n) n^{-w}

satisfies Lambda_D(w) = eps_D Lambda_D(12 - w) with root number
eps_D = sign(D) (the weight-12 sign is +1 and chi_D(-1) = sign(D)).  Writing
lambda(n) = tau(n) / n^{11/2} the central value in the analytic
normalization is L(1/2) = L_D(6), and the usual contour argument yields the
smoothed approximate functional equation

    L(1/2) = (1 + eps_D) * sum_{n>=1} lambda(n) chi_D(n) n^{-1/2} V(n / X_D),

    X_D = |D| / (2pi),
    V(y) = (1/2pi i) int_(c) y^{-u} [Gamma(6+u)/Gamma(6)] G(u) du/u,

for any even test function G with G(0) = 1 that keeps the shifted contour
integrals convergent.  Two independent kernels are implemented:

  * G = 1: V is the normalized upper incomplete gamma Q(6, y)
    = e^{-y} sum_{j<=5} y^j / j!, evaluated in closed form (the adaptive
    Gauss-Legendre quadrature of the defining integral is kept alongside as
    a cross-check at 1e-12);
  * G(u) = exp(u^2 / 4): evaluated by Gauss-Legendre quadrature along the
    vertical contour Re u = 1.5, with precomputed complex node weights.

For eps_D = -1 the prefactor (1 + eps_D) kills the value: such D are
reported as forced zeros rather than summed.

Waldspurger proportionality ties |c(D)|^2 for fundamental D > 0 to these
central values; the scan reports a_f(D)^2 / L(1/2, D-twist), which is
constant over D (the proportionality constant involves Petersson norms and
is recorded, not asserted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.special import loggamma

from .errors import PrecisionError, ValidationError
from .forms import HalfIntegralForm
from .sieve import FactorSieve

ANALYTIC_WEIGHT = 12
_GAMMA_SHIFT = ANALYTIC_WEIGHT // 2  # Gamma(6 + u) at the central point

KernelName = Literal["incomplete-gamma", "gaussian"]

# documented heuristic: the series is summed to T >= TRUNCATION_FACTOR * |D|
TRUNCATION_FACTOR = 30


# ---------------------------------------------------------------------------
# Kronecker characters and fundamental discriminants
# ---------------------------------------------------------------------------

def kronecker_chi(D: int, n: int) -> int:
    """Kronecker symbol (D | n) for n >= 0; completely multiplicative in n."""
    if n < 0:
        raise ValidationError("kronecker_chi expects n >= 0")
    if n == 0:
        return 1 if D in (1, -1) else 0
    a = D
    res = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            res = -res
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                res = -res
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            res = -res
        a %= n
    return res if n == 1 else 0


def chi_values(D: int, upto: int) -> np.ndarray:
    """chi_D(n) for 1 <= n <= upto, computed over one period and tiled."""
    period = abs(D) if D != 1 else 1
    one = np.array([kronecker_chi(D, k) for k in range(1, period + 1)], dtype=np.float64)
    reps = -(-upto // period)
    return np.tile(one, reps)[:upto]


def _is_squarefree(m: int) -> bool:
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        d += 1
    return True


def is_fundamental_discriminant(D: int) -> bool:
    """D = 1 counts as the trivial fundamental discriminant."""
    if D == 0:
        return False
    if D % 4 == 1:
        return _is_squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _is_squarefree(abs(m))
    return False


def fundamental_discriminants(limit: int) -> list[int]:
    """Positive fundamental discriminants <= limit, ascending (1 included)."""
    return [D for D in range(1, limit + 1) if is_fundamental_discriminant(D)]


def root_number(D: int) -> int:
    """Sign of the functional equation of the D-twist: +1 for D > 0, -1 for D < 0."""
    if D == 0:
        raise ValidationError("root_number needs a nonzero discriminant")
    return 1 if D > 0 else -1


# ---------------------------------------------------------------------------
# cutoff kernels
# ---------------------------------------------------------------------------

def incomplete_gamma_cutoff(y: np.ndarray | float) -> np.ndarray:
    """V(y) = Q(6, y) = e^{-y} (1 + y + y^2/2! + ... + y^5/5!)."""
    y = np.asarray(y, dtype=np.float64)
    s = np.ones_like(y)
    t = np.ones_like(y)
    for j in range(1, _GAMMA_SHIFT):
        t = t * y / j
        s = s + t
    return np.exp(-y) * s


def _gl_panels(lo: float, hi: float, panels: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    xs, ws = np.polynomial.legendre.leggauss(degree)
    nodes, weights = [], []
    edges = np.linspace(lo, hi, panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append((b - a) / 2 * xs + (b + a) / 2)
        weights.append((b - a) / 2 * ws)
    return np.concatenate(nodes), np.concatenate(weights)


def incomplete_gamma_by_quadrature(y: float, tol: float = 1e-12) -> float:
    """Q(6, y) by adaptive Gauss-Legendre on int_y^U t^5 e^{-t} dt / Gamma(6).

    The upper limit is pushed until the analytic tail bound drops below tol;
    panel count doubles until two refinements agree within tol.  Kept as the
    independent cross-check of the closed form.
    """
    gamma6 = math.factorial(_GAMMA_SHIFT - 1)
    # tail of int_U^inf t^5 e^{-t} dt is < 2 U^5 e^{-U} once U >= 10
    U = max(y + 12.0, 12.0)
    while 2.0 * U**5 * math.exp(-U) / gamma6 > tol:
        U += 4.0
    prev = None
    panels = 8
    while True:
        nodes, weights = _gl_panels(y, U, panels, 12)
        val = float(np.sum(weights * nodes**5 * np.exp(-nodes))) / gamma6
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
        panels *= 2
        if panels > 4096:
            return val


class GaussianCutoff:
    """V(y) for G(u) = exp(u^2/4), by quadrature along Re u = c.

    Node weights  w_j = gl_j * Gamma(6+u_j)/Gamma(6) * e^{u_j^2/4} / u_j / 2pi
    are precomputed; evaluation at a vector of y is one complex matrix
    product.  Decay of V is superpolynomial (saddle point near
    exp(-log(y)^2)), so series using this kernel are summed to a larger
    truncation than the incomplete-gamma kernel.
    """

    def __init__(self, contour: float = 1.5, t_max: float = 16.0, panels: int = 72, degree: int = 12):
        t, gl = _gl_panels(-t_max, t_max, panels, degree)
        u = contour + 1j * t
        lg = loggamma(_GAMMA_SHIFT + u) - loggamma(float(_GAMMA_SHIFT))
        self._u = u
        self._w = gl * np.exp(lg + u * u / 4.0) / u / (2.0 * math.pi)

    def __call__(self, y: np.ndarray | float) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        out = np.empty_like(y)
        block = 4096
        for lo in range(0, len(y), block):
            seg = y[lo : lo + block]
            E = np.exp(np.multiply.outer(-np.log(seg), self._u))
            out[lo : lo + block] = (E @ self._w).real
        return out


@lru_cache(maxsize=1)
def _default_gaussian_cutoff() -> GaussianCutoff:
    return GaussianCutoff()


# ---------------------------------------------------------------------------
# central values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistedLSpec:
    """Twist data: tau table, fundamental discriminant D (or 1), conductor D^2."""

    tau: tuple[int, ...] | np.ndarray
    D: int

    def __post_init__(self):
        if not is_fundamental_discriminant(self.D):
            raise ValidationError(f"D={self.D} is not a fundamental discriminant")

    @property
    def analytic_weight(self) -> int:
        return ANALYTIC_WEIGHT

    @property
    def conductor(self) -> int:
        return self.D * self.D


@dataclass(frozen=True)
class CentralValue:
    value: float
    truncation: int
    error_estimate: float
    forced_zero: bool = False


def _coefficient_sum(
    tau: np.ndarray, D: int, T: int, cutoff, x_d: float
) -> tuple[float, float]:
    """(sum to T, sum to T//2) of lambda(n) chi_D(n) n^{-1/2} V(n / X_D)."""
    n = np.arange(1, T + 1, dtype=np.float64)
    lam = tau[1 : T + 1] / n**5.5
    chi = chi_values(D, T)
    terms = lam * chi / np.sqrt(n) * cutoff(n / x_d)
    half = float(np.sum(terms[: T // 2]))
    return float(np.sum(terms)), half


def central_value(
    spec: TwistedLSpec,
    truncation: int | None = None,
    kernel: KernelName = "incomplete-gamma",
) -> CentralValue:
    """L(1/2) of the D-twist via the smoothed approximate functional equation.

    Twists with root number -1 vanish by the functional equation and are
    reported as forced zeros.  The error estimate combines the last
    truncation-doubling increment with a fixed quadrature margin.
    """
    D = spec.D
    eps = root_number(D)
    tau = np.asarray(spec.tau, dtype=np.float64)
    if truncation is None:
        truncation = TRUNCATION_FACTOR * abs(D)
    if eps == -1:
        return CentralValue(0.0, truncation, 0.0, forced_zero=True)
    if kernel == "incomplete-gamma":
        cutoff = incomplete_gamma_cutoff
        needed = truncation
    elif kernel == "gaussian":
        cutoff = _default_gaussian_cutoff()
        # superpolynomial (not exponential) cutoff decay: sum further out
        needed = max(truncation, 64 * abs(D))
    else:
        raise ValidationError(f"unknown kernel {kernel!r}")
    if needed < TRUNCATION_FACTOR * abs(D):
        raise PrecisionError(
            f"truncation {needed} below the supported floor "
            f"{TRUNCATION_FACTOR}*|D| = {TRUNCATION_FACTOR * abs(D)}",
            max_usable=needed // TRUNCATION_FACTOR,
        )
    if len(tau) <= needed:
        raise PrecisionError(
            f"tau table has {len(tau)} entries; kernel {kernel!r} at |D|={abs(D)} "
            f"needs {needed + 1}",
            max_usable=(len(tau) - 1) // (64 if kernel == "gaussian" else TRUNCATION_FACTOR),
        )
    x_d = abs(D) / (2.0 * math.pi)
    total, half = _coefficient_sum(tau, D, needed, cutoff, x_d)
    value = 2.0 * total
    err = 2.0 * abs(total - half) + 1e-10
    return CentralValue(value, needed, err)


# ---------------------------------------------------------------------------
# Waldspurger scan and Siegel probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaldspurgerRow:
    D: int
    af_squared: float
    l_value: float
    error_estimate: float
    ratio: float | None
    forced_zero: bool


@dataclass(frozen=True)
class WaldspurgerScan:
    rows: tuple[WaldspurgerRow, ...]
    min_ratio: float
    max_ratio: float
    l_cutoff: float

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio


def waldspurger_ratio_scan(
    form: HalfIntegralForm,
    d_max: int,
    tau: Sequence[int] | np.ndarray,
    l_cutoff: float = 0.01,
    kernel: KernelName = "incomplete-gamma",
) -> WaldspurgerScan:
    """Ratios a_f(D)^2 / L(1/2, D-twist) over positive fundamental D <= d_max.

    Ratio statistics cover rows with L >= l_cutoff; rows where both a_f(D)
    and the L-value vanish are excluded from statistics (0/0 guard).
    """
    if form.ell != 6:
        raise ValidationError("the ratio scan is calibrated for the ell = 6 instance")
    if d_max >= form.precision:
        raise PrecisionError(
            f"scan needs coefficients up to {d_max}; form precision is {form.precision}",
            max_usable=form.precision - 1,
        )
    tau_arr = np.asarray(tau, dtype=np.float64)
    rows: list[WaldspurgerRow] = []
    ratios: list[float] = []
    for D in fundamental_discriminants(d_max):
        spec = TwistedLSpec(tau_arr, D)
        cv = central_value(spec, kernel=kernel)
        af = form.normalized_coefficient(D)
        af2 = af * af
        ratio = None
        if cv.value >= l_cutoff:
            ratio = af2 / cv.value
            ratios.append(ratio)
        rows.append(
            WaldspurgerRow(D, af2, cv.value, cv.error_estimate, ratio, cv.forced_zero)
        )
    if not ratios:
        raise ValidationError("no usable L-values above the cutoff")
    return WaldspurgerScan(tuple(rows), min(ratios), max(ratios), l_cutoff)


@dataclass(frozen=True)
class SiegelRow:
    p: int
    l_value: float
    error_estimate: float
    reference_curves: dict[float, float]
    above: dict[float, bool]


@dataclass(frozen=True)
class SiegelProbe:
    rows: tuple[SiegelRow, ...]
    epsilons: tuple[float, ...]
    min_nonzero: float | None

    def all_above(self, eps: float) -> bool:
        return all(row.above[eps] for row in self.rows if row.l_value > 0)


def siegel_probe(
    tau: Sequence[int] | np.ndarray,
    p_max: int,
    sieve: FactorSieve,
    epsilons: Sequence[float] = (0.05, 0.1, 0.2),
    zero_tol: float = 1e-8,
) -> SiegelProbe:
    """Observational table of L(1/2, p-twist) against p^{-eps} curves.

    Probes primes p == 1 (mod 4), which are themselves fundamental
    discriminants; zero values are excluded from the lower-bound comparison.
    """
    tau_arr = np.asarray(tau, dtype=np.float64)
    rows: list[SiegelRow] = []
    nonzero: list[float] = []
    for p in sieve.primes():
        p = int(p)
        if p > p_max:
            break
        if p % 4 != 1:
            continue
        cv = central_value(TwistedLSpec(tau_arr, p))
        refs = {eps: p ** (-eps) for eps in epsilons}
        if cv.value > zero_tol:
            nonzero.append(cv.value)
            above = {eps: cv.value > ref for eps, ref in refs.items()}
        else:
            above = {eps: True for eps in epsilons}  # vacuous for zero values
        rows.append(SiegelRow(p, cv.value, cv.error_estimate, refs, above))
    return SiegelProbe(tuple(rows), tuple(epsilons), min(nonzero) if nonzero else None)
