"""Construction and certification of the plus-space cusp eigenform.

For even l with a one-dimensional target space of level-1 cusp forms
(l in {6, 8, 10}), the weight-(l+1/2) cusp forms on Gamma0(4) supported on
n == 0, 1 (mod 4) form a one-dimensional space.  The concrete desk instance
is l = 6, weight 13/2, first coefficients

    c(1) = 1, c(4) = -56, c(5) = 120, c(8) = -240, c(9) = 9, ...

whose Shimura image is the discriminant form with coefficients tau(n).

The construction solves an exact rational linear system over the spanning
monomials theta^a F^b (a + 4b = 2l + 1): impose c(0) = 0 and c(n) = 0 for
n == 2, 3 (mod 4) below a constraint horizon, check the solution space is
one-dimensional, and scale the generator to integer coefficients of content
one with positive leading coefficient.

Certification is by Hecke operators: T(p^2) acts on the coefficients by

    b(n) = c(p^2 n) + chi(n) p^{l-1} c(n) + p^{2l-1} c(n / p^2)

with chi(n) the Legendre symbol ((-1)^l n | p) for odd p, and at p = 2 the
Kronecker symbol ((-1)^l n | 2) together with restriction to the plus-space
support (coefficients at n == 2, 3 mod 4 are dropped; the unrestricted
operator leaks outside the plus space).  For the certified form the
eigenvalue at every p equals tau(p) exactly, in integer arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CertificationError, PrecisionError, ValidationError
from .qseries import QSeries, discriminant_series, eisenstein_F, series_pow, theta_series

LEVEL = 4


def dim_level_one_cusp_forms(weight: int) -> int:
    """Dimension of level-1 cusp forms of the given even weight."""
    if weight % 2 or weight < 0:
        return 0
    if weight < 12:
        return 0
    d = weight // 12
    if weight % 12 == 2:
        return d - 1
    return d


class HalfIntegralForm:
    """Weight-(l+1/2) level-4 plus-space cusp form with exact coefficients.

    Coefficients c(n) are exact integers; the normalized coefficients are
    a_f(n) = c(n) / n^{(2l-1)/4}, real since all c(n) are real.
    """

    __slots__ = ("ell", "coeffs", "_normalized")

    def __init__(self, ell: int, coeffs: Sequence[int]):
        self.ell = ell
        self.coeffs = tuple(int(c) for c in coeffs)
        self._normalized: np.ndarray | None = None

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @property
    def weight(self) -> Fraction:
        return Fraction(2 * self.ell + 1, 2)

    @property
    def level(self) -> int:
        return LEVEL

    def __repr__(self) -> str:
        return f"HalfIntegralForm(ell={self.ell}, precision={self.precision})"

    def validate(self) -> None:
        if self.precision < 1 or self.coeffs[0] != 0:
            raise ValidationError("cusp condition c(0) = 0 violated")
        sign = 1 if self.ell % 2 == 0 else -1
        for n, c in enumerate(self.coeffs):
            if c and (sign * n) % 4 in (2, 3):
                raise ValidationError(
                    f"plus-space support violated at n={n} (c={c})"
                )

    def normalized_coefficient(self, n: int) -> float:
        """a_f(n) = c(n) * n^{-(2l-1)/4}; exact zero when c(n) = 0."""
        if not 1 <= n < self.precision:
            raise PrecisionError(
                f"n={n} outside coefficient range [1, {self.precision - 1}]",
                max_usable=self.precision - 1,
            )
        c = self.coeffs[n]
        if c == 0:
            return 0.0
        return c / n ** ((2 * self.ell - 1) / 4.0)

    def normalized_array(self) -> np.ndarray:
        """a_f(n) for n < precision as float64, index 0 set to 0."""
        if self._normalized is None:
            a = np.zeros(self.precision)
            n = np.arange(1, self.precision, dtype=np.float64)
            c = np.array([float(x) for x in self.coeffs[1:]])
            a[1:] = c / n ** ((2 * self.ell - 1) / 4.0)
            self._normalized = a
        return self._normalized

    def sign_array(self) -> np.ndarray:
        """Exact coefficient signs as int8."""
        return np.array([(c > 0) - (c < 0) for c in self.coeffs], dtype=np.int8)


def monomial_basis(ell: int) -> list[tuple[int, int]]:
    """All (a, b) with a, b >= 0 and a + 4b = 2*ell + 1, by decreasing a."""
    if ell < 2:
        raise ValidationError("monomial_basis requires ell >= 2")
    target = 2 * ell + 1
    return [(target - 4 * b, b) for b in range(target // 4 + 1)]


def _null_space_dimension_one(rows: list[list[Fraction]], ncols: int) -> list[int]:
    """Solve rows . x = 0 exactly; require nullity 1; return a primitive integer x."""
    mat = [row[:] for row in rows]
    nrows = len(mat)
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = mat[rank][col]
        mat[rank] = [x / inv for x in mat[rank]]
        for i in range(nrows):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[rank])]
        pivots.append(col)
        rank += 1
    nullity = ncols - rank
    if nullity != 1:
        raise CertificationError(
            f"plus-space solution has dimension {nullity}, expected 1 "
            "(wrong ell or insufficient constraint horizon)"
        )
    free = next(c for c in range(ncols) if c not in pivots)
    x = [Fraction(0)] * ncols
    x[free] = Fraction(1)
    for i, col in enumerate(pivots):
        x[col] = -mat[i][free]
    denom = 1
    for v in x:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    xi = [int(v * denom) for v in x]
    g = 0
    for v in xi:
        g = math.gcd(g, v)
    return [v // g for v in xi]


def build_plus_cusp_form(ell: int, precision: int) -> HalfIntegralForm:
    """Construct the unique normalized plus-space cusp form of weight ell + 1/2.

    Requires even ell with a one-dimensional level-1 target space; the
    linear solve is exact, the result has integer coefficients of content 1,
    and the first nonzero coefficient is positive.
    """
    if ell % 2 or ell < 2:
        raise ValidationError("build_plus_cusp_form requires even ell >= 2")
    if dim_level_one_cusp_forms(2 * ell) != 1:
        raise CertificationError(
            f"level-1 weight {2 * ell} cusp forms have dimension "
            f"{dim_level_one_cusp_forms(2 * ell)}, need 1"
        )
    if precision < 200:
        raise ValidationError("build_plus_cusp_form needs precision >= 200")
    monos = monomial_basis(ell)
    theta = theta_series(precision)
    F = eisenstein_F(precision)
    theta_pows: dict[int, QSeries] = {}
    F_pows: dict[int, QSeries] = {}
    series = []
    for a, b in monos:
        if a not in theta_pows:
            theta_pows[a] = series_pow(theta, a)
        if b not in F_pows:
            F_pows[b] = series_pow(F, b)
        series.append(theta_pows[a] * F_pows[b])
    horizon = 4 * len(monos) + 40
    constrained = [0] + [
        n for n in range(1, min(precision, horizon)) if n % 4 in (2, 3)
    ]
    rows = [[Fraction(s[n]) for s in series] for n in constrained]
    combo = _null_space_dimension_one(rows, len(monos))
    coeffs = [0] * precision
    for weight_j, s in zip(combo, series):
        if weight_j:
            for n, v in enumerate(s.coeffs):
                coeffs[n] += weight_j * v
    content = 0
    for v in coeffs:
        content = math.gcd(content, v)
    if content > 1:
        coeffs = [v // content for v in coeffs]
    lead = next((v for v in coeffs if v), 0)
    if lead == 0:
        raise CertificationError("solved form is identically zero")
    if lead < 0:
        coeffs = [-v for v in coeffs]
    form = HalfIntegralForm(ell, coeffs)
    form.validate()  # plus support must hold beyond the constrained horizon
    return form


# ---------------------------------------------------------------------------
# Hecke action and certification
# ---------------------------------------------------------------------------

def kronecker_mod2(a: int) -> int:
    """Kronecker symbol (a | 2): 0 for even a, +1 for a == +-1 (8), -1 for a == +-3 (8)."""
    a &= 7
    if a % 2 == 0:
        return 0
    return 1 if a in (1, 7) else -1


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def hecke_Tp2(form: HalfIntegralForm, p: int) -> QSeries:
    """Coefficients of T(p^2) f, computable for n < precision // p^2.

    At p = 2 the result is restricted to the plus-space support, which is the
    operator that acts on the plus space itself.
    """
    out_len = form.precision // (p * p)
    if out_len < 1:
        raise PrecisionError(
            f"T({p}^2) needs precision >= {p * p}; "
            f"form precision {form.precision} supports no output terms",
            max_usable=0,
        )
    ell = form.ell
    sign = 1 if ell % 2 == 0 else -1
    c = form.coeffs
    mid = p ** (ell - 1)
    upper = p ** (2 * ell - 1)
    psq = p * p
    out = []
    for n in range(out_len):
        v = c[psq * n]
        if n >= 1:
            chi = kronecker_mod2(sign * n) if p == 2 else legendre(sign * n, p)
            v += chi * mid * c[n]
        if n % psq == 0:
            v += upper * c[n // psq]
        if p == 2 and (sign * n) % 4 in (2, 3):
            v = 0  # plus-space restriction
        out.append(v)
    return QSeries(out)


@dataclass(frozen=True)
class ShimuraLiftOracle:
    """Table of discriminant-form coefficients tau(n), indexed by n."""

    tau: tuple[int, ...]

    @classmethod
    def build(cls, precision: int) -> "ShimuraLiftOracle":
        return cls(discriminant_series(precision).coeffs)

    @property
    def precision(self) -> int:
        return len(self.tau)

    def eigenvalue(self, p: int) -> int:
        if p >= len(self.tau):
            raise PrecisionError(
                f"tau table has {len(self.tau)} entries, need index {p}",
                max_usable=len(self.tau) - 1,
            )
        return self.tau[p]


@dataclass(frozen=True)
class EigenReport:
    ok: bool
    p: int
    eigenvalue: int
    checked_terms: int
    first_mismatch: int | None = None


def eigenvalue_check(
    form: HalfIntegralForm, p: int, oracle: ShimuraLiftOracle
) -> EigenReport:
    """True iff T(p^2) f = tau(p) f coefficientwise on the computable range."""
    image = hecke_Tp2(form, p)
    lam = oracle.eigenvalue(p)
    for n in range(1, image.precision):
        if image[n] != lam * form.coeffs[n]:
            return EigenReport(False, p, lam, image.precision - 1, first_mismatch=n)
    return EigenReport(True, p, lam, image.precision - 1)


def certify(
    form: HalfIntegralForm, oracle: ShimuraLiftOracle, primes: Sequence[int] = (2, 3, 5, 7)
) -> list[EigenReport]:
    """Run eigenvalue checks; raise if any fails."""
    reports = [eigenvalue_check(form, p, oracle) for p in primes]
    bad = [rep for rep in reports if not rep.ok]
    if bad:
        raise CertificationError(
            "Hecke certification failed: "
            + ", ".join(f"p={rep.p} first mismatch at n={rep.first_mismatch}" for rep in bad)
        )
    return reports


def normalized_coeff(form: HalfIntegralForm, n: int) -> float:
    return form.normalized_coefficient(n)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def save_form(form: HalfIntegralForm, path: str) -> None:
    """JSON document with coefficients as decimal strings, nonzero entries only."""
    doc = {
        "ell": form.ell,
        "weight": f"{2 * form.ell + 1}/2",
        "level": form.level,
        "precision": form.precision,
        "coeffs": [[n, str(c)] for n, c in enumerate(form.coeffs) if c],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_form(path: str) -> HalfIntegralForm:
    """Bit-exact inverse of save_form; validates schema and plus-space invariants."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed form file {path}: {exc}") from exc
    for key in ("ell", "weight", "level", "precision", "coeffs"):
        if key not in doc:
            raise ValidationError(f"form file missing field {key!r}")
    ell = int(doc["ell"])
    precision = int(doc["precision"])
    if doc["level"] != LEVEL:
        raise ValidationError(f"unsupported level {doc['level']}")
    if doc["weight"] != f"{2 * ell + 1}/2":
        raise ValidationError(f"weight {doc['weight']!r} inconsistent with ell={ell}")
    coeffs = [0] * precision
    for entry in doc["coeffs"]:
        if len(entry) != 2:
            raise ValidationError(f"bad coefficient entry {entry!r}")
        n, value = int(entry[0]), int(str(entry[1]))
        if not 0 <= n < precision:
            raise ValidationError(f"coefficient index {n} outside precision {precision}")
        coeffs[n] = value
    form = HalfIntegralForm(ell, coeffs)
    form.validate()
    return form
