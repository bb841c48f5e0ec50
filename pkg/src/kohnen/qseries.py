"""Dense formal power series in q with exact integer coefficients.

A QSeries of precision N stores the coefficients of q^0 .. q^{N-1} as
arbitrary-precision integers.  Every arithmetic result carries the minimum
of the operand precisions (truncated-product rule); callers must request
adequate precision up front.

Three multiplication paths, all exact:

  * schoolbook      O(N^2), the correctness reference,
  * sparse          O(N * nnz) when one operand has few nonzero terms
                    (theta has ~sqrt(N) nonzero terms),
  * Kronecker       pack coefficients into one big integer per operand and
                    let GMP multiply; signed digits are recovered with a
                    half-base offset.  This is the fast path that makes
                    precision >= 2*10^5 cheap.

Generators provided here:

  theta(z)  = 1 + 2 sum_{n>=1} q^{n^2}                (weight 1/2 on Gamma0(4))
  F(z)      = sum_{n odd} sigma_1(n) q^n              (weight 2 on Gamma0(4))
  eta products  q^{dm/24} prod_{n>=1} (1 - q^{dn})^m  (integral q-powers only)

theta^a F^b with a + 4b = 2l+1 spans the weight-(l+1/2) forms used by the
forms module; eta(z)^24 shifted by q gives the discriminant cusp form whose
coefficients are the tau values used as the Hecke oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2

from .errors import ValidationError

# Cost model switch points for the multiplication dispatcher.  Products
# cheaper than _SPARSE_BUDGET coefficient updates go through the sparse
# or schoolbook path; everything else is packed for GMP.
_SPARSE_BUDGET = 1_000_000
_SCHOOLBOOK_MAX = 64


class QSeries:
    """Immutable truncated power series with exact integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        self.coeffs = tuple(int(c) for c in coeffs)

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @classmethod
    def one(cls, precision: int) -> "QSeries":
        return cls([1] + [0] * (precision - 1))

    @classmethod
    def zero(cls, precision: int) -> "QSeries":
        return cls([0] * precision)

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def __eq__(self, other) -> bool:
        return isinstance(other, QSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:8])
        tail = ", ..." if self.precision > 8 else ""
        return f"QSeries(prec={self.precision}, [{head}{tail}])"

    def truncate(self, precision: int) -> "QSeries":
        if precision >= self.precision:
            return self
        return QSeries(self.coeffs[:precision])

    def nonzero_terms(self) -> list[tuple[int, int]]:
        return [(e, c) for e, c in enumerate(self.coeffs) if c]

    def __add__(self, other: "QSeries") -> "QSeries":
        n = min(self.precision, other.precision)
        return QSeries([a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])])

    def __sub__(self, other: "QSeries") -> "QSeries":
        n = min(self.precision, other.precision)
        return QSeries([a - b for a, b in zip(self.coeffs[:n], other.coeffs[:n])])

    def __neg__(self) -> "QSeries":
        return QSeries([-a for a in self.coeffs])

    def scale(self, k: int) -> "QSeries":
        return QSeries([k * a for a in self.coeffs])

    def __mul__(self, other: "QSeries") -> "QSeries":
        return series_mul(self, other)

    def __pow__(self, e: int) -> "QSeries":
        return series_pow(self, e)


# ---------------------------------------------------------------------------
# multiplication kernels
# ---------------------------------------------------------------------------

def _mul_schoolbook(a: Sequence[int], b: Sequence[int], n_out: int) -> list[int]:
    out = [0] * n_out
    for i, ai in enumerate(a[:n_out]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: n_out - i]):
            if bj:
                out[i + j] += ai * bj
    return out


def _mul_sparse(dense: Sequence[int], sparse: Sequence[int], n_out: int) -> list[int]:
    """Accumulate dense shifted by each nonzero exponent of the sparse operand."""
    out = [0] * n_out
    for e, c in enumerate(sparse[:n_out]):
        if c == 0:
            continue
        if c == 1:
            for i, d in enumerate(dense[: n_out - e]):
                if d:
                    out[e + i] += d
        else:
            for i, d in enumerate(dense[: n_out - e]):
                if d:
                    out[e + i] += c * d
    return out


def _pack_nonneg(values: Sequence[int], width_bytes: int) -> gmpy2.mpz:
    buf = bytearray(len(values) * width_bytes)
    for i, v in enumerate(values):
        if v:
            buf[i * width_bytes : i * width_bytes + (v.bit_length() + 7) // 8] = v.to_bytes(
                (v.bit_length() + 7) // 8, "little"
            )
    return gmpy2.mpz(int.from_bytes(bytes(buf), "little"))


def _mul_kronecker(a: Sequence[int], b: Sequence[int], n_out: int) -> list[int]:
    """Exact product via Kronecker substitution and GMP integer multiply.

    Coefficients are packed into base 2^bits slots sized so any convolution
    coefficient satisfies |c| < 2^{bits-1}; adding the half-base offset H to
    every slot of the product makes all digits nonnegative, so they can be
    split back out of the byte representation without carries.
    """
    a = list(a[:n_out])
    b = list(b[:n_out])
    max_a = max((abs(x) for x in a), default=0)
    max_b = max((abs(x) for x in b), default=0)
    if max_a == 0 or max_b == 0:
        return [0] * n_out
    bound = min(len(a), len(b)) * max_a * max_b
    bits = ((bound.bit_length() + 2 + 7) // 8) * 8
    width = bits // 8

    def pack_signed(vals: Sequence[int]) -> gmpy2.mpz:
        pos = _pack_nonneg([v if v > 0 else 0 for v in vals], width)
        neg = _pack_nonneg([-v if v < 0 else 0 for v in vals], width)
        return pos - neg

    prod = int(pack_signed(a) * pack_signed(b))
    n_slots = len(a) + len(b)
    half = 1 << (bits - 1)
    # sum_{i < n_slots} H * 2^{bits*i}, as an integer
    offset = ((1 << (bits * n_slots)) - 1) // ((1 << bits) - 1) * half
    shifted = prod + offset
    raw = shifted.to_bytes(n_slots * width + 8, "little")
    out = []
    for i in range(n_out):
        out.append(int.from_bytes(raw[i * width : (i + 1) * width], "little") - half)
    return out


def _count_nonzero(c: Sequence[int], cap: int) -> int:
    k = 0
    for v in c:
        if v:
            k += 1
            if k >= cap:
                break
    return k


def series_mul(a: QSeries, b: QSeries) -> QSeries:
    """Truncated product at the minimum of the operand precisions."""
    n_out = min(a.precision, b.precision)
    if n_out == 0:
        return QSeries.zero(0)
    if n_out <= _SCHOOLBOOK_MAX:
        return QSeries(_mul_schoolbook(a.coeffs, b.coeffs, n_out))
    nz_a = _count_nonzero(a.coeffs[:n_out], 1 + _SPARSE_BUDGET // n_out)
    nz_b = _count_nonzero(b.coeffs[:n_out], 1 + _SPARSE_BUDGET // n_out)
    if min(nz_a, nz_b) * n_out <= _SPARSE_BUDGET:
        if nz_a <= nz_b:
            return QSeries(_mul_sparse(b.coeffs, a.coeffs, n_out))
        return QSeries(_mul_sparse(a.coeffs, b.coeffs, n_out))
    return QSeries(_mul_kronecker(a.coeffs, b.coeffs, n_out))


def series_pow(a: QSeries, e: int) -> QSeries:
    """Binary powering; a^0 is the unit series at a's precision."""
    if e < 0:
        raise ValidationError("series_pow requires a nonnegative exponent")
    result = QSeries.one(a.precision)
    base = a
    while e:
        if e & 1:
            result = series_mul(result, base)
        e >>= 1
        if e:
            base = series_mul(base, base)
    return result


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def theta_series(precision: int) -> QSeries:
    """theta(z) = 1 + 2 q + 2 q^4 + 2 q^9 + ..."""
    if precision < 1:
        raise ValidationError("theta_series needs precision >= 1")
    c = [0] * precision
    c[0] = 1
    k = 1
    while k * k < precision:
        c[k * k] = 2
        k += 1
    return QSeries(c)


def eisenstein_F(precision: int) -> QSeries:
    """F(z) = sum_{n odd} sigma_1(n) q^n, the weight-2 generator on Gamma0(4)."""
    if precision < 1:
        raise ValidationError("eisenstein_F needs precision >= 1")
    c = [0] * precision
    for d in range(1, precision, 2):
        for n in range(d, precision, 2 * d):
            c[n] += d
    return QSeries(c)


@dataclass(frozen=True)
class EtaSpec:
    """eta(delta*z)^exponent; requires 24 | delta*exponent so the expansion
    has integral q-powers, with prefactor q^{delta*exponent/24}."""

    scale: int
    exponent: int

    def __post_init__(self):
        if self.scale < 1 or self.exponent < 1:
            raise ValidationError("EtaSpec requires positive scale and exponent")
        if (self.scale * self.exponent) % 24 != 0:
            raise ValidationError(
                f"eta({self.scale}z)^{self.exponent} has fractional q-powers: "
                f"24 does not divide {self.scale * self.exponent}"
            )

    @property
    def prefactor(self) -> int:
        return self.scale * self.exponent // 24


def _euler_product(precision: int) -> QSeries:
    """prod_{n>=1} (1 - q^n) expanded by the pentagonal-number recursion."""
    c = [0] * precision
    k = 0
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= precision and g2 >= precision:
            break
        s = 1 if k % 2 == 0 else -1
        if g1 < precision:
            c[g1] += s
        if k > 0 and g2 < precision:
            c[g2] += s
        k += 1
    return QSeries(c)


def eta_product(spec: EtaSpec, precision: int) -> QSeries:
    """q^{dm/24} * prod_{n>=1} (1 - q^{dn})^m truncated to `precision` terms."""
    if precision < 1:
        raise ValidationError("eta_product needs precision >= 1")
    shift = spec.prefactor
    inner = precision - shift
    if inner <= 0:
        return QSeries.zero(precision)
    # prod (1 - q^{dn})^m is prod (1 - x^n)^m under x = q^d
    terms_x = (inner - 1) // spec.scale + 1
    base = series_pow(_euler_product(terms_x), spec.exponent)
    out = [0] * precision
    for j, v in enumerate(base.coeffs):
        e = shift + j * spec.scale
        if e < precision:
            out[e] = v
    return QSeries(out)


def discriminant_series(precision: int) -> QSeries:
    """q prod (1-q^n)^24; its coefficients are the tau values."""
    return eta_product(EtaSpec(1, 24), precision)


def r2_lattice_count(n: int) -> int:
    """Number of representations n = a^2 + b^2 over integer pairs (a, b).

    Brute-force lattice enumeration; used as the independent oracle for
    theta^2.
    """
    if n == 0:
        return 1
    count = 0
    r = math.isqrt(n)
    for a in range(-r, r + 1):
        rem = n - a * a
        if rem < 0:
            continue
        b = math.isqrt(rem)
        if b * b == rem:
            count += 2 if b else 1
    return count
