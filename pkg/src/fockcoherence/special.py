"""Special functions evaluated in log space.

Factorials, binomials and Hermite polynomials grow super-exponentially in the
photon number, so every routine here returns logarithms (or a mantissa plus a
log scale) instead of raw values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, SeriesDivergence

__all__ = [
    "LogReal",
    "LogScaledComplex",
    "log_factorial",
    "log_factorials",
    "log_binomial",
    "log_double_factorial_odd",
    "hermite",
    "hermite_sequence",
    "polylog_neg_half",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# ln k! for k < _TABLE_SIZE by compensated running summation of ln k, so each
# entry is within about half an ulp of the exact value.
_TABLE_SIZE = 1 << 14


def _build_table(size):
    out = np.empty(size)
    total, comp = 0.0, 0.0
    out[0] = 0.0
    for k in range(1, size):
        term = math.log(k)
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        out[k] = total + comp
    return out


_LOG_FACT = _build_table(_TABLE_SIZE)
_LOG_FACT.setflags(write=False)


@dataclass(frozen=True)
class LogReal:
    """A signed real number stored as ``sign * exp(log_magnitude)``."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise InvalidArgument(f"sign must be -1, 0 or +1, got {self.sign}")

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __mul__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        sign = self.sign * other.sign
        if sign == 0:
            return LogReal(0, -math.inf)
        return LogReal(sign, self.log_magnitude + other.log_magnitude)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    @property
    def value(self) -> float:
        return float(self)


@dataclass(frozen=True)
class LogScaledComplex:
    """A complex number stored as ``phase * exp(log_abs)`` with ``|phase| = 1``.

    Zero is represented by ``log_abs = -inf`` and ``phase = 0``.
    """

    log_abs: float
    phase: complex

    @property
    def value(self) -> complex:
        if self.log_abs == -math.inf:
            return 0j
        return self.phase * math.exp(self.log_abs)

    def __complex__(self) -> complex:
        return self.value


def _stirling(n):
    n = np.asarray(n, dtype=float)
    inv = 1.0 / n
    inv2 = inv * inv
    corr = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    return (n + 0.5) * np.log(n) - n + _HALF_LOG_2PI + corr


def log_factorial(n: int) -> float:
    """Return ``ln(n!)``."""
    n = int(n)
    if n < 0:
        raise InvalidArgument(f"factorial of negative integer {n}")
    if n < _TABLE_SIZE:
        return float(_LOG_FACT[n])
    return float(_stirling(n))


def log_factorials(n_max: int) -> np.ndarray:
    """Return ``ln(k!)`` for ``k = 0..n_max`` as a read-only array."""
    n_max = int(n_max)
    if n_max < 0:
        raise InvalidArgument(f"n_max must be >= 0, got {n_max}")
    if n_max < _TABLE_SIZE:
        return _LOG_FACT[: n_max + 1]
    tail = _stirling(np.arange(_TABLE_SIZE, n_max + 1))
    out = np.concatenate([_LOG_FACT, tail])
    out.setflags(write=False)
    return out


def log_binomial(n: int, k: int) -> float:
    """Return ``ln C(n, k)``."""
    if k < 0 or k > n:
        raise InvalidArgument(f"binomial requires 0 <= k <= n, got n={n}, k={k}")
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)


def log_double_factorial_odd(n: int) -> float:
    """Return ``ln((n-1)!!)`` for even ``n`` with ``(-1)!! = 1``.

    Uses ``(2m-1)!! = (2m)! / (2^m m!)``.
    """
    if n < 0 or n % 2:
        raise InvalidArgument(f"expected a nonnegative even integer, got {n}")
    m = n // 2
    return log_factorial(n) - m * math.log(2.0) - log_factorial(m)


def hermite_sequence(n_max: int, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """Physicists' Hermite polynomials ``H_0(z) .. H_{n_max}(z)``.

    Returns ``(log_abs, phase)`` arrays with ``H_k = phase[k] * exp(log_abs[k])``.
    The three-term recurrence is run on a rescaled pair so nothing overflows.
    """
    if n_max < 0:
        raise InvalidArgument(f"n_max must be >= 0, got {n_max}")
    z = complex(z)
    log_abs = np.full(n_max + 1, -math.inf)
    phase = np.zeros(n_max + 1, dtype=complex)

    def store(k, h, scale):
        a = abs(h)
        if a > 0:
            log_abs[k] = math.log(a) + scale
            phase[k] = h / a

    h_prev, h_cur, scale = 0j, 1 + 0j, 0.0
    store(0, h_cur, scale)
    for k in range(n_max):
        h_prev, h_cur = h_cur, 2.0 * z * h_cur - 2.0 * k * h_prev
        store(k + 1, h_cur, scale)
        m = max(abs(h_prev), abs(h_cur))
        if m > 1e100 or 0 < m < 1e-100:
            h_prev /= m
            h_cur /= m
            scale += math.log(m)
    return log_abs, phase


def hermite(n: int, z: complex) -> LogScaledComplex:
    """Physicists' Hermite polynomial ``H_n(z)`` in log-scaled form."""
    log_abs, phase = hermite_sequence(n, z)
    return LogScaledComplex(float(log_abs[n]), complex(phase[n]))


def polylog_neg_half(q: float, tol: float = 1e-12) -> float:
    """``Li_{-1/2}(q) = sum_{n>=1} sqrt(n) q^n`` for ``0 <= q < 1``.

    The number of terms ``M`` is the smallest for which the tail bound
    ``sqrt(M+1) q^(M+1) / (1-q)^2`` drops below ``tol``.
    """
    if tol <= 0:
        raise InvalidArgument(f"tol must be positive, got {tol}")
    if q >= 1:
        raise SeriesDivergence(f"Li_(-1/2)(q) diverges for q >= 1, got q={q}")
    if q < 0:
        raise InvalidArgument(f"expected 0 <= q < 1, got {q}")
    if q == 0:
        return 0.0
    n_terms = _polylog_terms(q, tol)
    n = np.arange(1, n_terms + 1, dtype=float)
    return math.fsum(np.sqrt(n) * np.exp(n * math.log(q)))


def _polylog_terms(q, tol):
    log_q = math.log(q)
    log_target = math.log(tol) + 2.0 * math.log1p(-q)

    def log_bound(m):
        return 0.5 * math.log(m + 1) + (m + 1) * log_q

    m = max(1, int(log_target / log_q) - 1)
    while log_bound(m) > log_target:
        m += max(1, m // 64)
    while m > 1 and log_bound(m - 1) <= log_target:
        m -= 1
    return m

