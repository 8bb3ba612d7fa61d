"""Constructors for the single- and two-mode states studied here.

Each constructor truncates its infinite Fock series at the smallest cutoff
whose certified tail mass is at most ``policy.tol``. Where the tail has an
analytic bound the cutoff is also pushed far enough that the discarded second
moment ``sum_{n>N} n^2 P_n`` is at most ``policy.tol``, so photon-number
moments up to second order are as accurate as the probabilities themselves.
The recorded ``tail_bound`` is always the discarded probability mass.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import CapacityExceeded, InvalidArgument
from .fock import (
    DENSE_MAX_DIM,
    DensityMatrix,
    NumberDistribution,
    PureFockState,
    TwoModePureState,
)
from .special import LogReal, hermite_sequence, log_factorials

__all__ = [
    "TruncationPolicy",
    "pstd",
    "coherent",
    "squeezed",
    "squeezed_vacuum_state",
    "thermal",
    "multimode_max_coherent",
    "tmsv",
    "tmsv_through_bs",
    "two_mode_coherent",
    "beam_splitter_50_50",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TruncationPolicy:
    tol: float = 1e-12
    max_cutoff: int = 10**6

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgument(f"tol must be positive, got {self.tol}")
        if self.max_cutoff < 1:
            raise InvalidArgument(f"max_cutoff must be >= 1, got {self.max_cutoff}")

    def check(self, cutoff: int) -> int:
        if cutoff > self.max_cutoff:
            raise CapacityExceeded(
                f"cutoff {cutoff} exceeds max_cutoff {self.max_cutoff}"
            )
        return cutoff


DEFAULT_POLICY = TruncationPolicy()


def _geometric_moment_tail(log_q, q, m):
    """ln of sum_{n>=m} n^2 (1-q) q^n."""
    inner = m * m + 2.0 * m * q / (1.0 - q) + q * (1.0 + q) / (1.0 - q) ** 2
    return m * log_q + math.log(inner)


def _geometric_cutoff(q, policy):
    """Smallest N whose geometric tail mass and second-moment tail are <= tol.

    Returns N and the tail mass q**(N+1).
    """
    if q == 0:
        return 0, 0.0
    log_q = math.log(q)
    log_tol = math.log(policy.tol)
    n = max(0, math.ceil(log_tol / log_q) - 1)
    while n > 0 and n * log_q <= log_tol:
        n -= 1
    while (n + 1) * log_q > log_tol:
        n += 1
    # the moment tail dominates the mass tail, so only ever walk upwards
    step = 1
    while _geometric_moment_tail(log_q, q, n + 1) > log_tol:
        n += step
        step *= 2
        policy.check(n)
    while step > 1:
        step //= 2
        if n - step >= 0 and _geometric_moment_tail(log_q, q, n - step + 1) <= log_tol:
            n -= step
    policy.check(n)
    return n, math.exp((n + 1) * log_q)


def _geometric_log_weights(nbar, cutoff):
    """ln of nbar^n / (nbar+1)^(n+1) for n = 0..cutoff."""
    n = np.arange(cutoff + 1, dtype=float)
    if nbar == 0:
        out = np.full(cutoff + 1, -np.inf)
        out[0] = 0.0
        return out
    return n * math.log(nbar / (nbar + 1.0)) - math.log1p(nbar)


def pstd(nbar: float, phase: float = 0.0, policy: TruncationPolicy = DEFAULT_POLICY,
         cutoff: int | None = None) -> PureFockState:
    """Pure state with a thermal (geometric) number distribution.

    Amplitudes are ``nbar^(n/2) / (nbar+1)^((n+1)/2) * exp(i n phase)``. An
    explicit ``cutoff`` overrides the tolerance rule; the recorded tail bound is
    then the exact discarded mass, which may exceed ``policy.tol``.
    """
    if nbar < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar}")
    q = nbar / (nbar + 1.0)
    if cutoff is None:
        cutoff, tail = _geometric_cutoff(q, policy)
    else:
        tail = q ** (cutoff + 1)
    log_w = _geometric_log_weights(nbar, cutoff)
    n = np.arange(cutoff + 1)
    amps = np.exp(0.5 * log_w) * np.exp(1j * phase * n)
    return PureFockState(amps, tail_bound=tail)


def _poisson_log_probs(nbar, cutoff):
    n = np.arange(cutoff + 1, dtype=float)
    if nbar == 0:
        out = np.full(cutoff + 1, -np.inf)
        out[0] = 0.0
        return out
    return -nbar + n * math.log(nbar) - log_factorials(cutoff)


def _poisson_cutoff(nbar, tol, policy):
    """Smallest N whose ratio-test tail bounds are <= tol.

    For n >= N + 1 > nbar the ratio P_{n+1}/P_n = nbar/(n+1) is at most
    nbar/(N+2), so the tail mass is dominated by P_{N+1} / (1 - nbar/(N+2)).
    Likewise (n+1)^2 P_{n+1} / (n^2 P_n) = nbar (n+1)/n^2 is at most
    rho = nbar (N+2)/(N+1)^2, bounding the second-moment tail by
    (N+1)^2 P_{N+1} / (1 - rho).
    """
    if nbar == 0:
        return 0, 0.0
    log_tol = math.log(tol)
    lo = max(0, math.floor(nbar) - 1)
    span = 64
    while True:
        hi = lo + span
        cand = np.arange(lo, hi)
        lp = _poisson_log_probs(nbar, hi)[cand + 1]
        log_bound = lp - np.log1p(-nbar / (cand + 2.0))
        rho = nbar * (cand + 2.0) / (cand + 1.0) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            log_moment = lp + 2.0 * np.log(cand + 1.0) - np.log1p(-np.minimum(rho, 1.0))
        ok = (rho < 1.0) & (log_bound <= log_tol) & (log_moment <= log_tol)
        hit = np.nonzero(ok)[0]
        if hit.size:
            n = int(cand[hit[0]])
            policy.check(n)
            return n, float(math.exp(log_bound[hit[0]]))
        if hi > policy.max_cutoff:
            raise CapacityExceeded(f"Poisson cutoff for nbar={nbar} exceeds max_cutoff")
        lo, span = hi, span * 2


def coherent(alpha: complex, policy: TruncationPolicy = DEFAULT_POLICY) -> PureFockState:
    """Coherent state ``|alpha>``; amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``."""
    alpha = complex(alpha)
    if not cmath.isfinite(alpha):
        raise InvalidArgument(f"alpha must be finite, got {alpha}")
    nbar = abs(alpha) ** 2
    cutoff, tail = _poisson_cutoff(nbar, policy.tol, policy)
    n = np.arange(cutoff + 1)
    amps = np.exp(0.5 * _poisson_log_probs(nbar, cutoff)) * np.exp(1j * cmath.phase(alpha) * n)
    return PureFockState(amps, tail_bound=tail)


def _squeezed_vacuum_log_probs(r, cutoff):
    """ln P_n for the squeezed vacuum, -inf on odd n."""
    out = np.full(cutoff + 1, -np.inf)
    m = np.arange(cutoff // 2 + 1)
    lf = log_factorials(cutoff)
    t = math.tanh(r)
    # ((2m-1)!!)^2 / (2m)! = (2m)! / (4^m m!^2)
    out[0::2] = (2 * m * math.log(t) + lf[2 * m] - 2 * m * math.log(2.0) - 2 * lf[m]
                 - math.log(math.cosh(r)))
    return out


def _squeezed_vacuum_cutoff(r, policy):
    """Smallest even N with tail mass and second-moment tail <= tol.

    P_{n+2}/P_n = tanh^2 r (n+1)/(n+2) <= tanh^2 r bounds the mass tail by
    P_N sinh^2 r. For n >= N+2 the ratio of successive n^2 P_n terms is at most
    rho = tanh^2 r (N+3)(N+4)/(N+2)^2, so the second-moment tail is at most
    (N+2)^2 P_{N+2} / (1 - rho).
    """
    log_tol = math.log(policy.tol)
    log_s2 = 2.0 * math.log(math.sinh(r))
    log_t2 = 2.0 * math.log(math.tanh(r))
    span = 128
    while True:
        lp = _squeezed_vacuum_log_probs(r, span)[0::2]
        n = 2.0 * np.arange(lp.size)
        rho = math.exp(log_t2) * (n + 3.0) * (n + 4.0) / (n + 2.0) ** 2
        lp_next = lp + log_t2 + np.log((n + 1.0) / (n + 2.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            log_moment = lp_next + 2.0 * np.log(n + 2.0) - np.log1p(-np.minimum(rho, 1.0))
        ok = (rho < 1.0) & (lp + log_s2 <= log_tol) & (log_moment <= log_tol)
        hit = np.nonzero(ok)[0]
        if hit.size:
            n = 2 * int(hit[0])
            policy.check(n)
            return n, float(math.exp(lp[hit[0]] + log_s2))
        if span > policy.max_cutoff:
            raise CapacityExceeded(f"squeezed vacuum cutoff for r={r} exceeds max_cutoff")
        span *= 2


def squeezed_vacuum_state(r: float, phi: float = 0.0,
                          policy: TruncationPolicy = DEFAULT_POLICY) -> PureFockState:
    """``S(xi)|0>`` with ``xi = r e^{i phi}`` and ``S(xi) = exp[(xi* a^2 - xi a^dag^2)/2]``."""
    if r < 0:
        raise InvalidArgument(f"squeezing must be >= 0, got {r}")
    if r == 0:
        return PureFockState(np.array([1.0 + 0j]))
    cutoff, tail = _squeezed_vacuum_cutoff(r, policy)
    amps = np.exp(0.5 * _squeezed_vacuum_log_probs(r, cutoff)).astype(complex)
    m = np.arange(cutoff // 2 + 1)
    amps[0::2] *= (-np.exp(1j * phi)) ** m
    return PureFockState(amps, tail_bound=tail)


def squeezed(alpha: complex, r: float, phi: float = 0.0,
             policy: TruncationPolicy = DEFAULT_POLICY) -> NumberDistribution:
    """Photon-number distribution of ``D(alpha) S(xi) |0>`` with ``xi = r e^{i phi}``.

    Uses the Hermite-polynomial closed form, evaluated in log space.
    """
    if r < 0:
        raise InvalidArgument(f"squeezing must be >= 0, got {r}")
    alpha = complex(alpha)
    if r == 0:
        state = coherent(alpha, policy)
        return NumberDistribution((state.amps.conj() * state.amps).real,
                                  tail_bound=state.tail_bound)
    if alpha == 0:
        cutoff, tail = _squeezed_vacuum_cutoff(r, policy)
        return NumberDistribution(np.exp(_squeezed_vacuum_log_probs(r, cutoff)), tail_bound=tail)
    return _displaced_squeezed(alpha, r, phi, policy)


def _displaced_squeezed(alpha, r, phi, policy):
    t = math.tanh(r)
    e = cmath.exp(1j * phi)
    x = (alpha + alpha.conjugate() * e * t) / cmath.sqrt(2.0 * e * t)
    prefactor = (-abs(alpha) ** 2
                 - 0.5 * t * (alpha.conjugate() ** 2 * e + alpha ** 2 / e).real
                 - math.log(math.cosh(r)))
    nbar = abs(alpha) ** 2 + math.sinh(r) ** 2
    span = max(64, int(4 * nbar) + 16)
    while True:
        policy.check(min(span, policy.max_cutoff))
        n = np.arange(span + 1)
        lf = log_factorials(span)
        log_h, _ = hermite_sequence(span, x)
        terms = (n * math.log(t), 2.0 * log_h, n * math.log(2.0), lf)
        log_p = prefactor + terms[0] + terms[1] - terms[2] - terms[3]
        probs = np.exp(log_p)
        # rounding in each ln P_n scales with the magnitudes summed into it
        scale = abs(prefactor) + sum(np.abs(np.where(np.isfinite(a), a, 0.0)) for a in terms)
        slack = 8 * _EPS * np.cumsum(probs * (1.0 + scale))
        tails = 1.0 - np.cumsum(probs) + slack
        hit = np.nonzero((tails <= policy.tol) & (n >= nbar))[0]
        if hit.size:
            cutoff = int(hit[0])
            probs = probs[: cutoff + 1]
            tail = max(1.0 - math.fsum(probs), 0.0) + float(slack[cutoff])
            return NumberDistribution(probs, tail_bound=tail)
        if span >= policy.max_cutoff:
            raise CapacityExceeded("displaced squeezed cutoff exceeds max_cutoff")
        span *= 2


def thermal(nbar: float, policy: TruncationPolicy = DEFAULT_POLICY,
            max_dim: int = DENSE_MAX_DIM) -> DensityMatrix:
    """Diagonal thermal state with entries ``nbar^n / (nbar+1)^(n+1)``."""
    if nbar < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar}")
    cutoff, tail = _geometric_cutoff(nbar / (nbar + 1.0), policy)
    if cutoff + 1 > max_dim:
        raise CapacityExceeded(f"thermal cutoff {cutoff} exceeds dense bound {max_dim}")
    diag = np.exp(_geometric_log_weights(nbar, cutoff))
    return DensityMatrix(np.diag(diag), max_dim=max_dim, tail_bound=tail)


def multimode_max_coherent(d: int, nbar_t: float,
                           policy: TruncationPolicy = DEFAULT_POLICY) -> NumberDistribution:
    """Maximal-coherence distribution on ``d`` modes at mean total photon number ``nbar_t``.

    Every basis state with total photon number ``n`` gets probability
    ``nbar_t^n / ((nbar_t+1)^(n+1) C(n+d-1, d-1))``; the degeneracy field holds
    ``C(n+d-1, d-1)``.
    """
    if d < 1:
        raise InvalidArgument(f"number of modes must be >= 1, got {d}")
    if nbar_t < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar_t}")
    cutoff, tail = _geometric_cutoff(nbar_t / (nbar_t + 1.0), policy)
    lf = log_factorials(cutoff + d - 1)
    n = np.arange(cutoff + 1)
    log_g = lf[n + d - 1] - lf[n] - lf[d - 1]
    probs = np.exp(_geometric_log_weights(nbar_t, cutoff) - log_g)
    # exact integers while they are representable
    degeneracy = np.where(log_g < 36.0, np.rint(np.exp(log_g)), np.exp(log_g))
    return NumberDistribution(probs, degeneracy=degeneracy, tail_bound=tail)


def tmsv(nbar_t: float, policy: TruncationPolicy = DEFAULT_POLICY) -> TwoModePureState:
    """Two-mode squeezed vacuum with mean total photon number ``nbar_t``."""
    if nbar_t < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar_t}")
    m = nbar_t / 2.0
    cutoff, tail = _geometric_cutoff(m / (m + 1.0), policy)
    amps = np.exp(0.5 * _geometric_log_weights(m, cutoff))
    return TwoModePureState({(n, n): a for n, a in enumerate(amps)}, tail_bound=tail)


def tmsv_through_bs(nbar_t: float, policy: TruncationPolicy = DEFAULT_POLICY) -> TwoModePureState:
    """TMSV after a 50:50 beam splitter, from the closed-form expansion.

    Layer ``n`` of the TMSV maps to
    ``sum_k (-1)^k C(n,k) sqrt((2n-2k)! (2k)!) / (2^n n!) |2n-2k, 2k>``.
    """
    if nbar_t < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar_t}")
    m = nbar_t / 2.0
    cutoff, tail = _geometric_cutoff(m / (m + 1.0), policy)
    log_layer = 0.5 * _geometric_log_weights(m, cutoff)
    lf = log_factorials(2 * cutoff)
    amps = {}
    for n in range(cutoff + 1):
        layer = LogReal(1, float(log_layer[n]))
        for k in range(n + 1):
            coeff = LogReal(
                (-1) ** k,
                lf[n] - lf[k] - lf[n - k]
                + 0.5 * (lf[2 * n - 2 * k] + lf[2 * k])
                - n * math.log(2.0) - lf[n],
            )
            amps[(2 * n - 2 * k, 2 * k)] = (layer * coeff).value
    return TwoModePureState(amps, tail_bound=tail)


def two_mode_coherent(alpha: complex, policy: TruncationPolicy = DEFAULT_POLICY) -> TwoModePureState:
    """Product state ``|alpha>|alpha>``.

    Each factor is truncated at ``tol / 2``; the discarded mass of the product
    is at most the sum of the two factor tails.
    """
    half = TruncationPolicy(policy.tol / 2.0, policy.max_cutoff)
    a = coherent(alpha, half)
    amps = {(i, j): ci * cj for i, ci in enumerate(a.amps) for j, cj in enumerate(a.amps)}
    t = a.tail_bound
    return TwoModePureState(amps, tail_bound=2 * t - t * t)


@lru_cache(maxsize=1024)
def _bs_block(total: int, convention: str) -> np.ndarray:
    """Beam-splitter unitary on the block of fixed total photon number.

    Basis vector ``j`` is ``|total - j, j>``.
    """
    j = np.arange(1, total + 1)
    hop = np.zeros((total + 1, total + 1))
    # a^dag b |total-j, j> = sqrt((total-j+1) j) |total-j+1, j-1>
    hop[j - 1, j] = np.sqrt((total - j + 1) * j)
    theta = math.pi / 4.0
    if convention == "real":
        gen = theta * (hop - hop.T)
    elif convention == "symmetric":
        gen = 1j * theta * (hop + hop.T)
    else:
        raise InvalidArgument(f"unknown beam-splitter convention {convention!r}")
    u = expm(gen)
    u.setflags(write=False)
    return u


def beam_splitter_50_50(state: TwoModePureState, convention: str = "real") -> TwoModePureState:
    """Apply a balanced beam splitter block by block in total photon number.

    ``"real"`` is ``exp[pi/4 (a^dag b - a b^dag)]``, the convention whose action
    on the TMSV reproduces the closed-form expansion used by
    :func:`tmsv_through_bs`. ``"symmetric"`` is ``exp[i pi/4 (a^dag b + a b^dag)]``;
    the two differ only by Fock-diagonal phases.
    """
    blocks: dict[int, np.ndarray] = {}
    for (n1, n2), amp in state.amps.items():
        total = n1 + n2
        if total not in blocks:
            blocks[total] = np.zeros(total + 1, dtype=complex)
        blocks[total][n2] = amp
    out = {}
    for total in sorted(blocks):
        vec = _bs_block(total, convention) @ blocks[total]
        for j, amp in enumerate(vec):
            out[(total - j, j)] = amp
    return TwoModePureState(out, tail_bound=state.tail_bound)
