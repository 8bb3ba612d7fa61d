"""Coherence quantifiers and entropies in the Fock basis."""

from __future__ import annotations

import enum
import math
from typing import Union

import numpy as np
from scipy.special import xlogy

from .errors import InvalidArgument, InvalidState, UndefinedCorrelation
from .fock import (
    DensityMatrix,
    NumberDistribution,
    PureFockState,
    TwoModePureState,
    moment,
    number_distribution,
)
from .special import log_factorials

__all__ = [
    "LogBase",
    "shannon_entropy",
    "von_neumann_entropy",
    "rel_ent_coherence",
    "l1_coherence",
    "g2_zero",
    "max_rel_ent_coherence",
    "s_d_series",
    "max_rel_ent_coherence_multimode",
    "entropy_error_bar",
]


class LogBase(str, enum.Enum):
    NATURAL = "natural"
    TWO = "two"

    @property
    def scale(self) -> float:
        """Factor converting nats into this base."""
        return 1.0 if self is LogBase.NATURAL else 1.0 / math.log(2.0)


def _base(base) -> LogBase:
    try:
        return LogBase(base)
    except ValueError:
        raise InvalidArgument(f"log base must be 'natural' or 'two', got {base!r}") from None


AnyState = Union[PureFockState, DensityMatrix, TwoModePureState, NumberDistribution]


def shannon_entropy(dist: NumberDistribution, base="natural") -> float:
    """``-sum_n g_n P_n log P_n`` with ``0 log 0 = 0``."""
    probs = dist.probs
    terms = -xlogy(probs, probs)
    if dist.degeneracy is not None:
        terms = dist.degeneracy * terms
    return math.fsum(terms) * _base(base).scale


def von_neumann_entropy(rho: DensityMatrix, base="natural") -> float:
    evals = np.linalg.eigvalsh(rho.entries)
    if evals[0] < -1e-10:
        raise InvalidState(f"eigenvalue {evals[0]:.3e} below -1e-10")
    evals = np.clip(evals, 0.0, None)
    return math.fsum(-xlogy(evals, evals)) * _base(base).scale


def _is_diagonal(rho):
    off = rho.entries - np.diag(rho.entries.diagonal())
    return not np.any(off)


def rel_ent_coherence(state: AnyState, base="natural") -> float:
    """Relative entropy of coherence ``S(rho_diag) - S(rho)``.

    Pure states (and bare number distributions, taken to describe a pure state)
    reduce to the Shannon entropy of the number distribution.
    """
    if isinstance(state, DensityMatrix):
        if _is_diagonal(state):
            return 0.0
        diag = number_distribution(state)
        return shannon_entropy(diag, base) - von_neumann_entropy(state, base)
    return shannon_entropy(number_distribution(state), base)


def entropy_error_bar(tail_bound: float, base="natural") -> float:
    """Entropy uncertainty attributed to the truncated tail, ``t (1 + |ln t|)``."""
    if tail_bound <= 0:
        return 0.0
    return tail_bound * (1.0 + abs(math.log(tail_bound))) * _base(base).scale


def l1_coherence(state: AnyState) -> float:
    """Sum of absolute off-diagonal entries of the density matrix.

    Pure inputs use ``(sum_n sqrt(P_n))^2 - 1``; density matrices are summed
    entrywise with compensated summation.
    """
    if isinstance(state, DensityMatrix):
        mags = np.abs(state.entries)
        np.fill_diagonal(mags, 0.0)
        return math.fsum(mags.ravel())
    dist = number_distribution(state)
    roots = np.sqrt(dist.probs)
    if dist.degeneracy is not None:
        roots = dist.degeneracy * roots
    return math.fsum(roots) ** 2 - 1.0


def g2_zero(state: Union[PureFockState, NumberDistribution]) -> float:
    """Normalized second-order correlation ``<a^dag^2 a^2> / <n>^2``."""
    if isinstance(state, PureFockState):
        n1 = moment(state, 1, 1).real
        n2 = moment(state, 2, 2).real
    else:
        n = np.arange(state.probs.size, dtype=float)
        n1 = float(np.sum(state.weights * n))
        n2 = float(np.sum(state.weights * n * (n - 1)))
    if n1 <= 0:
        raise UndefinedCorrelation("g2(0) is undefined for zero mean photon number")
    return n2 / n1**2


def max_rel_ent_coherence(nbar: float, base="natural") -> float:
    """``(nbar+1) log(nbar+1) - nbar log nbar``; zero at ``nbar = 0``."""
    if nbar < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar}")
    return float(xlogy(nbar + 1.0, nbar + 1.0) - xlogy(nbar, nbar)) * _base(base).scale


def _s_d_tail(d, nbar_t, cutoff):
    # log C(n+d-1, d-1) <= (d-1) log(n+d) and log(n+d) <= log(x) + (n+d-x)/x
    q = nbar_t / (nbar_t + 1.0)
    x = cutoff + 1.0 + d
    head = q ** (cutoff + 1) / (nbar_t + 1.0)
    return (d - 1) * head * (math.log(x) / (1.0 - q) + q / ((1.0 - q) ** 2 * x))


def s_d_series(d: int, nbar_t: float, tol: float = 1e-14) -> float:
    """``sum_n nbar^n/(nbar+1)^(n+1) ln C(n+d-1, d-1)``, in nats.

    Summed until a certified tail bound falls below ``tol``.
    """
    if d < 1:
        raise InvalidArgument(f"number of modes must be >= 1, got {d}")
    if nbar_t < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar_t}")
    if d == 1 or nbar_t == 0:
        return 0.0
    cutoff = 16
    while _s_d_tail(d, nbar_t, cutoff) > tol:
        cutoff *= 2
    lo = cutoff // 2
    while lo < cutoff:
        mid = (lo + cutoff) // 2
        if _s_d_tail(d, nbar_t, mid) > tol:
            lo = mid + 1
        else:
            cutoff = mid
    n = np.arange(cutoff + 1)
    lf = log_factorials(cutoff + d - 1)
    log_binom = lf[n + d - 1] - lf[n] - lf[d - 1]
    log_w = n * math.log(nbar_t / (nbar_t + 1.0)) - math.log1p(nbar_t)
    return math.fsum(np.exp(log_w) * log_binom)


def max_rel_ent_coherence_multimode(d: int, nbar_t: float, base="natural",
                                    tol: float = 1e-14) -> float:
    """Maximal relative entropy of coherence on ``d`` modes."""
    scale = _base(base).scale
    return max_rel_ent_coherence(nbar_t, base) + s_d_series(d, nbar_t, tol) * scale
