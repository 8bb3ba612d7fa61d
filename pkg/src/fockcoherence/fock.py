"""Truncated Fock-space state containers and photon-number statistics.

Every container records a ``tail_bound``: a certified upper bound on the
probability mass discarded when the infinite series was truncated. It is set
once by the constructor that built the state and only ever propagated here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import CapacityExceeded, InvalidState
from .special import log_factorials

__all__ = [
    "DENSE_MAX_DIM",
    "PureFockState",
    "NumberDistribution",
    "DensityMatrix",
    "TwoModePureState",
    "number_distribution",
    "moment",
    "mean_n",
    "second_moment",
    "densify",
    "mean_total_n",
]

DENSE_MAX_DIM = 256
_NORM_SLACK = 1e-12


def _check_norm(total, tail_bound, what):
    if not (1.0 - tail_bound - _NORM_SLACK <= total <= 1.0 + _NORM_SLACK):
        raise InvalidState(
            f"{what} has norm {total!r}, outside [1 - {tail_bound:g}, 1]"
        )


@dataclass(frozen=True)
class PureFockState:
    """Single-mode pure state ``sum_n amps[n] |n>`` truncated at ``cutoff``."""

    amps: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidState("amplitudes must be a non-empty 1-d sequence")
        if self.tail_bound < 0:
            raise InvalidState(f"negative tail bound {self.tail_bound}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        _check_norm(float(np.sum(_abs2(amps))), self.tail_bound, "PureFockState")

    @property
    def cutoff(self) -> int:
        return self.amps.size - 1


@dataclass(frozen=True)
class NumberDistribution:
    """Photon-number probabilities, optionally with per-level degeneracy.

    ``probs[n]`` is the probability of *one* basis state with ``n`` photons.
    For multi-mode distributions that depend only on the total photon number,
    ``degeneracy[n]`` counts how many basis states share that probability.
    ``support`` optionally labels the entries (e.g. occupation pairs for
    two-mode joint distributions); ``None`` means ``n = 0..len(probs)-1``.
    """

    probs: np.ndarray
    degeneracy: Optional[np.ndarray] = None
    tail_bound: float = 0.0
    support: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidState("probabilities must be a non-empty 1-d sequence")
        if np.any(probs < 0):
            raise InvalidState("negative probability")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.degeneracy is not None:
            deg = np.array(self.degeneracy, dtype=float)
            if deg.shape != probs.shape or np.any(deg < 1):
                raise InvalidState("degeneracy must be positive and match probs")
            deg.setflags(write=False)
            object.__setattr__(self, "degeneracy", deg)
        if self.support is not None and len(self.support) != probs.size:
            raise InvalidState("support labels must match probs")
        _check_norm(float(np.sum(self.weights)), self.tail_bound, "NumberDistribution")

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    @property
    def weights(self) -> np.ndarray:
        """Probability of each photon-number level, ``g_n * P_n``."""
        if self.degeneracy is None:
            return self.probs
        return self.degeneracy * self.probs


@dataclass(frozen=True)
class DensityMatrix:
    """Dense Hermitian density matrix in the number basis."""

    entries: np.ndarray
    max_dim: int = DENSE_MAX_DIM
    tail_bound: float = 0.0

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidState("density matrix must be square")
        if rho.shape[0] > self.max_dim:
            raise CapacityExceeded(
                f"dimension {rho.shape[0]} exceeds dense bound {self.max_dim}"
            )
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise InvalidState("density matrix is not Hermitian")
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > max(1e-10, self.tail_bound + _NORM_SLACK):
            raise InvalidState(f"trace {tr!r} is not 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise InvalidState("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return self.entries.diagonal().real


@dataclass(frozen=True)
class TwoModePureState:
    """Two-mode pure state as a sparse map ``(n1, n2) -> amplitude``."""

    amps: dict
    tail_bound: float = 0.0

    def __post_init__(self):
        amps = {(int(a), int(b)): complex(v) for (a, b), v in self.amps.items()}
        if not amps:
            raise InvalidState("two-mode state has no amplitudes")
        if min(min(k) for k in amps) < 0:
            raise InvalidState("negative occupation number")
        object.__setattr__(self, "amps", amps)
        total = float(np.sum(_abs2(np.fromiter(amps.values(), dtype=complex))))
        _check_norm(total, self.tail_bound, "TwoModePureState")

    @property
    def total_cutoff(self) -> int:
        return max(a + b for a, b in self.amps)

    def amplitude(self, n1: int, n2: int) -> complex:
        return self.amps.get((n1, n2), 0j)


def _abs2(amps):
    return (amps.conj() * amps).real


State = Union[PureFockState, DensityMatrix, TwoModePureState]


def number_distribution(state: State) -> NumberDistribution:
    """Photon-number distribution of a state.

    Two-mode states give the joint distribution over occupation pairs, in
    sorted pair order and labelled through ``support``.
    """
    if isinstance(state, PureFockState):
        return NumberDistribution(_abs2(state.amps), tail_bound=state.tail_bound)
    if isinstance(state, DensityMatrix):
        return NumberDistribution(np.clip(state.diagonal, 0.0, None), tail_bound=state.tail_bound)
    if isinstance(state, TwoModePureState):
        keys = tuple(sorted(state.amps))
        amps = np.array([state.amps[k] for k in keys])
        return NumberDistribution(_abs2(amps), tail_bound=state.tail_bound, support=keys)
    if isinstance(state, NumberDistribution):
        return state
    raise TypeError(f"unsupported state type {type(state).__name__}")


def moment(state: PureFockState, k: int, l: int) -> complex:
    """Normally ordered moment ``<psi| a^dag^k a^l |psi>`` of the truncated state."""
    if k < 0 or l < 0:
        raise ValueError("moment orders must be nonnegative")
    c = state.amps
    n_terms = c.size - max(k, l)
    if n_terms <= 0:
        return 0j
    lf = log_factorials(c.size - 1)
    n = np.arange(n_terms)
    log_w = 0.5 * (lf[n + k] - lf[n]) + 0.5 * (lf[n + l] - lf[n])
    terms = c[n + k].conj() * c[n + l] * np.exp(log_w)
    return complex(np.sum(terms))


def _levels(dist):
    if dist.support is not None and isinstance(dist.support[0], tuple):
        return np.array([sum(s) for s in dist.support], dtype=float)
    return np.arange(dist.probs.size, dtype=float)


def mean_n(dist: NumberDistribution) -> float:
    """Mean photon number; total photon number for multi-mode distributions."""
    return float(np.sum(dist.weights * _levels(dist)))


def second_moment(dist: NumberDistribution) -> float:
    n = _levels(dist)
    return float(np.sum(dist.weights * n * n))


def mean_total_n(state: TwoModePureState) -> float:
    return mean_n(number_distribution(state))


def densify(state: PureFockState, max_dim: int = DENSE_MAX_DIM) -> DensityMatrix:
    """Projector ``|psi><psi|`` as a dense matrix."""
    if state.amps.size > max_dim:
        raise CapacityExceeded(
            f"cutoff {state.cutoff} needs dimension {state.amps.size} > {max_dim}"
        )
    c = state.amps
    return DensityMatrix(np.outer(c, c.conj()), max_dim=max_dim, tail_bound=state.tail_bound)
