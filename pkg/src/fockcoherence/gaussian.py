"""Quadrature covariance matrices and the Gaussian-purity diagnostic.

Conventions: hbar = 1, x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(sqrt(2) i), and
gamma = 2 * (symmetrized covariance of (x, p)), so the vacuum has gamma = I and
a Gaussian state is pure iff det gamma = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidState
from .fock import PureFockState, moment
from .special import polylog_neg_half

__all__ = [
    "CovarianceMatrix",
    "covariance_matrix",
    "pstd_covariance_closed_form",
    "det_gamma",
]


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.shape != (2, 2):
            raise InvalidState(f"covariance matrix must be 2x2, got {g.shape}")
        if abs(g[0, 1] - g[1, 0]) > 1e-10:
            raise InvalidState("covariance matrix is not symmetric")
        if _det(g) < 1.0 - 1e-8:
            raise InvalidState(f"det gamma = {_det(g)!r} violates the uncertainty bound")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)


def _det(g):
    return float(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])


def det_gamma(gamma: CovarianceMatrix) -> float:
    return _det(gamma.entries)


def covariance_matrix(state: PureFockState) -> CovarianceMatrix:
    """Covariance matrix from the moments <a>, <a^2> and <a^dag a>."""
    a = moment(state, 0, 1)
    a2 = moment(state, 0, 2)
    n = moment(state, 1, 1).real
    xx = n + 0.5 + a2.real - 2.0 * a.real**2
    pp = n + 0.5 - a2.real - 2.0 * a.imag**2
    xp = a2.imag - 2.0 * a.real * a.imag
    return CovarianceMatrix(2.0 * np.array([[xx, xp], [xp, pp]]))


def _sqrt_pair_series(q, tol):
    """sum_{n>=0} q^n sqrt((n+1)(n+2)), tail dominated by sum (n+2) q^n."""

    def tail(m):
        return q ** (m + 1) * ((m + 3) / (1.0 - q) + q / (1.0 - q) ** 2)

    m = 8
    while tail(m) > tol:
        m *= 2
    n = np.arange(m + 1, dtype=float)
    return math.fsum(np.exp(n * math.log(q)) * np.sqrt((n + 1.0) * (n + 2.0)))


def pstd_covariance_closed_form(nbar: float, tol: float = 1e-14) -> CovarianceMatrix:
    """Covariance matrix of the real-amplitude PSTD from its series closed forms.

    ``<a^2> = nbar/(nbar+1)^2 sum q^n sqrt((n+1)(n+2))`` and
    ``<a> = Li_{-1/2}(q) / sqrt(nbar (nbar+1))`` with ``q = nbar/(nbar+1)``.
    """
    if nbar < 0:
        raise InvalidArgument(f"mean photon number must be >= 0, got {nbar}")
    if nbar == 0:
        return CovarianceMatrix(np.eye(2))
    q = nbar / (nbar + 1.0)
    a2 = nbar / (nbar + 1.0) ** 2 * _sqrt_pair_series(q, tol * (nbar + 1.0) ** 2 / nbar)
    root = math.sqrt(nbar * (nbar + 1.0))
    a = polylog_neg_half(q, tol * root) / root
    return CovarianceMatrix(2.0 * np.diag([nbar + 0.5 + a2 - 2.0 * a * a, nbar + 0.5 - a2]))
