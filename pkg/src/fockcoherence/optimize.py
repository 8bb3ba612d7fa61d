"""Constrained maximization of coherence objectives over photon-number distributions.

Three problems on the truncated support ``{0..cutoff}``:

* entropy under a mean-photon-number constraint (solution is geometric),
* ``sum_n sqrt(P_n)`` (the pure-state l1 coherence up to a monotone map) under
  the same constraint, whose optimum grows without bound as the cutoff grows,
* the same l1 objective with an extra second-moment constraint, which stays
  bounded.

All are concave objectives under linear constraints, so both are solved with a
damped Newton method on the low-dimensional convex dual.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, xlogy

from .errors import Infeasible, InvalidArgument, SolverFailure, UndefinedGradient
from .fock import NumberDistribution

__all__ = [
    "OptimizationReport",
    "maximize_entropy_mean_constraint",
    "maximize_entropy_primal",
    "maximize_l1_mean_constraint",
    "maximize_l1_two_moment_constraint",
    "l1_cutoff_sweep",
    "kkt_residual",
    "fit_multipliers",
]

MAX_ITER = 200


@dataclass
class OptimizationReport:
    distribution: NumberDistribution
    objective: float
    mean_error: float
    second_moment_error: Optional[float]
    kkt_residual: float
    cutoff: int
    iterations: int
    converged: bool
    multipliers: tuple = ()
    moment_orders: tuple = ()
    extras: dict = field(default_factory=dict)

    @property
    def constraint_residuals(self) -> tuple:
        return (self.mean_error, self.second_moment_error)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["distribution"] = self.distribution.probs.tolist()
        out["multipliers"] = list(self.multipliers)
        out["moment_orders"] = list(self.moment_orders)
        return out


def _check_problem(nbar, cutoff):
    if cutoff < 2:
        raise InvalidArgument(f"cutoff must be >= 2, got {cutoff}")
    if not 0 < nbar < cutoff:
        raise InvalidArgument(f"need 0 < nbar < cutoff, got nbar={nbar}, cutoff={cutoff}")


def _residuals(probs, nbar, m2=None):
    n = np.arange(probs.size, dtype=float)
    mean_err = abs(math.fsum(n * probs) - nbar)
    m2_err = None if m2 is None else abs(math.fsum(n * n * probs) - m2)
    return mean_err, m2_err


# -- entropy ---------------------------------------------------------------


def maximize_entropy_mean_constraint(nbar: float, cutoff: int, tol: float = 1e-12,
                                     max_iter: int = MAX_ITER) -> OptimizationReport:
    """Maximum Shannon entropy (nats) on ``{0..cutoff}`` at fixed mean.

    The maximizer is ``P_n = exp(-lam n) / Z``; ``lam`` minimizes the convex dual
    ``ln Z(lam) + lam nbar`` and is found by damped Newton.
    """
    _check_problem(nbar, cutoff)
    n = np.arange(cutoff + 1, dtype=float)

    def dual(lam):
        return logsumexp(-lam * n) + lam * nbar

    def stats(lam):
        logp = -lam * n - logsumexp(-lam * n)
        p = np.exp(logp)
        mean = float(p @ n)
        return logp, p, mean, float(p @ (n - mean) ** 2)

    lam = math.log1p(1.0 / nbar)
    for it in range(1, max_iter + 1):
        logp, p, mean, var = stats(lam)
        grad = nbar - mean
        if abs(grad) <= tol:
            break
        step = -grad / var
        t, f0 = 1.0, dual(lam)
        while dual(lam + t * step) > f0 + 1e-4 * t * grad * step and t > 1e-12:
            t *= 0.5
        lam += t * step
    else:
        raise SolverFailure("entropy dual Newton did not converge",
                            {"lam": lam, "mean_error": abs(grad), "iterations": max_iter})

    log_z = float(logsumexp(-lam * n))
    mean_err, _ = _residuals(p, nbar)
    # stationarity of -sum P ln P: ln P_n + lam n + ln Z = 0
    kkt = float(np.max(np.abs(logp + lam * n + log_z)))
    return OptimizationReport(
        distribution=NumberDistribution(p),
        objective=math.fsum(-xlogy(p, p)),
        mean_error=mean_err,
        second_moment_error=None,
        kkt_residual=kkt,
        cutoff=cutoff,
        iterations=it,
        converged=mean_err <= max(tol, 1e-15 * cutoff),
        multipliers=(lam, log_z),
        moment_orders=(1, 0),
    )


def maximize_entropy_primal(nbar: float, cutoff: int, tol: float = 1e-12) -> OptimizationReport:
    """Direct primal solve with SLSQP, independent of the dual structure.

    Only practical for small cutoffs; used to cross-check the dual solver.
    """
    _check_problem(nbar, cutoff)
    n = np.arange(cutoff + 1, dtype=float)
    cons = [
        {"type": "eq", "fun": lambda p: np.sum(p) - 1.0, "jac": lambda p: np.ones_like(p)},
        {"type": "eq", "fun": lambda p: p @ n - nbar, "jac": lambda p: n},
    ]

    def neg_entropy(p):
        p = np.clip(p, 0.0, None)
        return float(np.sum(xlogy(p, p)))

    def grad(p):
        return np.log(np.maximum(p, 1e-300)) + 1.0

    x0 = np.full(cutoff + 1, 1.0 / (cutoff + 1))
    with warnings.catch_warnings():
        # SLSQP clips trial points to the bounds and warns each time
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(neg_entropy, x0, jac=grad, constraints=cons, method="SLSQP",
                       bounds=[(0.0, 1.0)] * (cutoff + 1),
                       options={"ftol": tol, "maxiter": 1000})
    p = np.clip(res.x, 0.0, None)
    p /= p.sum()
    mean_err, _ = _residuals(p, nbar)
    return OptimizationReport(
        distribution=NumberDistribution(p),
        objective=math.fsum(-xlogy(p, p)),
        mean_error=mean_err,
        second_moment_error=None,
        kkt_residual=float("nan"),
        cutoff=cutoff,
        iterations=int(res.nit),
        converged=bool(res.success),
    )


# -- l1 --------------------------------------------------------------------


def _l1_dual_newton(features, targets, tol, max_iter):
    """Maximize sum sqrt(P) s.t. features @ P = targets via its convex dual.

    Dual: min_nu  nu.targets + sum_n 1/(4 u_n),  u = nu @ features > 0, with
    primal recovery P_n = 1/(4 u_n^2).
    """
    nu = np.zeros(features.shape[0])
    nu[0] = 1.0

    def dual(v):
        u = v @ features
        if np.any(u <= 0):
            return math.inf
        return float(v @ targets + np.sum(0.25 / u))

    for it in range(1, max_iter + 1):
        u = nu @ features
        p = 0.25 / u**2
        grad = targets - features @ p
        hess = (features * (0.5 / u**3)) @ features.T
        step = np.linalg.solve(hess, -grad)
        decrement = float(-grad @ step)
        if np.max(np.abs(grad)) <= tol and decrement <= tol * tol:
            break
        t, f0 = 1.0, dual(nu)
        while dual(nu + t * step) > f0 - 1e-4 * t * decrement:
            t *= 0.5
            if t < 1e-16:
                raise SolverFailure("l1 dual line search stalled",
                                    {"nu": nu.tolist(), "grad": grad.tolist(), "iterations": it})
        nu = nu + t * step
    else:
        raise SolverFailure("l1 dual Newton did not converge",
                            {"nu": nu.tolist(), "grad": grad.tolist(), "iterations": max_iter})
    u = nu @ features
    return 0.25 / u**2, nu, it


def _l1_report(probs, nbar, m2, nu, orders, cutoff, iterations, tol):
    roots = np.sqrt(probs)
    s = math.fsum(roots)
    # d/dP_n (sum sqrt P)^2 = s / sqrt(P_n) = 2 s u_n; unscale the features n/cutoff
    lams = tuple(-2.0 * s * float(v) / cutoff**o for v, o in zip(nu, orders))
    dist = NumberDistribution(probs)
    mean_err, m2_err = _residuals(probs, nbar, m2)
    norm_err = abs(math.fsum(probs) - 1.0)
    errs = [norm_err, mean_err] + ([] if m2 is None else [m2_err / max(1.0, m2)])
    return OptimizationReport(
        distribution=dist,
        objective=s * s - 1.0,
        mean_error=mean_err,
        second_moment_error=m2_err,
        kkt_residual=kkt_residual(dist, lams, orders),
        cutoff=cutoff,
        iterations=iterations,
        converged=max(errs) <= tol,
        multipliers=lams,
        moment_orders=orders,
        extras={"sum_sqrt": s, "normalization_error": norm_err},
    )


def maximize_l1_mean_constraint(nbar: float, cutoff: int, tol: float = 1e-10,
                                max_iter: int = MAX_ITER) -> OptimizationReport:
    """Maximize ``(sum sqrt P_n)^2 - 1`` on ``{0..cutoff}`` at fixed mean.

    The maximizer has the form ``P_n = 1 / (4 (nu_0 + nu_1 n)^2)``.
    """
    _check_problem(nbar, cutoff)
    s = np.arange(cutoff + 1, dtype=float) / cutoff
    features = np.vstack([np.ones_like(s), s])
    targets = np.array([1.0, nbar / cutoff])
    probs, nu, it = _l1_dual_newton(features, targets, tol * 1e-3, max_iter)
    return _l1_report(probs, nbar, None, nu, (0, 1), cutoff, it, tol)


def _two_point(nbar, lo, hi, cutoff, m2):
    probs = np.zeros(cutoff + 1)
    if lo == hi:
        probs[lo] = 1.0
    else:
        w = (nbar - lo) / (hi - lo)
        probs[lo], probs[hi] = 1.0 - w, w
    dist = NumberDistribution(probs)
    support = np.nonzero(probs)[0]
    sub = NumberDistribution(probs[support], support=tuple(int(k) for k in support))
    orders = (0, 1, 2)[: support.size]
    lams = fit_multipliers(sub, orders)
    mean_err, m2_err = _residuals(probs, nbar, m2)
    s = math.fsum(np.sqrt(probs))
    return OptimizationReport(
        distribution=dist, objective=s * s - 1.0, mean_error=mean_err,
        second_moment_error=m2_err, kkt_residual=kkt_residual(sub, lams, orders),
        cutoff=cutoff, iterations=0, converged=True, multipliers=tuple(lams),
        moment_orders=orders, extras={"degenerate": True, "sum_sqrt": s},
    )


def maximize_l1_two_moment_constraint(nbar: float, m2: float, cutoff: int, tol: float = 1e-10,
                                      max_iter: int = MAX_ITER,
                                      check_stability: bool = False) -> OptimizationReport:
    """Maximize ``(sum sqrt P_n)^2 - 1`` with fixed mean and second moment.

    Boundary cases where the feasible set is a single point (zero or extremal
    variance) return that point directly. With ``check_stability`` the problem
    is re-solved at twice the cutoff and the change in objective is stored in
    ``extras["cutoff_stability"]``.
    """
    _check_problem(nbar, cutoff)
    lo = math.floor(nbar)
    frac = nbar - lo
    m2_min = nbar * nbar + frac * (1.0 - frac)
    m2_max = nbar * cutoff
    slack = 1e-12 * max(1.0, m2)
    if m2 < m2_min - slack or m2 > m2_max + slack:
        raise Infeasible(
            f"second moment {m2} outside feasible range [{m2_min}, {m2_max}] "
            f"for mean {nbar} on {{0..{cutoff}}}"
        )
    if m2 <= m2_min + slack:
        return _two_point(nbar, lo, lo + (frac > 0), cutoff, m2)
    if m2 >= m2_max - slack:
        return _two_point(nbar, 0, cutoff, cutoff, m2)

    s = np.arange(cutoff + 1, dtype=float) / cutoff
    features = np.vstack([np.ones_like(s), s, s * s])
    targets = np.array([1.0, nbar / cutoff, m2 / cutoff**2])
    probs, nu, it = _l1_dual_newton(features, targets, tol * 1e-3, max_iter)
    report = _l1_report(probs, nbar, m2, nu, (0, 1, 2), cutoff, it, tol)
    if check_stability:
        doubled = maximize_l1_two_moment_constraint(nbar, m2, 2 * cutoff, tol, max_iter)
        report.extras["objective_doubled_cutoff"] = doubled.objective
        report.extras["cutoff_stability"] = abs(doubled.objective - report.objective)
    return report


def l1_cutoff_sweep(nbar: float, cutoffs: Sequence[int], tol: float = 1e-10) -> list:
    """``(cutoff, objective)`` pairs of the mean-constrained l1 maximum."""
    return [(int(c), maximize_l1_mean_constraint(nbar, int(c), tol).objective) for c in cutoffs]


# -- stationarity ----------------------------------------------------------


def _stationarity_terms(dist, orders):
    probs = dist.probs
    if np.any(probs <= 0):
        raise UndefinedGradient("l1 gradient is singular where a probability vanishes")
    if dist.support is not None:
        n = np.array(dist.support, dtype=float)
    else:
        n = np.arange(probs.size, dtype=float)
    roots = np.sqrt(probs)
    s = math.fsum(roots)
    basis = np.vstack([n**o for o in orders]) if len(orders) else np.zeros((0, n.size))
    return s / roots, basis, s


def kkt_residual(dist: NumberDistribution, multipliers: Sequence[float],
                 moment_orders: Sequence[int]) -> float:
    """Stationarity residual of ``(sum sqrt P)^2`` under moment constraints.

    ``max_n |sum_m sqrt(P_m)/sqrt(P_n) + sum_j lam_j n^(o_j)| / sum_m sqrt(P_m)``.
    """
    if len(multipliers) != len(moment_orders):
        raise InvalidArgument("one multiplier per moment order is required")
    grad, basis, s = _stationarity_terms(dist, moment_orders)
    resid = grad + np.asarray(multipliers, dtype=float) @ basis
    return float(np.max(np.abs(resid)) / s)


def fit_multipliers(dist: NumberDistribution, moment_orders: Sequence[int]) -> np.ndarray:
    """Least-squares multipliers minimizing the stationarity residual."""
    grad, basis, _ = _stationarity_terms(dist, moment_orders)
    lams, *_ = np.linalg.lstsq(basis.T, -grad, rcond=None)
    return lams
