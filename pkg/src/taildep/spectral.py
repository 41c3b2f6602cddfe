"""Nonparametric spectral measure estimators for bivariate data.

All three estimators put probability mass ``p_i`` on the exceedance angles
``W_i``; they differ in how the weights are chosen:

* empirical: ``p_i = 1 / N``;
* maximum empirical likelihood (MEL): maximize ``sum(log p_i)`` subject to
  ``sum(p_i) = 1`` and ``sum(p_i W_i) = 1/2``;
* maximum Euclidean likelihood: minimize ``sum((N p_i - 1)^2)`` under the
  same constraints, which has a closed form.

The weighted angles can be smoothed with beta kernels whose means equal the
angles, so that the smoothed measure keeps the moment constraint.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import betainc, betaln, xlog1py, xlogy

from .exceptions import ConvergenceError, DegenerateError, InfeasibleError

__all__ = [
    "Kind",
    "SpectralEstimate",
    "empirical_spectral",
    "mel_spectral",
    "euclidean_spectral",
    "estimate_spectral",
    "BetaSmoother",
    "beta_smooth_density",
    "beta_smooth_cdf",
    "cross_validate_nu",
    "DEFAULT_NU_GRID",
]

DEFAULT_NU_GRID = np.geomspace(1.0, 300.0, 30)

MEL_TOL = 1e-12
MEL_MAXITER = 200


class Kind(str, enum.Enum):
    EMPIRICAL = "emp"
    MEL = "mel"
    EUCLIDEAN = "euc"


@dataclass
class SpectralEstimate:
    angles: np.ndarray
    weights: np.ndarray
    kind: Kind
    lagrange: Optional[float] = None
    nu: Optional[float] = None

    @property
    def n(self) -> int:
        return self.angles.size

    @property
    def has_negative_weights(self) -> bool:
        return bool(np.any(self.weights < 0))

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.angles))

    def cdf(self, x):
        """Step-function estimate ``sum(p_i * 1{W_i <= x})``."""
        x = np.asarray(x, dtype=float)
        order = np.argsort(self.angles, kind="stable")
        cum = np.concatenate([[0.0], np.cumsum(self.weights[order])])
        pos = np.searchsorted(self.angles[order], x, side="right")
        return cum[pos]


def _as_angles(angles) -> np.ndarray:
    w = np.asarray(angles, dtype=float).ravel()
    if w.size == 0:
        raise ValueError("empty angle set")
    if np.any((w < 0) | (w > 1)) or not np.all(np.isfinite(w)):
        raise ValueError("angles must lie in [0, 1]")
    return w


def empirical_spectral(angles) -> SpectralEstimate:
    w = _as_angles(angles)
    return SpectralEstimate(w, np.full(w.size, 1.0 / w.size), Kind.EMPIRICAL)


def _mel_score(lam: float, dev: np.ndarray) -> float:
    return float(np.mean(dev / (1.0 + lam * dev)))


def mel_spectral(angles, tol: float = MEL_TOL, maxiter: int = MEL_MAXITER) -> SpectralEstimate:
    """Maximum empirical likelihood weights.

    The Lagrange multiplier solves ``mean(d_i / (1 + lam d_i)) = 0`` with
    ``d_i = W_i - 1/2``. The left-hand side decreases strictly in ``lam`` on
    the interval where every ``1 + lam d_i`` is positive and diverges at both
    ends, so bisection on that interval always brackets the root.

    Raises
    ------
    InfeasibleError
        If 1/2 is not strictly inside the range of the angles.
    ConvergenceError
        If the bisection fails to reach ``|f(lam)| <= tol``.
    """
    w = _as_angles(angles)
    dev = w - 0.5
    if not (dev.min() < 0.0 < dev.max()):
        if np.all(dev == 0.0):
            return SpectralEstimate(w, np.full(w.size, 1.0 / w.size), Kind.MEL, lagrange=0.0)
        raise InfeasibleError(
            f"1/2 is not inside the convex hull of the angles [{w.min():.6g}, {w.max():.6g}]"
        )
    lo, hi = -1.0 / dev.max(), -1.0 / dev.min()
    lam = 0.0
    f = _mel_score(lam, dev)
    it = 0
    while abs(f) > tol and it < maxiter:
        if f > 0:
            lo = lam
        else:
            hi = lam
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        lam = mid
        f = _mel_score(lam, dev)
        it += 1
    if abs(f) > tol:
        raise ConvergenceError(f"MEL multiplier did not converge: |f| = {abs(f):.3g} after {it} steps")
    p = 1.0 / (w.size * (1.0 + lam * dev))
    # sum(p) = 1 - lam * f exactly; removing that residual leaves sum(p d) = f / sum(p)
    p /= p.sum()
    return SpectralEstimate(w, p, Kind.MEL, lagrange=float(lam))


def euclidean_spectral(angles) -> SpectralEstimate:
    """Maximum Euclidean likelihood weights (closed form).

    Weights may come out negative in small samples; they are kept and
    flagged through :attr:`SpectralEstimate.has_negative_weights`.
    """
    w = _as_angles(angles)
    n = w.size
    if np.ptp(w) == 0.0:
        if w[0] == 0.5:
            return SpectralEstimate(w, np.full(n, 1.0 / n), Kind.EUCLIDEAN)
        raise DegenerateError("all angles are equal and differ from 1/2; zero sample variance")
    if n < 2:
        raise ValueError("need at least two angles")
    wbar = w.mean()
    centred = w - wbar
    var = np.mean(centred**2)
    p = (1.0 - (wbar - 0.5) / var * centred) / n
    # closed form is exact; a Newton-type correction removes accumulated roundoff
    p += _constraint_correction(w, p)
    return SpectralEstimate(w, p, Kind.EUCLIDEAN)


def _constraint_correction(w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Minimum-norm adjustment putting ``p`` back on both linear constraints."""
    a = np.vstack([np.ones_like(w), w])
    r = np.array([1.0 - p.sum(), 0.5 - np.dot(p, w)])
    return a.T @ np.linalg.solve(a @ a.T, r)


def estimate_spectral(angles, kind="euc") -> SpectralEstimate:
    kind = Kind(kind)
    if kind is Kind.EMPIRICAL:
        return empirical_spectral(angles)
    if kind is Kind.MEL:
        return mel_spectral(angles)
    return euclidean_spectral(angles)


def _clamped_angles(angles: np.ndarray) -> np.ndarray:
    eps = 1.0 / (2.0 * angles.size)
    return np.clip(angles, eps, 1.0 - eps)


def _beta_logpdf(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return xlogy(a - 1.0, x) + xlog1py(b - 1.0, -x) - betaln(a, b)


class BetaSmoother:
    """Beta-kernel smoothing of a weighted spectral estimate.

    Kernel ``i`` is Beta(W_i nu, (1 - W_i) nu), whose mean is ``W_i``. Angles
    on the boundary are clamped into ``[1/(2N), 1 - 1/(2N)]`` first.
    """

    def __init__(self, est: SpectralEstimate, nu: float):
        if not nu > 0:
            raise ValueError(f"bandwidth must be positive, got {nu}")
        self.est = est
        self.nu = float(nu)
        self.angles = _clamped_angles(est.angles)
        self.weights = est.weights
        self.a = self.angles * self.nu
        self.b = (1.0 - self.angles) * self.nu
        self.signed = est.has_negative_weights
        if self.signed:
            warnings.warn("negative weights: the smoothed density may be signed", stacklevel=2)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 1)
        with np.errstate(divide="ignore", over="ignore"):
            dens = np.exp(_beta_logpdf(flat, self.a, self.b))
        inside = (flat >= 0.0) & (flat <= 1.0)
        dens = np.where(inside, dens, 0.0)
        return (dens @ self.weights).reshape(x.shape)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        flat = x.reshape(-1, 1)
        return (betainc(self.a, self.b, flat) @ self.weights).reshape(x.shape)

    def mean(self) -> float:
        return float(np.dot(self.weights, self.angles))


def beta_smooth_density(est: SpectralEstimate, nu: float, x):
    return BetaSmoother(est, nu).pdf(x)


def beta_smooth_cdf(est: SpectralEstimate, nu: float, x):
    return BetaSmoother(est, nu).cdf(x)


def loo_scores(est: SpectralEstimate, grid: Sequence[float]) -> np.ndarray:
    """Leave-one-out log-density score for each bandwidth in ``grid``.

    The density left out at ``W_i`` uses the remaining weights renormalized to
    sum one. Nonpositive left-out densities score ``-inf``.
    """
    w = _clamped_angles(est.angles)
    p = est.weights
    denom = 1.0 - p
    scores = np.empty(len(grid))
    for g, nu in enumerate(grid):
        with np.errstate(divide="ignore", over="ignore"):
            kmat = np.exp(_beta_logpdf(w[:, None], w[None, :] * nu, (1.0 - w[None, :]) * nu))
        np.fill_diagonal(kmat, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            loo = (kmat @ p) / denom
            logs = np.where(loo > 0, np.log(np.where(loo > 0, loo, 1.0)), -np.inf)
        scores[g] = logs.sum()
    return scores


def cross_validate_nu(est: SpectralEstimate, grid: Optional[Sequence[float]] = None) -> float:
    """Bandwidth maximizing the leave-one-out log-likelihood over ``grid``.

    Ties go to the smaller bandwidth; identical grid entries keep the first.
    """
    grid = DEFAULT_NU_GRID if grid is None else np.asarray(grid, dtype=float).ravel()
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be a nonempty set of positive bandwidths")
    if grid.size == 1:
        return float(grid[0])
    if est.n < 3:
        raise ValueError("cross-validation needs at least three angles")
    scores = loo_scores(est, grid)
    if np.all(np.isneginf(scores)):
        raise DegenerateError(
            "every bandwidth gives zero left-out density; clamp boundary angles or widen the grid"
        )
    best = 0
    for g in range(1, grid.size):
        if scores[g] > scores[best] or (scores[g] == scores[best] and grid[g] < grid[best]):
            best = g
    return float(grid[best])
