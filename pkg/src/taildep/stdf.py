"""Stable tail dependence function: estimators, derived functions, logistic family."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ingest import ParetoSample
from .spectral import SpectralEstimate

__all__ = [
    "StdfEstimate",
    "LogisticModel",
    "empirical_stdf",
    "cf_stdf",
    "logistic_stdf",
    "max_stdf",
    "sum_stdf",
    "tail_copula",
    "pickands",
    "exponent_measure",
    "level_set",
    "fit_logistic_theta",
]


@dataclass
class StdfEstimate:
    """A stable tail dependence function (estimated or exact).

    ``evaluator`` maps an array of shape (..., d) of nonnegative points to an
    array of shape (...). Calling the object accepts either one point as
    separate coordinates, ``ell(x, y)``, or a stacked array, ``ell(points)``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    d: int
    kind: str
    k: Optional[int] = None
    homogeneous: bool = True

    def __call__(self, *coords):
        if len(coords) == 1:
            pts = np.asarray(coords[0], dtype=float)
        else:
            pts = np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords]), axis=-1)
        if pts.shape[-1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}, got {pts.shape[-1]}")
        out = self.evaluator(pts)
        return float(out) if np.ndim(out) == 0 else out


def empirical_stdf(p: ParetoSample, k: int) -> StdfEstimate:
    """Rank-based estimator ``(1/k) #{i : R_ij > n + 1 - k x_j for some j}``."""
    n, d = p.ranks.shape
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    ranks = p.ranks.astype(float)

    def evaluate(pts):
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, d)
        thresh = n + 1.0 - k * flat  # (m, d)
        hit = np.zeros((flat.shape[0], n), dtype=bool)
        for j in range(d):
            hit |= ranks[None, :, j] > thresh[:, j, None]
        return (hit.sum(axis=1) / k).reshape(pts.shape[:-1])

    return StdfEstimate(evaluate, d, "empirical", k=k, homogeneous=False)


def cf_stdf(est: SpectralEstimate) -> StdfEstimate:
    """Spectral-measure based estimator ``2 sum_i p_i max(W_i x, (1 - W_i) y)``."""
    if est.weights is None:
        raise ValueError("spectral estimate carries no weights")
    w = est.angles
    pw = est.weights

    def evaluate(pts):
        pts = np.asarray(pts, dtype=float)
        x = pts[..., 0, None]
        y = pts[..., 1, None]
        return 2.0 * (np.maximum(w * x, (1.0 - w) * y) @ pw)

    return StdfEstimate(evaluate, 2, f"cf-{est.kind.value}", k=est.n)


@dataclass(frozen=True)
class LogisticModel:
    theta: float
    d: int = 2

    def __post_init__(self):
        if not self.theta >= 1:
            raise ValueError(f"logistic parameter must be >= 1, got {self.theta}")

    def stdf(self) -> StdfEstimate:
        return StdfEstimate(lambda pts: logistic_stdf(self, pts), self.d, f"logistic({self.theta:g})")


def logistic_stdf(model: LogisticModel, x) -> np.ndarray:
    """``(sum_j x_j^theta)^(1/theta)``, evaluated relative to the maximum for stability."""
    x = np.asarray(x, dtype=float)
    th = model.theta
    m = x.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    ratio = x / safe[..., None]
    val = m * np.sum(ratio**th, axis=-1) ** (1.0 / th)
    return np.where(m > 0, val, 0.0)


def max_stdf(d: int = 2) -> StdfEstimate:
    """Complete dependence."""
    return StdfEstimate(lambda pts: np.max(np.asarray(pts, dtype=float), axis=-1), d, "max")


def sum_stdf(d: int = 2) -> StdfEstimate:
    """Independence."""
    return StdfEstimate(lambda pts: np.sum(np.asarray(pts, dtype=float), axis=-1), d, "sum")


def tail_copula(ell: StdfEstimate, x, y):
    """Bivariate tail copula ``x + y - ell(x, y)``, clipped at zero with a warning."""
    if ell.d != 2:
        raise ValueError("tail copula relation only holds for d = 2")
    r = np.asarray(x, dtype=float) + np.asarray(y, dtype=float) - np.asarray(ell(x, y))
    if np.any(r < 0):
        warnings.warn("negative tail copula estimate clipped to zero", stacklevel=2)
        r = np.maximum(r, 0.0)
    return float(r) if np.ndim(r) == 0 else r


def pickands(ell: StdfEstimate, t):
    """Pickands dependence function ``A(t) = ell(1 - t, t)``."""
    t = np.asarray(t, dtype=float)
    return ell(1.0 - t, t)


def exponent_measure(ell: StdfEstimate, z):
    """``V(z) = ell(1/z_1, ..., 1/z_d)``."""
    return ell(1.0 / np.asarray(z, dtype=float))


def level_set(ell: StdfEstimate, c: float, m: int = 101, iterations: int = 80) -> np.ndarray:
    """Points of the level set ``{ell = c}`` along ``m`` rays of the unit simplex.

    Ray ``j`` has direction ``(1 - t_j, t_j)``, ``t_j = j / (m - 1)``. The
    radius is located by bisection on ``[0, c d]``; for step-function
    estimates this returns the location of the jump across ``c``. If the
    bracket does not reach ``c`` (possible for the empirical estimator) its
    upper end is doubled until it does.

    Returns an (m, 2) array of points.
    """
    if not c > 0:
        raise ValueError("level must be positive")
    if m < 2:
        raise ValueError("need at least two rays")
    t = np.linspace(0.0, 1.0, m)
    dirs = np.column_stack([1.0 - t, t])
    lo = np.zeros(m)
    hi = np.full(m, c * ell.d)
    for _ in range(60):
        short = ell(hi[:, None] * dirs) < c
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise ValueError(f"no root of ell = {c} along some ray; the function may vanish there")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        above = ell(mid[:, None] * dirs) >= c
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return hi[:, None] * dirs


def _golden_section(f, a: float, b: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_logistic_theta(
    ell: StdfEstimate, bounds=(1.0, 50.0), grid_size: int = 33, tol: float = 1e-4
) -> float:
    """Logistic parameter closest to ``ell`` in discretized L2 distance on the unit square.

    The distance is averaged over a ``grid_size`` x ``grid_size`` grid and
    minimized by golden-section search; the interval ends are also compared
    and ties favour the smaller parameter.
    """
    if ell.d != 2:
        raise ValueError("logistic fit is implemented for bivariate estimates")
    g = np.linspace(0.0, 1.0, grid_size)
    pts = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    target = np.asarray(ell(pts))

    def loss(theta):
        return float(np.mean((target - logistic_stdf(LogisticModel(theta), pts)) ** 2))

    lo, hi = bounds
    inner = _golden_section(loss, lo, hi, tol)
    candidates = sorted([(loss(th), th) for th in (lo, inner, hi)], key=lambda v: (v[0], v[1]))
    return float(candidates[0][1])
