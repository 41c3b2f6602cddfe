"""Tail dependence coefficients chi, eta and chi-bar.

The coefficient of tail dependence ``eta`` is the tail index of the
structure variable ``T = min(X*, Y*)``: 1 under asymptotic dependence, 1/2
under exact independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import ConvergenceError, DegenerateError
from .ingest import ParetoSample
from .stdf import StdfEstimate

__all__ = [
    "StructureSample",
    "GpdFit",
    "chi_u",
    "chi_from_stdf",
    "structure_variable",
    "hill_eta",
    "gpd_loglik",
    "gpd_fit_excesses",
    "chibar",
    "chibar_u",
    "default_k_grid",
    "DEFAULT_U_GRID",
]

DEFAULT_U_GRID = np.round(np.arange(0.80, 0.9951, 0.005), 3)


def _check_bivariate(p: ParetoSample):
    if p.d != 2:
        raise ValueError(f"bivariate sample required, got d = {p.d}")


def chi_u(p: ParetoSample, u):
    """Empirical ``chi(u) = 2 - (1 - C_n(u, u)) / (1 - u)``."""
    _check_bivariate(p)
    u = np.asarray(u, dtype=float)
    if np.any(u >= 1) or np.any(u < 0):
        raise ValueError("u must lie in [0, 1)")
    f = p.ecdf
    both_below = (f[None, :, 0] < u.reshape(-1, 1)) & (f[None, :, 1] < u.reshape(-1, 1))
    joint = both_below.mean(axis=1).reshape(u.shape)
    out = 2.0 - (1.0 - joint) / (1.0 - u)
    return float(out) if out.ndim == 0 else out


def chi_from_stdf(ell: StdfEstimate) -> float:
    return 2.0 - float(ell(1.0, 1.0))


@dataclass
class StructureSample:
    t_values: np.ndarray
    sorted: np.ndarray  # descending

    @classmethod
    def from_values(cls, t) -> "StructureSample":
        t = np.asarray(t, dtype=float).ravel()
        return cls(t, np.sort(t)[::-1])

    @property
    def n(self) -> int:
        return self.t_values.size


def structure_variable(p: ParetoSample) -> StructureSample:
    _check_bivariate(p)
    return StructureSample.from_values(p.pareto.min(axis=1))


def _check_k(s: StructureSample, k: int):
    if not 1 <= k <= s.n - 1:
        raise ValueError(f"k must lie in [1, {s.n - 1}], got {k}")


def hill_eta(s: StructureSample, k: int) -> float:
    """Hill estimator of the tail index of ``T`` from its ``k`` largest values."""
    _check_k(s, k)
    top = s.sorted[: k + 1]
    if top[k] <= 0:
        raise ValueError("Hill estimator needs a positive (k+1)-th order statistic")
    return float(np.mean(np.log(top[:k] / top[k])))


def gpd_loglik(excesses, shape: float, scale: float) -> float:
    """Generalized Pareto log-likelihood; ``-inf`` outside the support."""
    y = np.asarray(excesses, dtype=float)
    if scale <= 0:
        return -math.inf
    z = shape * y / scale
    if np.any(1.0 + z <= 0):
        return -math.inf
    if abs(shape) < 1e-12:
        return float(-y.size * math.log(scale) - y.sum() / scale)
    return float(-y.size * math.log(scale) - (1.0 + 1.0 / shape) * np.log1p(z).sum())


def _nll_gradient(y: np.ndarray, shape: float, scale: float) -> np.ndarray:
    """Gradient of the mean negative log-likelihood in (shape, log scale)."""
    v = y / scale
    if abs(shape) < 1e-8:
        m1, m2 = v.mean(), np.mean(v**2)
        return np.array([m1 - 0.5 * m2, 1.0 - m1])
    z = shape * v
    a = np.log1p(z).mean()
    r = np.mean(v / (1.0 + z))
    d_shape = -a / shape**2 + (1.0 + 1.0 / shape) * r
    d_logscale = 1.0 - (1.0 + shape) * r
    return np.array([d_shape, d_logscale])


@dataclass
class GpdFit:
    shape: float
    scale: float
    threshold: float
    excess_count: int
    loglik: float
    converged: bool
    grad_norm: float = math.nan

    @property
    def eta(self) -> float:
        return self.shape


def _profile_shape(y: np.ndarray, tau: float) -> float:
    """MLE of the shape for fixed ``tau = shape / scale``."""
    if tau == 0.0:
        return 0.0
    return float(np.log1p(tau * y).mean())


def _profile_nll(y: np.ndarray, tau: float) -> float:
    """Mean negative log-likelihood profiled over the shape, as a function of ``tau``."""
    if tau == 0.0:
        return math.log(y.mean()) + 1.0
    xi = _profile_shape(y, tau)
    scale = xi / tau
    if not scale > 0:
        return math.inf
    return math.log(scale) + xi + 1.0


def _fit_fixed_shape(y: np.ndarray, shape: float) -> float:
    """Scale maximizing the likelihood with the shape held fixed."""
    ymax = y.max()
    lo = max(1e-12 * ymax, -shape * ymax * (1 + 1e-12)) if shape < 0 else 1e-12 * ymax
    res = minimize_scalar(
        lambda ls: -gpd_loglik(y, shape, math.exp(ls)) / y.size,
        bounds=(math.log(lo), math.log(1e6 * ymax)),
        method="bounded",
        options={"xatol": 1e-12, "maxiter": 500},
    )
    return math.exp(res.x)


def gpd_fit_excesses(
    s: StructureSample, k: int, shape: Optional[float] = None, gtol: float = 1e-8
) -> GpdFit:
    """Fit a generalized Pareto distribution to the excesses over ``T_(k+1)``.

    The likelihood is profiled onto ``tau = shape / scale``: for fixed
    ``tau`` the shape estimate is ``mean(log(1 + tau y))``. The profile is
    minimized by bounded Brent search around the Hill-based starting value
    ``tau = 1 / u``. ``converged`` reports whether the gradient of the mean
    negative log-likelihood at the returned point is below ``gtol``.

    With ``shape`` given, only the scale is estimated.
    """
    _check_k(s, k)
    if k < 10:
        raise ValueError(f"need at least 10 excesses, got k = {k}")
    u = float(s.sorted[k])
    y = s.sorted[:k] - u
    if np.ptp(y) == 0.0:
        raise DegenerateError("all excesses are equal")
    if shape is not None:
        scale = _fit_fixed_shape(y, float(shape))
        return GpdFit(float(shape), scale, u, k, gpd_loglik(y, shape, scale), True)

    ymax = float(y.max())
    ybar = float(y.mean())
    tau_lo = -1.0 / ymax * (1.0 - 1e-10)
    # s = tau * ybar is scale free; search s on a coarse grid, then refine
    start = 1.0 / u if u > 0 else 1.0 / ybar
    s_grid = np.concatenate(
        [np.linspace(tau_lo * ybar, 0.0, 40, endpoint=False), np.geomspace(1e-6, 1e6, 121)]
    )
    s_grid = np.union1d(s_grid, [0.0, start * ybar])
    vals = np.array([_profile_nll(y, sv / ybar) for sv in s_grid])
    j = int(np.nanargmin(vals))
    a = s_grid[max(j - 1, 0)]
    b = s_grid[min(j + 1, s_grid.size - 1)]
    res = minimize_scalar(
        lambda sv: _profile_nll(y, sv / ybar),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-14 * max(1.0, abs(s_grid[j])), "maxiter": 500},
    )
    tau = res.x / ybar
    xi = _profile_shape(y, tau)
    scale = xi / tau if tau != 0.0 else ybar
    if not scale > 0:
        raise ConvergenceError("GPD fit produced a nonpositive scale")
    xi, scale, gnorm = _newton_polish(y, xi, scale)
    return GpdFit(xi, scale, u, k, gpd_loglik(y, xi, scale), gnorm <= gtol, gnorm)


def _newton_polish(y: np.ndarray, xi: float, scale: float, steps: int = 20, h: float = 1e-6):
    """Newton steps in (shape, log scale) with a finite-difference Hessian of the exact gradient."""
    x = np.array([xi, math.log(scale)])
    g = _nll_gradient(y, x[0], math.exp(x[1]))
    for _ in range(steps):
        if np.linalg.norm(g) <= 1e-13:
            break
        hess = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            hess[:, j] = (
                _nll_gradient(y, *_unpack(x + e)) - _nll_gradient(y, *_unpack(x - e))
            ) / (2 * h)
        try:
            step = np.linalg.solve(0.5 * (hess + hess.T), g)
        except np.linalg.LinAlgError:
            break
        cand = x - step
        if not np.isfinite(gpd_loglik(y, *_unpack(cand))):
            break
        g_new = _nll_gradient(y, *_unpack(cand))
        if np.linalg.norm(g_new) >= np.linalg.norm(g):
            break
        x, g = cand, g_new
    return float(x[0]), math.exp(x[1]), float(np.linalg.norm(g))


def _unpack(x):
    return float(x[0]), math.exp(x[1])


def chibar(eta):
    """``2 eta - 1``."""
    return 2.0 * eta - 1.0


def chibar_u(p: ParetoSample, u) -> float:
    """Empirical ``2 log P(F_X > u) / log P(F_X > u, F_Y > u) - 1``; NaN if no joint exceedance."""
    _check_bivariate(p)
    if not 0 <= u < 1:
        raise ValueError("u must lie in [0, 1)")
    f = p.ecdf
    marg = np.mean(f[:, 0] > u)
    joint = np.mean((f[:, 0] > u) & (f[:, 1] > u))
    if joint == 0 or marg == 0:
        return math.nan
    if joint == 1.0:
        return math.nan
    return 2.0 * math.log(marg) / math.log(joint) - 1.0


def default_k_grid(n: int, kmin: int = 20, max_points: int = 200) -> np.ndarray:
    """k from ``kmin`` to ``n / 5`` with at most ``max_points`` values."""
    kmax = max(kmin, n // 5)
    step = max(1, math.ceil((kmax - kmin + 1) / max_points))
    return np.arange(kmin, kmax + 1, step)
