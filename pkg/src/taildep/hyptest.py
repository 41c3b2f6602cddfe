"""Tests of asymptotic dependence (eta = 1) and of asymptotic independence.

The independence test compares a split-sample estimate of ell with x + y.
Its limit law is that of functionals of ``W1(2x) + W2(2y)`` for independent
Brownian motions; quantiles of those functionals are obtained by Monte
Carlo in :func:`simulate_limit_quantiles`.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .coeffs import gpd_fit_excesses, structure_variable
from .exceptions import ConvergenceError
from .ingest import ParetoSample

__all__ = [
    "EtaTestReport",
    "IndepTestReport",
    "TABULATED_CRITICAL_INT",
    "TABULATED_CRITICAL_SUP",
    "eta_test",
    "split_sample_stdf",
    "split_sample_thresholds",
    "indep_statistics",
    "indep_test",
    "simulate_limit_quantiles",
]

# published 95% quantiles of the integral and supremum limit statistics
TABULATED_CRITICAL_INT = 6.237
TABULATED_CRITICAL_SUP = 4.956


@dataclass
class EtaTestReport:
    k: int
    eta_mle: float
    sigma_at_one: float
    sigma_at_estimate: float
    chi_hat: float
    cx_hat: float
    cy_hat: float
    alpha: float
    variance_mode: str
    critical_value: float
    reject: bool

    @property
    def sigma_hat(self) -> float:
        return self.sigma_at_one if self.variance_mode == "at_one" else self.sigma_at_estimate


def _second_order_c(t_sorted_perturbed: np.ndarray, t_k1: float, k: int, n: int, chi_hat: float) -> float:
    """Plug-in estimate of a partial derivative of ``c`` at (1, 1)."""
    if not chi_hat > 0:
        raise ValueError("chi estimate must be positive to form p = k / chi")
    p_hat = k / chi_hat
    return p_hat**1.25 / n * (t_sorted_perturbed[k] - t_k1)


def _asymptotic_sigma(eta: float, chi: float, cx: float, cy: float) -> float:
    var = (1.0 + eta) ** 2 * (1.0 - chi) * (1.0 - 2.0 * chi * cx * cy)
    if var < 0:
        warnings.warn(f"negative variance estimate {var:.4g} clipped to zero", stacklevel=3)
        var = 0.0
    return math.sqrt(var)


def eta_test(p: ParetoSample, k: int, alpha: float = 0.05, variance_mode: str = "at_one") -> EtaTestReport:
    """Test H0: eta = 1 against eta < 1 with the GPD maximum likelihood estimator.

    H0 is rejected when ``eta_mle <= 1 - sigma / sqrt(k) * z_{1 - alpha}``.
    The asymptotic standard deviation is evaluated at eta = 1
    (``variance_mode="at_one"``) or at the estimate (``"at_estimate"``);
    both are reported.
    """
    if p.d != 2:
        raise ValueError("eta test needs a bivariate sample")
    if variance_mode not in ("at_one", "at_estimate"):
        raise ValueError(f"unknown variance mode {variance_mode!r}")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    n = p.n
    s = structure_variable(p)
    fit = gpd_fit_excesses(s, k)
    if not fit.converged:
        raise ConvergenceError(f"GPD fit did not converge at k = {k} (gradient {fit.grad_norm:.3g})")
    t_k1 = float(s.sorted[k])
    chi_hat = k * t_k1 / n
    if not chi_hat > 0:
        raise ValueError("chi estimate must be positive to form p = k / chi")
    u = (k / chi_hat) ** -0.25
    xs, ys = p.pareto[:, 0], p.pareto[:, 1]
    tx = np.sort(np.minimum((1.0 + u) * xs, ys))[::-1]
    ty = np.sort(np.minimum(xs, (1.0 + u) * ys))[::-1]
    cx = _second_order_c(tx, t_k1, k, n, chi_hat)
    cy = _second_order_c(ty, t_k1, k, n, chi_hat)
    sig1 = _asymptotic_sigma(1.0, chi_hat, cx, cy)
    sig_eta = _asymptotic_sigma(fit.shape, chi_hat, cx, cy)
    sigma = sig1 if variance_mode == "at_one" else sig_eta
    crit = 1.0 - sigma / math.sqrt(k) * norm.ppf(1.0 - alpha)
    return EtaTestReport(
        k=k,
        eta_mle=fit.shape,
        sigma_at_one=sig1,
        sigma_at_estimate=sig_eta,
        chi_hat=chi_hat,
        cx_hat=cx,
        cy_hat=cy,
        alpha=alpha,
        variance_mode=variance_mode,
        critical_value=crit,
        reject=bool(fit.shape <= crit),
    )


def _halves(p: ParetoSample):
    if p.d != 2:
        raise ValueError("split-sample statistics need a bivariate sample")
    n = p.n
    if n % 2:
        warnings.warn("odd sample size: dropping the last observation", stacklevel=3)
        n -= 1
    m = n // 2
    return p.ranks[:m], p.ranks[m:n], m


def split_sample_thresholds(p: ParetoSample, k: int):
    """Jump locations of the split-sample estimator along each axis.

    Returns ``(a, b, m)`` where observation ``i`` of the first half fires
    for ``x > a_i`` or ``y > b_i``, with ``a_i = (m + 1 - R~_iX) / k`` and
    ``R~_iX = 1 + #{second-half X <= X_i}``. Ranks encode the same order
    as the data under the max-rank convention, so the ranks are enough.
    """
    first, second, m = _halves(p)
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    cross = np.column_stack(
        [1 + np.searchsorted(np.sort(second[:, j]), first[:, j], side="right") for j in range(2)]
    )
    thresholds = (m + 1.0 - cross) / k
    return thresholds[:, 0], thresholds[:, 1], m


def split_sample_stdf(p: ParetoSample, k: int, x, y):
    """``(1/k) #{i <= n/2 : R~_iX > n/2 + 1 - k x or R~_iY > n/2 + 1 - k y}``."""
    a, b, m = split_sample_thresholds(p, k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xb, yb = np.broadcast_arrays(x, y)
    # same comparison as R~ > m + 1 - k x, written on the threshold scale
    fire = (a[None, :] < xb.reshape(-1, 1)) | (b[None, :] < yb.reshape(-1, 1))
    out = (fire.sum(axis=1) / k).reshape(xb.shape)
    return float(out) if out.ndim == 0 else out


def _counts(a, b, gx, gy, x_strict: bool, y_strict: bool, m: int) -> np.ndarray:
    """``#{i : a_i OP gx[p] or b_i OP gy[q]}`` on the grid, OP '<' if strict else '<='."""
    # complement event: a_i >= g (strict) or a_i > g; both read as p < ka_i
    ka = np.searchsorted(gx, a, side="right" if x_strict else "left")
    kb = np.searchsorted(gy, b, side="right" if y_strict else "left")
    hist = np.zeros((gx.size + 1, gy.size + 1))
    np.add.at(hist, (ka, kb), 1.0)
    surv = hist[::-1, ::-1].cumsum(axis=0).cumsum(axis=1)[::-1, ::-1]
    return m - surv[1:, 1:]


def indep_statistics(p: ParetoSample, k: int):
    """Exact integral and supremum statistics of ``D_n = sqrt(k)(l~_n(x, y) - x - y)`` on [0, 1]^2.

    The split-sample estimator is constant on the cells of the grid formed
    by its jump locations inside [0, 1], so the integral is a sum of
    closed-form cell integrals of ``(c - x - y)^2``. The supremum is taken
    over cell corners using both one-sided values of the step function at
    each breakpoint.
    """
    a, b, m = split_sample_thresholds(p, k)
    gx = np.union1d([0.0, 1.0], a[(a > 0) & (a < 1)])
    gy = np.union1d([0.0, 1.0], b[(b > 0) & (b < 1)])
    sqk = math.sqrt(k)

    # value on the open cell right/above grid point (p, q): a_i <= gx[p] or b_i <= gy[q]
    cell = _counts(a, b, gx, gy, False, False, m)[:-1, :-1] / k
    x0, x1 = gx[:-1, None], gx[1:, None]
    y0, y1 = gy[None, :-1], gy[None, 1:]

    def prim(c, x, y):
        return (c - x - y) ** 4 / 12.0

    integral = k * np.sum(prim(cell, x1, y1) - prim(cell, x1, y0) - prim(cell, x0, y1) + prim(cell, x0, y0))

    sup = 0.0
    gxx, gyy = gx[:, None], gy[None, :]
    for xs in (True, False):
        for ys in (True, False):
            vals = _counts(a, b, gx, gy, xs, ys, m) / k - gxx - gyy
            # right limits beyond x = 1 or y = 1 are outside the square
            if not xs:
                vals = vals[:-1, :]
            if not ys:
                vals = vals[:, :-1]
            sup = max(sup, float(np.max(np.abs(vals))))
    return max(integral, 0.0), sqk * sup


@dataclass
class IndepTestReport:
    k: int
    t_int: float
    t_sup: float
    critical_int: float
    critical_sup: float
    alpha: float
    reject_int: bool
    reject_sup: bool

    @property
    def reject(self) -> bool:
        return self.reject_int or self.reject_sup


def indep_test(
    p: ParetoSample,
    k: int,
    alpha: float = 0.05,
    critical_int: float = TABULATED_CRITICAL_INT,
    critical_sup: float = TABULATED_CRITICAL_SUP,
) -> IndepTestReport:
    """Test H0: ell(x, y) = x + y with the split-sample integral and sup statistics.

    The default critical values are the 95% limit quantiles; pass others
    (e.g. from :func:`simulate_limit_quantiles`) for a different ``alpha``.
    """
    t_int, t_sup = indep_statistics(p, k)
    return IndepTestReport(
        k=k,
        t_int=t_int,
        t_sup=t_sup,
        critical_int=critical_int,
        critical_sup=critical_sup,
        alpha=alpha,
        reject_int=bool(t_int > critical_int),
        reject_sup=bool(t_sup > critical_sup),
    )


BLOCK_PATHS = 1000


def _limit_block(seed: int, block: int, size: int, steps: int):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    dt = 2.0 / steps
    t_int = np.empty(size)
    t_sup = np.empty(size)
    sd = math.sqrt(dt)
    int_a = np.empty(size)
    sq_a = np.empty(size)
    mx = np.empty((2, size))
    mn = np.empty((2, size))
    for j in range(2):
        path = rng.standard_normal((size, steps))
        path *= sd
        np.cumsum(path, axis=1, out=path)
        # right-endpoint Riemann sums over x in [0, 1]; W(0) = 0 enters the extrema
        means = path.mean(axis=1)
        sqs = np.einsum("ij,ij->i", path, path) / steps
        if j == 0:
            int_a[:] = means
            sq_a[:] = sqs
        else:
            t_int[:] = sq_a + sqs + 2.0 * int_a * means
        mx[j] = np.maximum(path.max(axis=1), 0.0)
        mn[j] = np.minimum(path.min(axis=1), 0.0)
    t_sup[:] = np.maximum(mx[0] + mx[1], -(mn[0] + mn[1]))
    return t_int, t_sup


def simulate_limit_quantiles(
    alpha: float = 0.05,
    paths: int = 200_000,
    steps: int = 2000,
    seed: int = 0,
    workers: int = 1,
    return_samples: bool = False,
):
    """Monte Carlo ``(1 - alpha)``-quantiles of the integral and sup limit statistics.

    Each path simulates two independent Brownian motions on [0, 2] with
    ``steps`` Gaussian increments and evaluates

    * ``int int (A(x) + B(y))^2 = int A^2 + int B^2 + 2 int A int B``,
    * ``sup |A(x) + B(y)| = max(max A + max B, -(min A + min B))``,

    with ``A(x) = W1(2x)`` and ``B(y) = W2(2y)``. Paths are generated in
    blocks of 1000 with one random stream per block derived from
    ``(seed, block index)``, so results do not depend on ``workers``.
    """
    if paths < 10_000:
        raise ValueError("need at least 10^4 paths")
    if steps < 1000:
        raise ValueError("need at least 10^3 steps")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    nblocks = math.ceil(paths / BLOCK_PATHS)
    sizes = [min(BLOCK_PATHS, paths - b * BLOCK_PATHS) for b in range(nblocks)]
    jobs = [(seed, b, sizes[b], steps) for b in range(nblocks)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda args: _limit_block(*args), jobs))
    else:
        results = [_limit_block(*args) for args in jobs]
    t_int = np.concatenate([r[0] for r in results])
    t_sup = np.concatenate([r[1] for r in results])
    q = (float(np.quantile(t_int, 1.0 - alpha)), float(np.quantile(t_sup, 1.0 - alpha)))
    if return_samples:
        return q, t_int, t_sup
    return q
