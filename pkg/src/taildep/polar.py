"""Pseudo-polar coordinates of Pareto-scale data and exceedance selection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .ingest import ParetoSample

__all__ = [
    "PolarSample",
    "OrderStatistic",
    "Quantile",
    "Fixed",
    "to_polar",
    "select_exceedances",
]


@dataclass(frozen=True)
class OrderStatistic:
    """Keep the ``k`` largest radii, i.e. those above the (k+1)-th largest."""

    k: int


@dataclass(frozen=True)
class Quantile:
    """Keep radii strictly above the empirical ``q``-quantile of all radii."""

    q: float = 0.95


@dataclass(frozen=True)
class Fixed:
    """Keep radii at or above ``u`` (e.g. ``u = n / k``)."""

    u: float


Rule = Union[OrderStatistic, Quantile, Fixed]


@dataclass
class PolarSample:
    """Radius ``S_i`` (L1 norm of the Pareto row) and angles (component shares).

    ``angle`` holds the first d-1 shares; the last one is implied. For d = 2
    :attr:`w` gives the first share as a flat vector.
    """

    radius: np.ndarray
    angle: np.ndarray
    exceed_idx: Optional[np.ndarray] = None
    k: Optional[int] = None
    threshold: Optional[float] = None

    @property
    def n(self) -> int:
        return self.radius.shape[0]

    @property
    def d(self) -> int:
        return self.angle.shape[1] + 1

    @property
    def w(self) -> np.ndarray:
        if self.d != 2:
            raise ValueError("w is only defined for bivariate samples")
        return self.angle[:, 0]

    @property
    def shares(self) -> np.ndarray:
        return np.column_stack([self.angle, 1.0 - self.angle.sum(axis=1)])

    @property
    def n_exceed(self) -> int:
        if self.exceed_idx is None:
            raise ValueError("no exceedance set selected")
        return self.exceed_idx.size

    def exceedance_angles(self) -> np.ndarray:
        """Angles of the selected observations (first share for d = 2)."""
        if self.exceed_idx is None:
            raise ValueError("no exceedance set selected")
        a = self.angle[self.exceed_idx]
        return a[:, 0] if self.d == 2 else a


def to_polar(p: ParetoSample) -> PolarSample:
    x = p.pareto
    radius = x.sum(axis=1)
    angle = x[:, :-1] / radius[:, None]
    return PolarSample(radius=radius, angle=angle)


def select_exceedances(ps: PolarSample, rule: Rule) -> PolarSample:
    """Return a copy of ``ps`` with the exceedance index set filled in.

    Under the order-statistic rule exactly ``k`` indices are kept. Radii tied
    at the threshold are resolved by excluding the larger indices first.
    Indices are returned in increasing order.
    """
    n = ps.n
    s = ps.radius
    if isinstance(rule, OrderStatistic):
        k = int(rule.k)
        if not 1 <= k <= n - 1:
            raise ValueError(f"k must lie in [1, {n - 1}], got {k}")
        order = np.lexsort((np.arange(n), -s))  # descending radius, ascending index
        idx = np.sort(order[:k])
        threshold = float(s[order[k]])
    elif isinstance(rule, Quantile):
        if not 0.0 < rule.q < 1.0:
            raise ValueError(f"quantile must lie in (0, 1), got {rule.q}")
        threshold = float(np.quantile(s, rule.q))
        idx = np.flatnonzero(s > threshold)
        k = None
    elif isinstance(rule, Fixed):
        threshold = float(rule.u)
        idx = np.flatnonzero(s >= threshold)
        k = None
    else:
        raise TypeError(f"unknown selection rule {rule!r}")
    if idx.size == 0:
        raise ValueError(f"empty exceedance set at threshold {threshold}")
    return replace(ps, exceed_idx=idx, k=k if k is not None else int(idx.size), threshold=threshold)
