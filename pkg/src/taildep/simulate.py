"""Copula samplers and closed forms used as oracles.

Samples are drawn with numpy's PCG64 generator seeded through
``SeedSequence(seed)``; the same seed reproduces the same sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtr

from .ingest import SampleMatrix

__all__ = [
    "Gumbel",
    "BivariateNormal",
    "Independence",
    "Comonotone",
    "CopulaSpec",
    "sample",
    "positive_stable",
    "gumbel_spectral_density",
    "chi_logistic",
    "parse_copula",
]


@dataclass(frozen=True)
class Gumbel:
    theta: float
    d: int = 2

    def __post_init__(self):
        if not self.theta >= 1:
            raise ValueError(f"Gumbel parameter must be >= 1, got {self.theta}")
        if self.d < 2:
            raise ValueError("dimension must be at least 2")


@dataclass(frozen=True)
class BivariateNormal:
    rho: float
    d: int = 2

    def __post_init__(self):
        if not -1 < self.rho < 1:
            raise ValueError(f"correlation must lie in (-1, 1), got {self.rho}")
        if self.d != 2:
            raise ValueError("normal copula is bivariate only")


@dataclass(frozen=True)
class Independence:
    d: int = 2


@dataclass(frozen=True)
class Comonotone:
    d: int = 2


CopulaSpec = Union[Gumbel, BivariateNormal, Independence, Comonotone]


def positive_stable(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Positive stable variates with Laplace transform ``exp(-s^alpha)``, 0 < alpha <= 1.

    Chambers-Mallows-Stuck (Kanter) representation with a uniform angle on
    (0, pi) and a unit exponential.
    """
    if not 0 < alpha <= 1:
        raise ValueError("stable index must lie in (0, 1]")
    if alpha == 1.0:
        return np.ones(size)
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    return (
        np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    )


def sample(spec: CopulaSpec, n: int, seed=None) -> SampleMatrix:
    """``n`` i.i.d. rows with uniform margins and the requested copula."""
    if n < 2:
        raise ValueError("need at least two rows")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    d = spec.d
    if isinstance(spec, Gumbel):
        # Marshall-Olkin frailty: U_j = psi(E_j / V), psi(t) = exp(-t^(1/theta))
        v = positive_stable(1.0 / spec.theta, n, rng)
        e = rng.standard_exponential((n, d))
        u = np.exp(-((e / v[:, None]) ** (1.0 / spec.theta)))
    elif isinstance(spec, BivariateNormal):
        z = rng.standard_normal((n, 2))
        z[:, 1] = spec.rho * z[:, 0] + math.sqrt(1.0 - spec.rho**2) * z[:, 1]
        u = ndtr(z)
    elif isinstance(spec, Independence):
        u = rng.uniform(size=(n, d))
    elif isinstance(spec, Comonotone):
        u = np.repeat(rng.uniform(size=(n, 1)), d, axis=1)
    else:
        raise TypeError(f"unknown copula {spec!r}")
    return SampleMatrix(u, [f"u{j + 1}" for j in range(d)])


def gumbel_spectral_density(theta: float, w):
    """Spectral density of the bivariate logistic model, ``0 < w < 1``, ``theta > 1``."""
    if not theta > 1:
        raise ValueError("density exists only for theta > 1")
    w = np.asarray(w, dtype=float)
    v = 1.0 - w
    out = (
        (theta - 1.0) / 2.0
        * (w * v) ** (-1.0 - theta)
        * (w**-theta + v**-theta) ** (1.0 / theta - 2.0)
    )
    return float(out) if out.ndim == 0 else out


def chi_logistic(theta: float) -> float:
    return 2.0 - 2.0 ** (1.0 / theta)


def parse_copula(text: str, d: int = 2) -> CopulaSpec:
    """Parse ``gumbel:2.5``, ``normal:0.5``, ``indep`` or ``comonotone``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "gumbel":
        return Gumbel(float(arg), d)
    if name in ("normal", "gauss", "gaussian"):
        return BivariateNormal(float(arg))
    if name in ("indep", "independence"):
        return Independence(d)
    if name in ("comonotone", "comon"):
        return Comonotone(d)
    raise ValueError(f"unknown copula family {name!r}")
