"""Nonparametric estimation of bivariate extremal dependence."""

from .exceptions import ConvergenceError, DegenerateError, InfeasibleError, TailDepError
from .ingest import ParetoSample, SampleMatrix, neg_log_returns, rank_transform, read_table, write_table
from .polar import Fixed, OrderStatistic, PolarSample, Quantile, select_exceedances, to_polar
from .spectral import (
    BetaSmoother,
    Kind,
    SpectralEstimate,
    cross_validate_nu,
    empirical_spectral,
    estimate_spectral,
    euclidean_spectral,
    mel_spectral,
)
from .stdf import (
    LogisticModel,
    StdfEstimate,
    cf_stdf,
    empirical_stdf,
    fit_logistic_theta,
    level_set,
    pickands,
    tail_copula,
)
from .coeffs import chi_from_stdf, chi_u, chibar, gpd_fit_excesses, hill_eta, structure_variable
from .hyptest import eta_test, indep_statistics, indep_test, simulate_limit_quantiles
from .simulate import BivariateNormal, Comonotone, Gumbel, Independence, sample

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
