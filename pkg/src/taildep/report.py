"""Per-pair analysis bundle and delimited plot-data output."""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import coeffs, hyptest, polar, spectral, stdf
from .exceptions import TailDepError
from .ingest import ParetoSample, SampleMatrix, rank_transform, read_table

__all__ = [
    "ConfigError",
    "PairError",
    "RunConfig",
    "Table",
    "SCHEMAS",
    "analyze_pair",
    "run_pairwise_report",
    "emit_plot_data",
    "parse_k_grid",
    "select_pairs",
]

DENSITY_POINTS = 512
LEVEL_RAYS = 101
DEFAULT_LEVELS = (0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_TEST_K = tuple(range(25, 251, 25))

# column schema of every emitted file
SCHEMAS = {
    "polar": ("index", "radius", "angle", "exceed"),
    "spectral_weights": ("angle", "weight"),
    "spectral_density": ("x", "density", "cdf"),
    "levels_empirical": ("level", "ray_t", "x", "y"),
    "levels_cf": ("level", "ray_t", "x", "y"),
    "chi": ("u", "chi"),
    "eta": ("k", "eta_hill", "eta_mle", "chibar"),
    "eta_test": (
        "k", "eta_mle", "sigma_at_one", "sigma_at_estimate", "chi_hat", "cx_hat", "cy_hat",
        "critical_value", "reject",
    ),
    "indep_test": ("k", "t_int", "t_sup", "critical_int", "critical_sup", "reject_int", "reject_sup"),
    "summary": ("quantity", "value"),
}


class ConfigError(ValueError):
    """Invalid run configuration (exit code 2)."""


class PairError(TailDepError):
    """An estimator failed for a given pair of columns."""

    def __init__(self, pair, cause):
        self.pair = tuple(pair)
        self.cause = cause
        super().__init__(f"pair {self.pair[0]}/{self.pair[1]}: {cause}")


def parse_k_grid(text: str) -> Tuple[int, ...]:
    """``a:b:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            a, b, step = parts
            if step <= 0 or b < a:
                raise ValueError
            return tuple(range(a, b + 1, step))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse k grid {text!r}; use a:b:step or a comma list") from None


@dataclass
class RunConfig:
    input: Optional[str] = None
    out: str = "."
    cols: Optional[Tuple[str, str]] = None
    returns: bool = False
    period: int = 1
    k: Optional[int] = None
    quantile: Optional[float] = None
    stdf_k: int = 50
    estimator: str = "euc"
    nu: str = "cv"
    levels: Tuple[float, ...] = DEFAULT_LEVELS
    k_grid: Tuple[int, ...] = DEFAULT_TEST_K
    eta_k_grid: Optional[Tuple[int, ...]] = None
    u_grid: Tuple[float, ...] = tuple(float(u) for u in coeffs.DEFAULT_U_GRID)
    alpha: float = 0.05
    null: str = "both"
    variance_mode: str = "at_one"
    critical: str = "paper"
    mc_paths: int = 200_000
    mc_steps: int = 2000
    seed: int = 0
    figures: bool = False

    def __post_init__(self):
        if self.cols is not None:
            self.cols = tuple(self.cols)
            if len(self.cols) != 2 or self.cols[0] == self.cols[1]:
                raise ConfigError("--cols needs exactly two distinct column names")
        if self.k is not None and self.quantile is not None:
            raise ConfigError("--k and --quantile are mutually exclusive")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be positive")
        if self.quantile is not None and not 0 < self.quantile < 1:
            raise ConfigError("quantile must lie in (0, 1)")
        if self.stdf_k < 1:
            raise ConfigError("stdf k must be positive")
        if self.period < 1:
            raise ConfigError("period must be positive")
        try:
            spectral.Kind(self.estimator)
        except ValueError:
            raise ConfigError(f"unknown estimator {self.estimator!r}; use emp, mel or euc") from None
        if self.nu != "cv":
            try:
                if not float(self.nu) > 0:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"--nu must be 'cv' or a positive number, got {self.nu!r}") from None
        self.levels = tuple(float(c) for c in self.levels)
        if not self.levels or any(c <= 0 for c in self.levels):
            raise ConfigError("levels must be positive")
        self.k_grid = tuple(int(k) for k in self.k_grid)
        if not self.k_grid or min(self.k_grid) < 1:
            raise ConfigError("test k grid must contain positive integers")
        if self.eta_k_grid is not None:
            self.eta_k_grid = tuple(int(k) for k in self.eta_k_grid)
        self.u_grid = tuple(float(u) for u in self.u_grid)
        if any(not 0 <= u < 1 for u in self.u_grid):
            raise ConfigError("u grid must lie in [0, 1)")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.null not in ("dependence", "independence", "both"):
            raise ConfigError(f"unknown null hypothesis {self.null!r}")
        if self.variance_mode not in ("at_one", "at_estimate"):
            raise ConfigError(f"unknown variance mode {self.variance_mode!r}")
        if self.critical not in ("paper", "simulate"):
            raise ConfigError(f"--critical must be 'paper' or 'simulate', got {self.critical!r}")
        if self.critical == "paper" and not math.isclose(self.alpha, 0.05):
            raise ConfigError("tabulated critical values exist only for alpha = 0.05; use --critical simulate")

    def spectral_rule(self, n: int):
        if self.k is not None:
            return polar.OrderStatistic(self.k)
        return polar.Quantile(0.95 if self.quantile is None else self.quantile)

    def header(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


@dataclass
class Table:
    kind: str
    rows: List[tuple]
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def columns(self) -> Tuple[str, ...]:
        return SCHEMAS[self.kind]

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.rows]) if self.rows else np.empty((0, len(self.columns)))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def emit_plot_data(table: Table, path: str, header_lines: Sequence[str] = ()) -> str:
    """Write one panel's data as comma-delimited text with '#' metadata lines."""
    directory = os.path.dirname(path) or "."
    if not os.path.isdir(directory):
        raise OSError(f"output directory {directory!r} does not exist")
    if not os.access(directory, os.W_OK):
        raise OSError(f"output directory {directory!r} is not writable")
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# kind: {table.kind}\n")
        for key in sorted(table.meta):
            fh.write(f"# {key}: {_fmt(table.meta[key])}\n")
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _valid(grid, lo, hi):
    return [k for k in grid if lo <= k <= hi]


def spectral_tables(p: ParetoSample, cfg: RunConfig) -> Dict[str, Table]:
    ps = polar.select_exceedances(polar.to_polar(p), cfg.spectral_rule(p.n))
    w = ps.exceedance_angles()
    est = spectral.estimate_spectral(w, cfg.estimator)
    nu = spectral.cross_validate_nu(est) if cfg.nu == "cv" else float(cfg.nu)
    est.nu = nu
    smoother = spectral.BetaSmoother(est, nu)
    x = (np.arange(DENSITY_POINTS) + 0.5) / DENSITY_POINTS
    dens, cdf = smoother.pdf(x), smoother.cdf(x)
    exceed = np.zeros(p.n, dtype=bool)
    exceed[ps.exceed_idx] = True
    meta = {
        "estimator": est.kind.value,
        "nu": nu,
        "threshold": ps.threshold,
        "n_exceed": ps.n_exceed,
        "negative_weights": est.has_negative_weights,
    }
    return {
        "polar": Table("polar", list(zip(range(p.n), ps.radius, ps.w, exceed)), {"threshold": ps.threshold}),
        "spectral_weights": Table("spectral_weights", list(zip(w, est.weights)), meta),
        "spectral_density": Table("spectral_density", list(zip(x, dens, cdf)), meta),
    }


def stdf_tables(p: ParetoSample, cfg: RunConfig) -> Dict[str, Table]:
    k = cfg.stdf_k
    if not 1 <= k <= p.n - 1:
        raise ValueError(f"stdf k = {k} outside [1, {p.n - 1}]")
    emp = stdf.empirical_stdf(p, k)
    ps = polar.select_exceedances(polar.to_polar(p), polar.OrderStatistic(k))
    est = spectral.estimate_spectral(ps.exceedance_angles(), cfg.estimator)
    cf = stdf.cf_stdf(est)
    t = np.linspace(0.0, 1.0, LEVEL_RAYS)
    out = {}
    for name, ell in (("levels_empirical", emp), ("levels_cf", cf)):
        rows = []
        for c in cfg.levels:
            pts = stdf.level_set(ell, c, LEVEL_RAYS)
            rows.extend(zip([c] * LEVEL_RAYS, t, pts[:, 0], pts[:, 1]))
        out[name] = Table(name, rows, {"k": k, "estimator": est.kind.value if ell is cf else "empirical"})
    summary = [
        ("ell_empirical_11", emp(1.0, 1.0)),
        ("ell_cf_11", cf(1.0, 1.0)),
        ("chi_empirical", coeffs.chi_from_stdf(emp)),
        ("chi_cf", coeffs.chi_from_stdf(cf)),
        ("theta_logistic_fit", stdf.fit_logistic_theta(cf)),
    ]
    out["summary"] = Table("summary", summary, {"k": k})
    return out


def coeff_tables(p: ParetoSample, cfg: RunConfig) -> Dict[str, Table]:
    u = np.asarray(cfg.u_grid)
    chi = coeffs.chi_u(p, u) if u.size else np.empty(0)
    s = coeffs.structure_variable(p)
    grid = cfg.eta_k_grid if cfg.eta_k_grid is not None else tuple(coeffs.default_k_grid(p.n))
    rows = []
    for k in _valid(grid, 10, p.n - 1):
        h = coeffs.hill_eta(s, k)
        fit = coeffs.gpd_fit_excesses(s, int(k))
        rows.append((int(k), h, fit.shape if fit.converged else math.nan, coeffs.chibar(h)))
    return {
        "chi": Table("chi", list(zip(u, np.atleast_1d(chi)))),
        "eta": Table("eta", rows),
    }


def test_tables(p: ParetoSample, cfg: RunConfig, critical=None) -> Dict[str, Table]:
    out = {}
    if cfg.null in ("dependence", "both"):
        rows = []
        for k in _valid(cfg.k_grid, 10, p.n - 1):
            r = hyptest.eta_test(p, k, cfg.alpha, cfg.variance_mode)
            rows.append((k, r.eta_mle, r.sigma_at_one, r.sigma_at_estimate, r.chi_hat, r.cx_hat,
                         r.cy_hat, r.critical_value, r.reject))
        out["eta_test"] = Table("eta_test", rows, {"alpha": cfg.alpha, "variance_mode": cfg.variance_mode})
    if cfg.null in ("independence", "both"):
        crit_int, crit_sup = critical or (hyptest.TABULATED_CRITICAL_INT, hyptest.TABULATED_CRITICAL_SUP)
        rows = []
        for k in _valid(cfg.k_grid, 1, p.n // 2):
            r = hyptest.indep_test(p, k, cfg.alpha, crit_int, crit_sup)
            rows.append((k, r.t_int, r.t_sup, r.critical_int, r.critical_sup, r.reject_int, r.reject_sup))
        out["indep_test"] = Table("indep_test", rows, {"alpha": cfg.alpha, "critical": cfg.critical})
    return out


SECTIONS = {
    "spectral": spectral_tables,
    "stdf": stdf_tables,
    "coeffs": coeff_tables,
    "test": test_tables,
}


def analyze_pair(p: ParetoSample, cfg: RunConfig, sections=tuple(SECTIONS), critical=None) -> Dict[str, Table]:
    """All requested tables for one bivariate rank-standardized sample."""
    if p.d != 2:
        raise ValueError("analyze_pair needs a bivariate sample")
    tables: Dict[str, Table] = {}
    for name in sections:
        if name == "test":
            tables.update(test_tables(p, cfg, critical))
        else:
            tables.update(SECTIONS[name](p, cfg))
    return tables


def select_pairs(data: SampleMatrix, cols=None) -> List[Tuple[str, str]]:
    if data.d < 2:
        raise ConfigError("need at least two numeric columns")
    if cols is not None:
        missing = [c for c in cols if c not in data.labels]
        if missing:
            raise ConfigError(f"unknown column(s) {missing}; available: {data.labels}")
        return [tuple(cols)]
    return list(itertools.combinations(data.labels, 2))


def limit_critical_values(cfg: RunConfig):
    if cfg.critical == "paper":
        return hyptest.TABULATED_CRITICAL_INT, hyptest.TABULATED_CRITICAL_SUP
    return hyptest.simulate_limit_quantiles(cfg.alpha, cfg.mc_paths, cfg.mc_steps, cfg.seed)


def run_pairwise_report(cfg: RunConfig, data: Optional[SampleMatrix] = None, sections=tuple(SECTIONS)):
    """Analyze every selected pair and write one file per table under ``cfg.out``.

    Returns ``{(col_a, col_b): {kind: Table}}``. File names are
    ``<col_a>__<col_b>__<kind>.csv``; each starts with the serialized config.
    """
    if data is None:
        if cfg.input is None:
            raise ConfigError("no input file given")
        if not os.path.isfile(cfg.input):
            raise ConfigError(f"input file {cfg.input!r} not found")
        try:
            data = read_table(cfg.input, returns=cfg.returns, period=cfg.period)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    pairs = select_pairs(data, cfg.cols)
    ranks = rank_transform(data)
    critical = limit_critical_values(cfg) if "test" in sections and cfg.null != "dependence" else None
    os.makedirs(cfg.out, exist_ok=True)
    header = [f"config: {cfg.header()}"]
    bundle = {}
    for a, b in pairs:
        p = ranks.select([data.labels.index(a), data.labels.index(b)])
        try:
            tables = analyze_pair(p, cfg, sections, critical)
        except (TailDepError, ValueError, ArithmeticError) as exc:
            raise PairError((a, b), exc) from exc
        for kind, table in tables.items():
            table.meta.setdefault("pair", f"{a},{b}")
            emit_plot_data(table, os.path.join(cfg.out, f"{a}__{b}__{kind}.csv"), header)
        if cfg.figures:
            from .plotting import render_pair

            render_pair(tables, os.path.join(cfg.out, f"{a}__{b}"), title=f"{a} vs {b}")
        bundle[(a, b)] = tables
    return bundle
