"""Loading raw series and standardizing margins by ranks.

Everything downstream depends on the data only through the rank matrix, so
any strictly increasing transformation of a column leaves all estimates
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import rankdata

__all__ = [
    "SampleMatrix",
    "ParetoSample",
    "ECDF_CONVENTIONS",
    "neg_log_returns",
    "rank_transform",
    "read_table",
    "write_table",
]

# R = rank under the max-rank convention, n = sample size.
ECDF_CONVENTIONS = {
    "lower": lambda r, n: (r - 1.0) / n,
    "upper": lambda r, n: r / n,
    "mid": lambda r, n: (r - 0.5) / n,
}


@dataclass
class SampleMatrix:
    """An n x d matrix of finite observations with column labels.

    ``index`` optionally carries a date column; it is never used in any
    computation, only carried along for output alignment.
    """

    values: np.ndarray
    labels: list = field(default_factory=list)
    index: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        n, d = values.shape
        if n < 2 or d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValueError(
                f"non-finite entry at row {bad[0]}, column {bad[1]}; "
                "missing values are not imputed"
            )
        self.values = values
        if not self.labels:
            self.labels = [f"x{j + 1}" for j in range(d)]
        self.labels = [str(lab) for lab in self.labels]
        if len(self.labels) != d:
            raise ValueError(f"{len(self.labels)} labels for {d} columns")
        if self.index is not None and len(self.index) != n:
            raise ValueError("index length does not match the number of rows")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, label) -> np.ndarray:
        return self.values[:, self.labels.index(str(label))]

    def select(self, labels: Sequence) -> "SampleMatrix":
        idx = [self.labels.index(str(lab)) for lab in labels]
        return SampleMatrix(self.values[:, idx], [self.labels[j] for j in idx], self.index)


@dataclass
class ParetoSample:
    """Rank-standardized sample.

    Attributes
    ----------
    ranks : (n, d) int array
        Max-rank convention, ``R_ij = #{l : X_lj <= X_ij}``.
    ecdf : (n, d) array
        Empirical distribution function at the data, ``(R - 1) / n`` by default.
    pareto : (n, d) array
        Unit-Pareto scale values ``n / (n + 1 - R)``, in ``[1, n]``.
    """

    ranks: np.ndarray
    ecdf: np.ndarray
    pareto: np.ndarray
    labels: list = field(default_factory=list)
    convention: str = "lower"

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def d(self) -> int:
        return self.ranks.shape[1]

    def select(self, cols: Sequence[int]) -> "ParetoSample":
        cols = list(cols)
        labels = [self.labels[j] for j in cols] if self.labels else []
        return ParetoSample(
            self.ranks[:, cols], self.ecdf[:, cols], self.pareto[:, cols], labels, self.convention
        )


def neg_log_returns(prices, period: int = 1) -> np.ndarray:
    """Negative log-returns ``-log(P_i / P_{i-1})`` of a price series.

    The series is first subsampled every ``period`` entries. Works columnwise
    on 2-d input.
    """
    prices = np.asarray(prices, dtype=float)
    if period < 1:
        raise ValueError("period must be a positive integer")
    if prices.shape[0] < period + 1:
        raise ValueError(f"series of length {prices.shape[0]} is too short for period {period}")
    bad = np.argwhere(~(prices > 0))
    if bad.size:
        raise ValueError(f"non-positive price at index {tuple(int(b) for b in bad[0])}")
    sub = prices[::period]
    return -np.diff(np.log(sub), axis=0)


def pareto_from_ranks(ranks, labels=None, convention: str = "lower") -> ParetoSample:
    ranks = np.asarray(ranks)
    ranks = np.column_stack(
        [rankdata(ranks[:, j], method="max") for j in range(ranks.shape[1])]
    ).astype(np.int64)
    n = ranks.shape[0]
    try:
        ecdf = ECDF_CONVENTIONS[convention](ranks.astype(float), n)
    except KeyError:
        raise ValueError(
            f"unknown ECDF convention {convention!r}; choose from {sorted(ECDF_CONVENTIONS)}"
        ) from None
    pareto = n / (n + 1.0 - ranks)
    return ParetoSample(ranks, ecdf, pareto, list(labels or []), convention)


def rank_transform(data, convention: str = "lower") -> ParetoSample:
    """Standardize each column to uniform and unit-Pareto scale via ranks.

    Parameters
    ----------
    data : SampleMatrix or array_like
        n x d observations.
    convention : {"lower", "upper", "mid"}
        ECDF stored in ``ecdf``: ``(R-1)/n``, ``R/n`` or ``(R-1/2)/n``. The
        Pareto scale is always ``n / (n + 1 - R)``.
    """
    if not isinstance(data, SampleMatrix):
        data = SampleMatrix(data)
    ranks = np.column_stack(
        [rankdata(data.values[:, j], method="max") for j in range(data.d)]
    ).astype(np.int64)
    return pareto_from_ranks(ranks, data.labels, convention)


def read_table(path, returns: bool = True, period: int = 1) -> SampleMatrix:
    """Read a comma- or tab-delimited file with a header row.

    At most one non-numeric column is accepted and treated as a date index.
    Unless ``returns`` is True the numeric columns are taken as prices and
    converted to negative log-returns.
    """
    with open(path, "r", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty file")
    sep = "\t" if "\t" in lines[0] else ","
    frame = pd.read_csv(path, sep=sep, comment="#", float_precision="round_trip")
    numeric, dates = [], None
    for col in frame.columns:
        converted = pd.to_numeric(frame[col], errors="coerce")
        if converted.notna().sum() == frame[col].notna().sum() and frame[col].notna().any():
            numeric.append(col)
        elif dates is None:
            dates = frame[col].astype(str).to_numpy()
        else:
            raise ValueError(f"{path}: more than one non-numeric column ({col!r})")
    if not numeric:
        raise ValueError(f"{path}: no numeric columns")
    values = frame[numeric].apply(pd.to_numeric).to_numpy(dtype=float)
    if np.isnan(values).any():
        row = int(np.argwhere(np.isnan(values))[0, 0])
        raise ValueError(f"{path}: missing value in data row {row + 1}")
    if not returns:
        values = neg_log_returns(values, period)
        if dates is not None:
            dates = dates[::period][1:]
    return SampleMatrix(values, [str(c) for c in numeric], dates)


def write_table(path, sample: SampleMatrix, header_lines: Sequence[str] = ()) -> None:
    """Write a sample so that :func:`read_table` with ``returns=True`` recovers it exactly."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        cols = (["date"] if sample.index is not None else []) + list(sample.labels)
        fh.write(",".join(cols) + "\n")
        for i in range(sample.n):
            cells = [repr(float(v)) for v in sample.values[i]]
            if sample.index is not None:
                cells.insert(0, str(sample.index[i]))
            fh.write(",".join(cells) + "\n")
