"""Drawdown/drawup partitions of SDU eigenvalue series and the one-factor check."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .eigen import Scale, spectrum, to_sdu
from .errors import ConfigError, DataError
from .ingest import ReturnsPanel
from .wavestats import RawCorrelationMatrix, ScaleCorrelationSet, mean_offdiagonal
from .windows import DynamicsResult, scale_label


def index_returns(panel, weights=None) -> np.ndarray:
    """Per-observation index return: weighted average across assets.

    ``panel`` is a ReturnsPanel or an (N, T) array. Equal weights by default.
    """
    r = panel.returns if isinstance(panel, ReturnsPanel) else np.atleast_2d(np.asarray(panel, dtype=float))
    n = r.shape[0]
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ConfigError(f"{w.size} weights for {n} assets")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ConfigError(f"weights sum to {w.sum()}, expected 1")
    return w @ r


def window_returns(series, starts, length: int, kind: str = "log") -> np.ndarray:
    """Aggregate a return series over each window ``[start, start + length)``.

    Log returns are summed; simple returns are compounded.
    """
    x = np.asarray(series, dtype=float)
    starts = np.asarray(starts, dtype=int)
    if starts.size and (starts.min() < 0 or starts.max() + length > x.size):
        raise ConfigError("window extends past the end of the index series")
    if kind == "log":
        csum = np.concatenate([[0.0], np.cumsum(x)])
        return csum[starts + length] - csum[starts]
    if kind == "simple":
        return np.array([np.prod(1.0 + x[s:s + length]) - 1.0 for s in starts])
    raise ConfigError(f"unknown return kind {kind!r}")


@dataclass(frozen=True)
class Partition:
    above: np.ndarray  # window indices with sdu > upper
    below: np.ndarray  # window indices with sdu < lower
    mean_above: float  # NaN when empty
    mean_below: float
    total_above: float
    total_below: float

    @property
    def count_above(self) -> int:
        return int(self.above.size)

    @property
    def count_below(self) -> int:
        return int(self.below.size)

    @property
    def empty_above(self) -> bool:
        return self.above.size == 0

    @property
    def empty_below(self) -> bool:
        return self.below.size == 0


def partition_by_sdu(sdu, window_rets, upper: float = 1.0, lower: float = -1.0) -> Partition:
    """Split windows by SDU excursions and average the index return in each set.

    Thresholds are strict. An empty set yields NaN mean and zero total.
    """
    values = sdu.values if hasattr(sdu, "values") else np.asarray(sdu, dtype=float)
    rets = np.asarray(window_rets, dtype=float)
    if values.shape != rets.shape:
        raise DataError(f"SDU series ({values.size}) and window returns ({rets.size}) not aligned")
    if not lower < upper:
        raise ConfigError("lower threshold must be below upper threshold")
    above = np.flatnonzero(values > upper)
    below = np.flatnonzero(values < lower)

    def stats(idx):
        if idx.size == 0:
            return math.nan, 0.0
        return float(rets[idx].mean()), float(rets[idx].sum())

    ma, ta = stats(above)
    mb, tb = stats(below)
    return Partition(above, below, ma, mb, ta, tb)


@dataclass(frozen=True)
class PartitionRow:
    scale: Scale
    eigen_rank: int  # 1 = largest eigenvalue
    partition: Partition


def partition_report(
    dyn: DynamicsResult,
    window_rets,
    eigen_rank: int = 1,
    reference: slice | tuple[int, int] | None = None,
    upper: float = 1.0,
    lower: float = -1.0,
) -> list[PartitionRow]:
    """Partition every scale's k-th largest eigenvalue series, one row per scale."""
    if not 1 <= eigen_rank <= len(dyn.asset_ids):
        raise ConfigError(f"eigen rank {eigen_rank} outside 1..{len(dyn.asset_ids)}")
    rets = np.asarray(window_rets, dtype=float)
    if rets.size != dyn.n_windows:
        raise DataError(f"{rets.size} window returns for {dyn.n_windows} windows")
    rows = []
    for s in dyn.scales:
        lam = dyn.largest(s, eigen_rank)
        ok = np.isfinite(lam)
        sdu = np.full_like(lam, np.nan)
        sdu[ok] = to_sdu(lam[ok], reference).values
        # skipped (NaN) windows fall in neither set
        part = partition_by_sdu(np.where(ok, sdu, 0.0), np.where(ok, rets, 0.0), upper, lower)
        rows.append(PartitionRow(s, eigen_rank, part))
    return rows


def write_partition_csv(path, rows: Sequence[PartitionRow]) -> None:
    """One row per scale; returns are per-window aggregates in percent."""
    def pct(v):
        return "" if math.isnan(v) else repr(100.0 * v)

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([
            "scale", "eigen_rank", "mean_return_pct_gt1", "mean_return_pct_lt_minus1",
            "total_return_pct_gt1", "total_return_pct_lt_minus1",
            "count_gt1", "count_lt_minus1", "empty_gt1", "empty_lt_minus1",
        ])
        for r in rows:
            p = r.partition
            w.writerow([
                scale_label(r.scale), r.eigen_rank, pct(p.mean_above), pct(p.mean_below),
                pct(p.total_above), pct(p.total_below), p.count_above, p.count_below,
                int(p.empty_above), int(p.empty_below),
            ])


class OneFactorCheck(NamedTuple):
    predicted: float
    actual: float
    gap: float


def one_factor_check(corr) -> OneFactorCheck:
    """Compare lambda_max with 1 + (N - 1) * mean off-diagonal correlation."""
    if isinstance(corr, (RawCorrelationMatrix, ScaleCorrelationSet)):
        c = corr.correlation
    else:
        c = np.asarray(corr, dtype=float)
    n = c.shape[0]
    predicted = 1.0 + (n - 1) * mean_offdiagonal(c)
    actual = spectrum(c).largest
    return OneFactorCheck(predicted, actual, actual - predicted)
