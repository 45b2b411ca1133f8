"""Sliding-window eigenvalue dynamics across raw and wavelet scales."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .eigen import EigenRecord, Scale, spectrum
from .errors import ConfigError, WavecorrError
from .ingest import ReturnsPanel
from .modwt import WaveletFilter, decompose, max_level, scale_of
from .wavestats import mean_offdiagonal, raw_correlation, wavelet_correlation_matrix

log = logging.getLogger(__name__)


def scale_label(scale: Scale) -> str:
    return str(scale)


def parse_scales(text: str) -> list[Scale]:
    """Parse ``"raw,1,2,3"`` into ``["raw", 1, 2, 3]``."""
    out: list[Scale] = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok == "raw":
            out.append("raw")
        else:
            try:
                out.append(int(tok))
            except ValueError:
                raise ConfigError(f"bad scale {tok!r}; use 'raw' or a level number") from None
    if not out:
        raise ConfigError("no scales requested")
    return out


@dataclass(frozen=True)
class WindowPlan:
    window_length: int
    levels: int
    stride: int | None = None  # None -> window_length // 10
    min_unbiased: int = 32
    scales: tuple | None = None  # None -> raw and every level

    @property
    def step(self) -> int:
        return self.stride if self.stride is not None else max(1, self.window_length // 10)

    @property
    def requested(self) -> tuple:
        if self.scales is None:
            return ("raw", *range(1, self.levels + 1))
        return tuple(self.scales)

    def q_ratio(self, n_assets: int) -> float:
        return self.window_length / n_assets

    def n_windows(self, n_obs: int) -> int:
        return (n_obs - self.window_length) // self.step + 1

    def validate(self, filt: WaveletFilter, n_obs: int | None = None) -> None:
        if self.window_length < 2:
            raise ConfigError("window length must be >= 2")
        if self.step < 1:
            raise ConfigError("stride must be >= 1")
        if n_obs is not None and n_obs < self.window_length:
            raise ConfigError(f"panel has {n_obs} observations, window needs {self.window_length}")
        levels_used = [s for s in self.requested if s != "raw"]
        if self.levels < 0:
            raise ConfigError("levels must be >= 0")
        if levels_used or self.levels > 0:
            if self.window_length < filt.width:
                raise ConfigError(
                    f"window length {self.window_length} shorter than filter width {filt.width}"
                )
            limit = max_level(self.window_length, filt, self.min_unbiased)
            if self.levels > limit:
                raise ConfigError(
                    f"levels={self.levels} exceeds max_level={limit} for window "
                    f"{self.window_length}, filter {filt.name}, min_unbiased={self.min_unbiased}"
                )
        for s in self.requested:
            if s != "raw" and not (isinstance(s, int) and 1 <= s <= self.levels):
                raise ConfigError(f"scale {s!r} not in raw or 1..{self.levels}")


@dataclass
class DynamicsResult:
    asset_ids: list[str]
    scales: tuple
    window_starts: np.ndarray
    window_length: int
    eigenvalues: dict  # scale -> (n_windows, N), ascending per row
    avg_corr: dict  # scale -> (n_windows,)
    failures: list = field(default_factory=list)  # (window_index, message)

    @property
    def n_windows(self) -> int:
        return len(self.window_starts)

    def largest(self, scale: Scale, k: int = 1) -> np.ndarray:
        """Time series of the k-th largest eigenvalue (k=1 is lambda_max)."""
        return self.eigenvalues[scale][:, -k]

    def write_long_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["window_start", "scale", "metric", "value"])
            for i, start in enumerate(self.window_starts):
                for s in self.scales:
                    w.writerow([int(start), scale_label(s), "avg_corr", repr(float(self.avg_corr[s][i]))])
                    for k, lam in enumerate(self.eigenvalues[s][i], start=1):
                        w.writerow([int(start), scale_label(s), f"lambda_{k}", repr(float(lam))])

    def write_wide_csv(self, path, scale: Scale) -> None:
        n = len(self.asset_ids)
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["window_start", "avg_corr", *(f"lambda_{k}" for k in range(1, n + 1))])
            for i, start in enumerate(self.window_starts):
                w.writerow([
                    int(start),
                    repr(float(self.avg_corr[scale][i])),
                    *(repr(float(v)) for v in self.eigenvalues[scale][i]),
                ])


@dataclass(frozen=True)
class WindowOutcome:
    record: EigenRecord
    avg_corr: float
    n_clipped: int = 0
    m_j: int = 0


def analyze_window(
    returns: np.ndarray,
    filt: WaveletFilter,
    levels: int,
    scales: Sequence[Scale],
    asset_ids: Sequence[str] | None = None,
    window_index: int = 0,
    want_vectors: bool = False,
) -> dict:
    """Correlation matrices and spectra for one window, keyed by scale.

    The window is decomposed on its own; no coefficients are borrowed from
    neighbouring data.
    """
    out = {}
    dec = None
    if any(s != "raw" for s in scales):
        dec = decompose(returns, filt, levels)
    for s in scales:
        if s == "raw":
            c = raw_correlation(returns, asset_ids)
            rec = spectrum(c.correlation, want_vectors, window_index=window_index, scale=s)
            out[s] = WindowOutcome(rec, mean_offdiagonal(c.correlation), 0, c.window_length)
        else:
            cs = wavelet_correlation_matrix(dec, s, asset_ids)
            rec = spectrum(cs.correlation, want_vectors, window_index=window_index, scale=s)
            out[s] = WindowOutcome(rec, mean_offdiagonal(cs.correlation), cs.n_clipped, cs.m_j)
    return out


def run_dynamics(
    panel: ReturnsPanel,
    plan: WindowPlan,
    filt: WaveletFilter,
    skip_failures: bool = False,
    workers: int = 1,
) -> DynamicsResult:
    """Slide a window over ``panel`` and collect eigenvalue series per scale.

    An estimator failure aborts with the window index attached unless
    ``skip_failures`` is set, in which case the window is filled with NaN and
    listed in ``failures``. ``workers > 1`` processes windows on a thread pool;
    output is identical to sequential processing.
    """
    plan.validate(filt, panel.n_obs)
    scales = plan.requested
    n_win = plan.n_windows(panel.n_obs)
    starts = np.arange(n_win) * plan.step
    n = panel.n_assets
    r = panel.returns

    def work(i):
        s0 = int(starts[i])
        try:
            return analyze_window(
                r[:, s0:s0 + plan.window_length], filt, plan.levels, scales,
                panel.asset_ids, window_index=i,
            )
        except WavecorrError as exc:
            if not skip_failures:
                raise type(exc)(f"window {i} (start {s0}): {exc}") from exc
            return f"window {i} (start {s0}): {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(work, range(n_win)))
    else:
        outcomes = [work(i) for i in range(n_win)]

    eig = {s: np.full((n_win, n), np.nan) for s in scales}
    avg = {s: np.full(n_win, np.nan) for s in scales}
    failures = []
    for i, res in enumerate(outcomes):
        if isinstance(res, str):
            failures.append((i, res))
            log.warning("skipped %s", res)
            continue
        for s in scales:
            eig[s][i] = res[s].record.eigenvalues
            avg[s][i] = res[s].avg_corr
    return DynamicsResult(list(panel.asset_ids), scales, starts, plan.window_length, eig, avg, failures)


@dataclass(frozen=True)
class EppsRow:
    scale: Scale
    horizon: int  # base periods; 1 for the raw returns
    avg_corr: float
    top_eigenvalues: tuple  # three largest, largest first
    m_j: int
    n_clipped: int = 0


def epps_summary(
    panel: ReturnsPanel,
    filt: WaveletFilter,
    levels: int,
    min_unbiased: int = 32,
) -> list[EppsRow]:
    """Full-sample average correlation and leading eigenvalues per scale."""
    plan = WindowPlan(panel.n_obs, levels, stride=1, min_unbiased=min_unbiased)
    plan.validate(filt, panel.n_obs)
    res = analyze_window(panel.returns, filt, levels, plan.requested, panel.asset_ids)
    rows = []
    for s in plan.requested:
        o = res[s]
        horizon = 1 if s == "raw" else scale_of(s)
        rows.append(EppsRow(s, horizon, o.avg_corr, tuple(float(v) for v in o.record.top(3)), o.m_j, o.n_clipped))
    return rows


def write_epps_csv(path, rows: Sequence[EppsRow]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scale", "horizon_periods", "avg_offdiag_corr", "eig_1st", "eig_2nd", "eig_3rd", "m_j"])
        for r in rows:
            top = list(r.top_eigenvalues) + [float("nan")] * (3 - len(r.top_eigenvalues))
            w.writerow([scale_label(r.scale), r.horizon, repr(r.avg_corr), *(repr(v) for v in top), r.m_j])
