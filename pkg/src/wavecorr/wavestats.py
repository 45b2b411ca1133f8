"""Raw and per-scale (wavelet) correlation estimators."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .modwt import WaveletDecomposition, scale_of


@dataclass(frozen=True)
class RawCorrelationMatrix:
    correlation: np.ndarray
    window_length: int

    @property
    def n_assets(self) -> int:
        return self.correlation.shape[0]


@dataclass(frozen=True)
class ScaleCorrelationSet:
    scale: int  # level j
    correlation: np.ndarray
    covariance: np.ndarray
    m_j: int
    n_clipped: int = 0
    min_eigenvalue: float = float("nan")

    @property
    def tau(self) -> int:
        return scale_of(self.scale)

    @property
    def n_assets(self) -> int:
        return self.correlation.shape[0]


def _asset_label(asset_ids, i):
    return asset_ids[i] if asset_ids is not None else f"#{i}"


def normalize_window(returns, asset_ids: Sequence[str] | None = None) -> np.ndarray:
    """Demean and scale each row to unit (population) standard deviation."""
    r = np.asarray(returns, dtype=float)
    centred = r - r.mean(axis=1, keepdims=True)
    sd = np.sqrt(np.mean(centred ** 2, axis=1))
    # a row is flat when its spread is rounding noise relative to its level
    scale = np.maximum(np.abs(r).max(axis=1), np.finfo(float).tiny)
    flat = np.flatnonzero(sd <= 1e-14 * scale)
    if flat.size:
        raise DataError(
            f"zero-variance series for asset {_asset_label(asset_ids, flat[0])} in window"
        )
    return centred / sd[:, None]


def raw_correlation(returns, asset_ids: Sequence[str] | None = None) -> RawCorrelationMatrix:
    """Equal-time correlation C = R R^T / T of the normalized window."""
    r = normalize_window(returns, asset_ids)
    n, t = r.shape
    if n < 2 or t < 2:
        raise DataError(f"need N >= 2 and T >= 2, got N={n}, T={t}")
    c = r @ r.T / t
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    np.clip(c, -1.0, 1.0, out=c)
    return RawCorrelationMatrix(c, t)


def wavelet_covariance(dx, dy, boundary_width: int) -> tuple[float, int]:
    """Unbiased wavelet covariance over the boundary-free coefficients.

    Returns ``(nu, m_j)`` with m_j = T - L_j + 1 and the sum running over
    t = L_j - 1 .. T - 1.
    """
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    if dx.shape != dy.shape or dx.ndim != 1:
        raise DataError("crystals must be 1-D and of equal length")
    m = dx.size - boundary_width + 1
    if m < 1:
        raise DataError(f"no boundary-free coefficients: T={dx.size}, L_j={boundary_width}")
    start = boundary_width - 1
    return float(np.dot(dx[start:], dy[start:]) / m), m


def _stack_level(decs, level: int) -> tuple[np.ndarray, int, int]:
    if isinstance(decs, WaveletDecomposition):
        if decs.details.ndim != 3:
            raise DataError("expected a panel decomposition with details of shape (J, N, T)")
        d = decs.detail(level)
        return d, decs.boundary_width[level - 1], decs.n_unbiased(level)
    decs = list(decs)
    first = decs[0]
    for k, dec in enumerate(decs):
        if dec.n_obs != first.n_obs or dec.filter_name != first.filter_name:
            raise DataError(f"decomposition {k} does not share length/filter with the first")
        if dec.levels < level:
            raise DataError(f"decomposition {k} has only {dec.levels} levels, need {level}")
    d = np.stack([dec.detail(level) for dec in decs])
    return d, first.boundary_width[level - 1], first.n_unbiased(level)


def _flat_floor(decs, d: np.ndarray) -> np.ndarray:
    # per-asset mean energy of the input (details + smooth); a wavelet variance
    # below rounding level of that is treated as zero
    if isinstance(decs, WaveletDecomposition):
        energy = (decs.details ** 2).sum(axis=(0, -1)) + (decs.smooth ** 2).sum(axis=-1)
    else:
        energy = np.array([(x.details ** 2).sum() + (x.smooth ** 2).sum() for x in decs])
    return (1e-13) ** 2 * energy / d.shape[-1]


def wavelet_correlation_matrix(
    decs: WaveletDecomposition | Sequence[WaveletDecomposition],
    scale: int,
    asset_ids: Sequence[str] | None = None,
) -> ScaleCorrelationSet:
    """Pairwise wavelet correlation rho_fg = nu_fg / (nu_f nu_g) at one level.

    Only detail crystals enter; the smooth crystal is ignored. Estimates are
    clipped to [-1, 1] and the number of clipped entries is recorded.
    """
    d, width, m = _stack_level(decs, scale)
    if m < 1:
        raise DataError(f"scale {scale}: no boundary-free coefficients (L_j={width})")
    free = d[:, width - 1:]
    cov = free @ free.T / m
    cov = 0.5 * (cov + cov.T)
    var = np.diag(cov).copy()
    zero = np.flatnonzero(var <= _flat_floor(decs, d))
    if zero.size:
        raise DataError(
            f"zero wavelet variance for asset {_asset_label(asset_ids, zero[0])} at scale {scale}"
        )
    sd = np.sqrt(var)
    corr = cov / np.outer(sd, sd)
    np.fill_diagonal(corr, 1.0)
    n_clipped = int(np.count_nonzero(np.abs(corr) > 1.0))
    np.clip(corr, -1.0, 1.0, out=corr)
    min_eig = float(np.linalg.eigvalsh(corr)[0])
    return ScaleCorrelationSet(scale, corr, cov, m, n_clipped, min_eig)


def mean_offdiagonal(corr) -> float:
    """Average of the off-diagonal entries (diagonal excluded)."""
    c = np.asarray(corr, dtype=float)
    n = c.shape[0]
    return float((c.sum() - np.trace(c)) / (n * (n - 1)))


def write_matrix_csv(path, matrix, asset_ids: Sequence[str]) -> None:
    m = np.asarray(matrix)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *asset_ids])
        for name, row in zip(asset_ids, m):
            w.writerow([name, *(repr(float(v)) for v in row)])
