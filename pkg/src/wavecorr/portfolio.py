r"""Unconstrained mean-variance optimization (short sales allowed) per scale.

The frontier uses the two-constraint Lagrangian closed form. With
:math:`A = 1'\Sigma^{-1}1`, :math:`B = 1'\Sigma^{-1}\mu`, :math:`C = \mu'\Sigma^{-1}\mu`
and :math:`D = AC - B^2`, the minimum-variance portfolio with return ``m`` is

.. math::

   w(m) = [(C - Bm)\Sigma^{-1}1 + (Am - B)\Sigma^{-1}\mu] / D

with variance :math:`(Am^2 - 2Bm + C)/D`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .eigen import Scale
from .errors import ConfigError, DataError, NumericalError
from .ingest import ReturnsPanel
from .modwt import WaveletFilter, decompose, max_level
from .wavestats import raw_correlation, wavelet_correlation_matrix
from .windows import scale_label

COND_TOL = 1e-10


@dataclass(frozen=True)
class ScaleCovariance:
    scale: Scale
    covariance: np.ndarray
    source_window: tuple[int, int] | None = None


@dataclass(frozen=True)
class FrontierPoint:
    target_return: float
    stdev: float
    weights: np.ndarray


@dataclass(frozen=True)
class Frontier:
    scale: Scale
    points: list[FrontierPoint]
    gmv: FrontierPoint
    a: float
    b: float
    c: float

    @property
    def d(self) -> float:
        return self.a * self.c - self.b ** 2

    def variance_at(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        return (self.a * m ** 2 - 2 * self.b * m + self.c) / self.d


def build_covariance(corr, vols, scale: Scale = "raw", source_window=None) -> ScaleCovariance:
    """Sigma_ik = vol_i * vol_k * rho_ik."""
    c = np.asarray(getattr(corr, "correlation", corr), dtype=float)
    v = np.asarray(vols, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or v.shape != (c.shape[0],):
        raise DataError(f"correlation {c.shape} and vols {v.shape} do not match")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise DataError("volatilities must be positive")
    if np.max(np.abs(c - c.T)) > 1e-10:
        raise DataError("correlation matrix is not symmetric")
    return ScaleCovariance(scale, c * np.outer(v, v), source_window)


def _factor(cov: np.ndarray):
    eig = np.linalg.eigvalsh(cov)
    if eig[-1] <= 0 or eig[0] <= COND_TOL * eig[-1]:
        raise NumericalError(
            f"covariance is singular or ill-conditioned (min/max eigenvalue "
            f"{eig[0]:.3g}/{eig[-1]:.3g}); refusing to invert"
        )
    try:
        return cho_factor(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky factorization failed: {exc}") from exc


def min_variance_frontier(cov: ScaleCovariance | np.ndarray, mu, targets: Sequence[float]) -> Frontier:
    sigma = np.asarray(getattr(cov, "covariance", cov), dtype=float)
    scale = getattr(cov, "scale", "raw")
    mu = np.asarray(mu, dtype=float)
    n = sigma.shape[0]
    if mu.shape != (n,):
        raise DataError(f"{mu.size} expected returns for {n} assets")
    fac = _factor(sigma)
    ones = np.ones(n)
    inv_1 = cho_solve(fac, ones)
    inv_mu = cho_solve(fac, mu)
    a = ones @ inv_1
    b = ones @ inv_mu
    c = mu @ inv_mu
    d = a * c - b * b
    if d <= 1e-12 * a * c:
        raise NumericalError("expected returns are (nearly) all equal; frontier is degenerate")

    def point(m, w):
        var = max(float(w @ sigma @ w), 0.0)
        return FrontierPoint(float(m), float(np.sqrt(var)), w)

    points = []
    for m in targets:
        w = ((c - b * m) * inv_1 + (a * m - b) * inv_mu) / d
        points.append(point(m, w))
    w_gmv = inv_1 / a
    return Frontier(scale, points, point(b / a, w_gmv), float(a), float(b), float(c))


def default_targets(mu, n_points: int = 21) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    return np.linspace(mu.min(), mu.max(), n_points)


def frontier_by_scale(
    panel: ReturnsPanel,
    window: tuple[int, int] | None,
    filt: WaveletFilter,
    levels: int,
    mu=None,
    vols=None,
    targets: Sequence[float] | None = None,
    scales: Sequence[Scale] | None = None,
    min_unbiased: int = 32,
) -> dict:
    """Frontiers from raw and per-scale correlation on one window.

    Expected returns and volatilities default to full-sample means and
    standard deviations and are shared by every scale, so frontiers differ
    only through correlation structure.
    """
    r = panel.returns
    start, length = window if window is not None else (0, panel.n_obs)
    if start < 0 or length < 2 or start + length > panel.n_obs:
        raise ConfigError(f"window ({start}, {length}) outside panel of length {panel.n_obs}")
    if scales is None:
        scales = ("raw", *range(1, levels + 1))
    wanted = [s for s in scales if s != "raw"]
    if wanted:
        limit = max_level(length, filt, min_unbiased)
        if levels > limit or max(wanted) > levels:
            raise ConfigError(f"levels={levels} exceeds max_level={limit} for window length {length}")
    mu = r.mean(axis=1) if mu is None else np.asarray(mu, dtype=float)
    vols = r.std(axis=1) if vols is None else np.asarray(vols, dtype=float)
    if targets is None:
        targets = default_targets(mu)
    block = r[:, start:start + length]
    dec = decompose(block, filt, levels) if wanted else None
    out = {}
    for s in scales:
        if s == "raw":
            corr = raw_correlation(block, panel.asset_ids).correlation
        else:
            corr = wavelet_correlation_matrix(dec, s, panel.asset_ids).correlation
        cov = build_covariance(corr, vols, s, (start, length))
        out[s] = min_variance_frontier(cov, mu, targets)
    return out


def write_frontier_csv(path, frontiers: dict, asset_ids: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scale", "target_return", "stdev", *(f"w_{i}" for i in range(1, len(asset_ids) + 1))])
        for s, fr in frontiers.items():
            for p in fr.points:
                w.writerow([scale_label(s), repr(p.target_return), repr(p.stdev), *(repr(float(x)) for x in p.weights)])


def write_gmv_csv(path, frontiers: dict, asset_ids: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scale", "return", "stdev", *asset_ids])
        for s, fr in frontiers.items():
            g = fr.gmv
            w.writerow([scale_label(s), repr(g.target_return), repr(g.stdev), *(repr(float(x)) for x in g.weights)])
