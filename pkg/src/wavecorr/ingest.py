"""Price/return panels: CSV loading, return construction and synthetic generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError

MODELS = ("iid-gaussian", "equicorrelated", "one-factor", "asynchronous-ticks")


@dataclass(frozen=True)
class PricePanel:
    asset_ids: list[str]
    timestamps: list
    prices: np.ndarray  # (N, T)
    n_filled: int = 0

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        if prices.ndim != 2:
            raise DataError("prices must be a 2-D (assets x observations) array")
        if len(self.asset_ids) != prices.shape[0]:
            raise DataError(
                f"{len(self.asset_ids)} asset ids for {prices.shape[0]} price rows"
            )
        if prices.shape[0] < 2:
            raise DataError("a price panel needs at least 2 assets")
        if len(self.timestamps) != prices.shape[1]:
            raise DataError(
                f"{len(self.timestamps)} timestamps for {prices.shape[1]} observations"
            )
        if not np.all(np.isfinite(prices)):
            raise DataError("price panel contains missing or non-finite values")
        bad = np.argwhere(prices <= 0)
        if bad.size:
            i, t = bad[0]
            raise DataError(f"non-positive price at (row {t}, col {self.asset_ids[i]})")
        _check_increasing(self.timestamps)

    @property
    def n_assets(self) -> int:
        return self.prices.shape[0]

    @property
    def n_obs(self) -> int:
        return self.prices.shape[1]


@dataclass(frozen=True)
class ReturnsPanel:
    asset_ids: list[str]
    timestamps: list
    returns: np.ndarray  # (N, T)

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        if returns.ndim != 2:
            raise DataError("returns must be a 2-D (assets x observations) array")
        if len(self.asset_ids) != returns.shape[0]:
            raise DataError(
                f"{len(self.asset_ids)} asset ids for {returns.shape[0]} return rows"
            )
        if returns.shape[0] < 2:
            raise DataError("a returns panel needs at least 2 assets")
        if returns.shape[1] < 2:
            raise DataError("a returns panel needs at least 2 observations")
        if len(self.timestamps) != returns.shape[1]:
            raise DataError(
                f"{len(self.timestamps)} timestamps for {returns.shape[1]} observations"
            )
        bad = np.argwhere(~np.isfinite(returns))
        if bad.size:
            i, t = bad[0]
            raise DataError(f"non-finite return at (row {t}, col {self.asset_ids[i]})")

    @property
    def n_assets(self) -> int:
        return self.returns.shape[0]

    @property
    def n_obs(self) -> int:
        return self.returns.shape[1]

    def window(self, start: int, length: int) -> "ReturnsPanel":
        if start < 0 or length < 2 or start + length > self.n_obs:
            raise ConfigError(
                f"window [{start}, {start + length}) outside panel of length {self.n_obs}"
            )
        return ReturnsPanel(
            list(self.asset_ids),
            list(self.timestamps[start:start + length]),
            self.returns[:, start:start + length],
        )


@dataclass(frozen=True)
class SyntheticSpec:
    n_assets: int
    n_obs: int
    model: str = "iid-gaussian"
    rho: float = 0.0
    tick_prob: float = 1.0
    seed: int = 0
    sigma: float = 0.01

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown synthetic model {self.model!r}; choose from {MODELS}")
        if self.n_assets < 2:
            raise ConfigError("n_assets must be >= 2")
        if self.n_obs < 2:
            raise ConfigError("n_obs must be >= 2")
        # rho = 1 is the degenerate identical-series panel, only meaningful for the factor model
        upper_ok = self.rho <= 1.0 if self.model == "one-factor" else self.rho < 1.0
        if not (0.0 <= self.rho and upper_ok):
            raise ConfigError(f"rho={self.rho} outside [0, 1) for model {self.model}")
        if not (0.0 < self.tick_prob <= 1.0):
            raise ConfigError(f"tick_prob={self.tick_prob} outside (0, 1]")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")


def _check_increasing(timestamps: Sequence) -> None:
    for k in range(1, len(timestamps)):
        if not timestamps[k] > timestamps[k - 1]:
            raise DataError(
                f"non-monotone timestamps at row {k}: {timestamps[k - 1]!r} -> {timestamps[k]!r}"
            )


def _parse_timestamps(raw: list[str]) -> list:
    try:
        return [int(s) for s in raw]
    except ValueError:
        pass
    out = []
    for row, s in enumerate(raw, start=1):
        try:
            out.append(datetime.fromisoformat(s))
        except ValueError:
            raise DataError(f"unparseable timestamp {s!r} at row {row}") from None
    return out


def load_prices(path, ffill: bool = False, delimiter: str = ",") -> PricePanel:
    """Read a wide price CSV: a timestamp column followed by one column per asset.

    Empty cells are rejected unless ``ffill`` is set, in which case they are
    filled from the previous row and the count is kept in ``n_filled``.
    A gap in the first data row cannot be filled.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [c.strip() for c in rows[0]]
    asset_ids = header[1:]
    if len(asset_ids) < 2:
        raise DataError(f"{path}: need at least 2 asset columns, found {len(asset_ids)}")
    if len(set(asset_ids)) != len(asset_ids):
        raise DataError(f"{path}: duplicate asset names in header")

    width = len(header)
    stamps, values = [], np.empty((len(rows) - 1, width - 1))
    n_filled = 0
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise DataError(f"{path}: ragged row {r}: {len(row)} fields, header has {width}")
        stamps.append(row[0].strip())
        for c, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "" or cell.lower() in ("na", "nan"):
                if ffill and r > 1:
                    values[r - 1, c] = values[r - 2, c]
                    n_filled += 1
                    continue
                raise DataError(f"missing value at (row {r}, col {asset_ids[c]})")
            try:
                values[r - 1, c] = float(cell)
            except ValueError:
                raise DataError(
                    f"parse failure at (row {r}, col {asset_ids[c]}): {cell!r}"
                ) from None
            if not math.isfinite(values[r - 1, c]):
                raise DataError(f"non-finite price at (row {r}, col {asset_ids[c]})")
            if values[r - 1, c] <= 0:
                raise DataError(f"non-positive price at (row {r}, col {asset_ids[c]})")

    timestamps = _parse_timestamps(stamps)
    _check_increasing(timestamps)
    return PricePanel(asset_ids, timestamps, values.T.copy(), n_filled=n_filled)


def load_returns(path, delimiter: str = ",") -> ReturnsPanel:
    """Read a wide CSV that already holds returns (same layout as prices)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if len(rows) < 3:
        raise DataError(f"{path}: need a header row and at least two data rows")
    header = [c.strip() for c in rows[0]]
    stamps, data = [], []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: ragged row {r}: {len(row)} fields, header has {len(header)}")
        stamps.append(row[0].strip())
        try:
            data.append([float(c) for c in row[1:]])
        except ValueError:
            raise DataError(f"{path}: parse failure in row {r}") from None
    timestamps = _parse_timestamps(stamps)
    _check_increasing(timestamps)
    return ReturnsPanel(header[1:], timestamps, np.array(data).T)


def write_panel_csv(path, asset_ids: Sequence[str], timestamps: Sequence, values: np.ndarray) -> None:
    """Write an (N, T) matrix in the wide input layout, full float precision."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", *asset_ids])
        for t, stamp in enumerate(timestamps):
            s = stamp.isoformat() if isinstance(stamp, datetime) else str(stamp)
            w.writerow([s, *(repr(float(v)) for v in values[:, t])])


def compute_returns(prices: np.ndarray, kind: str = "log") -> np.ndarray:
    """Returns along the last axis of a price array; width shrinks by one."""
    p = np.asarray(prices, dtype=float)
    if p.shape[-1] < 2:
        raise DataError("need at least 2 prices to form a return")
    if kind == "log":
        return np.diff(np.log(p), axis=-1)
    if kind == "simple":
        return p[..., 1:] / p[..., :-1] - 1.0
    raise ConfigError(f"unknown return kind {kind!r}; use 'log' or 'simple'")


def to_returns(panel: PricePanel, kind: str = "log") -> ReturnsPanel:
    """Per-period returns; the first timestamp is dropped."""
    r = compute_returns(panel.prices, kind)
    return ReturnsPanel(list(panel.asset_ids), list(panel.timestamps[1:]), r)


def returns_to_prices(returns: np.ndarray, initial: float | np.ndarray = 100.0) -> np.ndarray:
    """Inverse of log returns: prices with a leading column equal to ``initial``."""
    returns = np.asarray(returns, dtype=float)
    start = np.broadcast_to(np.asarray(initial, dtype=float), returns.shape[:-1])
    logp = np.concatenate([np.zeros(returns.shape[:-1] + (1,)), np.cumsum(returns, axis=-1)], axis=-1)
    return start[..., None] * np.exp(logp)


def _equicorrelated(rng: np.random.Generator, n: int, t: int, rho: float) -> np.ndarray:
    corr = np.full((n, n), rho)
    np.fill_diagonal(corr, 1.0)
    chol = np.linalg.cholesky(corr)
    return chol @ rng.standard_normal((n, t))


def generate_synthetic(spec: SyntheticSpec) -> ReturnsPanel:
    """Draw a returns panel; the output is a pure function of ``spec``."""
    rng = np.random.default_rng(spec.seed)
    n, t = spec.n_assets, spec.n_obs
    if spec.model == "iid-gaussian":
        z = rng.standard_normal((n, t))
    elif spec.model == "equicorrelated":
        z = _equicorrelated(rng, n, t, spec.rho)
    elif spec.model == "one-factor":
        market = rng.standard_normal(t)
        idio = rng.standard_normal((n, t))
        z = math.sqrt(spec.rho) * market[None, :] + math.sqrt(1.0 - spec.rho) * idio
    else:
        # latent tick process observed through independent Bernoulli(tick_prob) updates
        latent = _equicorrelated(rng, n, t + 1, spec.rho)
        log_price = np.cumsum(latent, axis=1)
        seen = rng.random((n, t + 1)) < spec.tick_prob
        seen[:, 0] = True
        idx = np.where(seen, np.arange(t + 1)[None, :], 0)
        np.maximum.accumulate(idx, axis=1, out=idx)
        observed = np.take_along_axis(log_price, idx, axis=1)
        z = np.diff(observed, axis=1)
    ids = [f"A{i:03d}" for i in range(n)]
    return ReturnsPanel(ids, list(range(1, t + 1)), spec.sigma * z)


def generate_regime_panel(
    n_assets: int,
    segments: Sequence[tuple[int, float, float]],
    seed: int = 0,
    sigma: float = 0.01,
) -> ReturnsPanel:
    """Concatenate one-factor segments given as ``(length, rho, drift)``.

    Each segment has pairwise correlation ``rho`` and a per-period mean return
    ``drift`` added to every asset. Useful for regime-switching fixtures.
    """
    if n_assets < 2:
        raise ConfigError("n_assets must be >= 2")
    rng = np.random.default_rng(seed)
    blocks = []
    for length, rho, drift in segments:
        if length < 1 or not (0.0 <= rho <= 1.0):
            raise ConfigError(f"bad segment {(length, rho, drift)}")
        market = rng.standard_normal(length)
        idio = rng.standard_normal((n_assets, length))
        z = math.sqrt(rho) * market[None, :] + math.sqrt(1.0 - rho) * idio
        blocks.append(drift + sigma * z)
    r = np.concatenate(blocks, axis=1)
    ids = [f"A{i:03d}" for i in range(n_assets)]
    return ReturnsPanel(ids, list(range(1, r.shape[1] + 1)), r)


@dataclass(frozen=True)
class PriceSeries:
    timestamps: list
    values: np.ndarray


def load_prices_single(path, delimiter: str = ",") -> PriceSeries:
    """Read a two-column (timestamp, level) CSV such as an index series."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if len(rows) < 3 or any(len(r) != 2 for r in rows):
        raise DataError(f"{path}: expected a header and >= 2 rows of (timestamp, level)")
    stamps, vals = [], []
    for r, (stamp, cell) in enumerate(rows[1:], start=1):
        try:
            v = float(cell)
        except ValueError:
            raise DataError(f"{path}: parse failure at row {r}: {cell!r}") from None
        if not v > 0:
            raise DataError(f"{path}: non-positive level at row {r}")
        stamps.append(stamp.strip())
        vals.append(v)
    timestamps = _parse_timestamps(stamps)
    _check_increasing(timestamps)
    return PriceSeries(timestamps, np.array(vals))
