"""Maximal overlap discrete wavelet transform (MODWT).

The transform is the non-decimated pyramid of Percival & Walden with circular
boundary handling. DWT filters are rescaled by 1/sqrt(2) when applied, so

    sum_t x_t**2 == sum_j sum_t d_{j,t}**2 + sum_t s_{J,t}**2

holds exactly (up to rounding) for every input length.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

# Least-asymmetric Daubechies scaling filter of width 8 (Percival & Walden's LA(8)),
# computed to full double precision by spectral factorization.
_LA8_SCALING = (
    -0.07576571478950218,
    -0.029635527646002535,
    0.4976186676327748,
    0.803738751805132,
    0.29785779560530634,
    -0.09921954357663332,
    -0.012603967262031352,
    0.03222310060405141,
)

_SCALING_FILTERS = {
    "haar": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "la8": _LA8_SCALING,
}


@dataclass(frozen=True)
class WaveletFilter:
    name: str
    scaling: tuple[float, ...]
    wavelet: tuple[float, ...]

    @property
    def width(self) -> int:
        return len(self.scaling)


def quadrature_mirror(scaling) -> tuple[float, ...]:
    """Wavelet filter h_l = (-1)**l * g_{L-1-l} from a scaling filter g."""
    g = list(scaling)
    n = len(g)
    return tuple((-1) ** l * g[n - 1 - l] for l in range(n))


def make_filter(name: str) -> WaveletFilter:
    key = name.strip().lower()
    if key not in _SCALING_FILTERS:
        raise ConfigError(
            f"unknown filter {name!r}; available: {', '.join(sorted(_SCALING_FILTERS))}"
        )
    g = _SCALING_FILTERS[key]
    return WaveletFilter(key, tuple(g), quadrature_mirror(g))


def boundary_width(level: int, width: int) -> int:
    """Width L_j of the level-j equivalent filter.

    The leading L_j - 1 coefficients of crystal j wrap around the series end;
    coefficients from index L_j - 1 onward are boundary-free.
    """
    return (2 ** level - 1) * (width - 1) + 1


def max_level(n_obs: int, filt: WaveletFilter, min_unbiased: int = 32) -> int:
    """Largest J keeping at least ``min_unbiased`` boundary-free coefficients.

    Returns 0 when even level 1 is too coarse for ``n_obs``.
    """
    if n_obs < filt.width:
        raise ConfigError(f"series length {n_obs} shorter than filter width {filt.width}")
    j = 0
    while n_obs - boundary_width(j + 1, filt.width) + 1 >= min_unbiased:
        j += 1
    return j


@dataclass(frozen=True)
class WaveletDecomposition:
    """MODWT crystals.

    ``details`` has shape ``(J, *batch, T)`` and ``smooth`` has shape
    ``(*batch, T)``; a single series has no batch axes, a panel has one.
    """

    details: np.ndarray
    smooth: np.ndarray
    boundary_width: tuple[int, ...]
    filter_name: str

    @property
    def levels(self) -> int:
        return self.details.shape[0]

    @property
    def n_obs(self) -> int:
        return self.smooth.shape[-1]

    def detail(self, level: int) -> np.ndarray:
        if not 1 <= level <= self.levels:
            raise ConfigError(f"level {level} outside 1..{self.levels}")
        return self.details[level - 1]

    def n_unbiased(self, level: int) -> int:
        """M_j: number of boundary-free coefficients at ``level``."""
        return self.n_obs - self.boundary_width[level - 1] + 1


def _circular_filter(v: np.ndarray, taps: np.ndarray, step: int) -> np.ndarray:
    # out[t] = sum_l taps[l] * v[t - step*l mod T]
    n = v.shape[-1]
    out = np.zeros_like(v)
    for l, c in enumerate(taps):
        out += c * np.roll(v, (step * l) % n, axis=-1)
    return out


def decompose(series, filt: WaveletFilter, levels: int) -> WaveletDecomposition:
    """Run the MODWT pyramid to ``levels`` levels along the last axis.

    Accepts a single series of length T or an (N, T) panel; every crystal has
    the input's length.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim == 0 or x.shape[-1] < filt.width:
        raise DataError(
            f"series length {x.shape[-1] if x.ndim else 0} shorter than filter width {filt.width}"
        )
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    n = x.shape[-1]
    limit = max_level(n, filt, min_unbiased=1)
    if not 1 <= levels <= limit:
        raise ConfigError(
            f"levels={levels} not in 1..max_level={limit} for T={n} and filter {filt.name}"
        )
    h = np.asarray(filt.wavelet) / math.sqrt(2)
    g = np.asarray(filt.scaling) / math.sqrt(2)
    details = np.empty((levels,) + x.shape)
    v = x
    for j in range(levels):
        step = 2 ** j
        details[j] = _circular_filter(v, h, step)
        v = _circular_filter(v, g, step)
    widths = tuple(boundary_width(j, filt.width) for j in range(1, levels + 1))
    return WaveletDecomposition(details, v, widths, filt.name)


def scale_of(level: int) -> int:
    """Unitless dyadic scale tau_j = 2**(j-1) in base sampling periods."""
    return 2 ** (level - 1)


def write_crystals_csv(path, dec: WaveletDecomposition) -> None:
    """Dump a single-series decomposition as columns t, d1..dJ, sJ."""
    if dec.smooth.ndim != 1:
        raise ConfigError("crystal dump expects a single-series decomposition")
    J = dec.levels
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *(f"d{j}" for j in range(1, J + 1)), f"s{J}"])
        for t in range(dec.n_obs):
            w.writerow([t, *(repr(float(dec.details[j, t])) for j in range(J)), repr(float(dec.smooth[t]))])
