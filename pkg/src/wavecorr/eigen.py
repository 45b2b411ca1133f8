"""Symmetric eigendecomposition and standard-deviation-unit (SDU) normalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, DataError, NumericalError

Scale = Union[int, str]  # level j, or "raw" for the unfiltered matrix

MAX_SWEEPS = 100
OFF_TOL = 1e-12


@dataclass(frozen=True)
class EigenRecord:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray | None = None  # columns matched to eigenvalues
    window_index: int = 0
    scale: Scale = "raw"

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])

    def top(self, k: int) -> np.ndarray:
        """The ``k`` largest eigenvalues, largest first."""
        return self.eigenvalues[::-1][:k]


@dataclass(frozen=True)
class SduSeries:
    values: np.ndarray
    reference_mean: float
    reference_sd: float
    eigen_index: int | None = None
    scale: Scale = "raw"


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component of every column is made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def jacobi_eigh(a, max_sweeps: int = MAX_SWEEPS, tol: float = OFF_TOL):
    """Cyclic Jacobi eigenvalue iteration for a real symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm drops below ``tol`` times the
    matrix's Frobenius norm. Returns unsorted ``(eigenvalues, eigenvectors)``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    eps = np.finfo(float).eps
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= tol * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                # below rounding level of both diagonal entries: drop it
                if abs(apq) <= eps * 1e-2 * min(abs(a[p, p]), abs(a[q, q])) or abs(apq) <= eps * 1e-3 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def spectrum(
    matrix,
    want_vectors: bool = False,
    method: str = "lapack",
    window_index: int = 0,
    scale: Scale = "raw",
) -> EigenRecord:
    """Eigenvalues of a symmetric matrix in ascending order.

    ``method`` is ``"lapack"`` (default) or ``"jacobi"``. Eigenvector signs are
    fixed so each column's largest-magnitude entry is positive.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("matrix contains non-finite entries")
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > 1e-10 * max(1.0, np.max(np.abs(a))):
        raise DataError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    a = 0.5 * (a + a.T)
    if method == "lapack":
        if want_vectors:
            vals, vecs = np.linalg.eigh(a)
        else:
            vals, vecs = np.linalg.eigvalsh(a), None
    elif method == "jacobi":
        vals, vecs = jacobi_eigh(a)
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        if not want_vectors:
            vecs = None
    else:
        raise ConfigError(f"unknown eigen method {method!r}")
    if vecs is not None:
        vecs = _fix_signs(vecs)
    return EigenRecord(vals, vecs, window_index, scale)


def to_sdu(
    series,
    reference: slice | tuple[int, int] | None = None,
    eigen_index: int | None = None,
    scale: Scale = "raw",
) -> SduSeries:
    """Express a series in units of its reference-period standard deviation.

    The reference defaults to the whole series. Mean and (population) standard
    deviation are taken over the reference range only, then applied to every point.
    """
    x = np.asarray(series, dtype=float)
    if reference is None:
        ref = x
    else:
        sl = reference if isinstance(reference, slice) else slice(*reference)
        ref = x[sl]
    if ref.size < 2:
        raise DataError("SDU reference period needs at least 2 points")
    mean = float(ref.mean())
    sd = float(ref.std())
    if sd <= 1e-14 * max(1.0, abs(mean)):
        raise DataError("SDU reference period has zero variance")
    return SduSeries((x - mean) / sd, mean, sd, eigen_index, scale)
